use rayon::prelude::*;

use super::mask::{BoundingBox, CompactSetMask, Point};

/// Euclidean distance from every pixel center to the nearest occupied pixel
/// center, together with the index of that nearest pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub bbox: BoundingBox,
    pub level: u32,
    values: Vec<f64>,
    nearest: Vec<u32>,
}

impl DistanceField {
    pub fn n(&self) -> usize {
        1 << self.level
    }

    pub fn pixel_size(&self) -> f64 {
        self.bbox.pixel_size(self.level)
    }

    /// Distance at pixel `(i, j)`, in box units.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n() + i]
    }

    pub fn get_index(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row-major index of the occupied pixel nearest to pixel `k`.
    pub fn nearest_site(&self, k: usize) -> usize {
        self.nearest[k] as usize
    }

    /// Distance from an arbitrary point of the box to the occupied pixel
    /// centers, using the nearest sites of the surrounding pixels. Exact up
    /// to one pixel diagonal.
    pub fn at(&self, p: Point) -> f64 {
        let n = self.n() as i64;
        let Some((ci, cj)) = self.bbox.pixel_of(self.level, p) else {
            // outside the box: fall back to the clamped pixel plus the offset
            let q = Point::new(
                p.x.clamp(
                    self.bbox.center.x - self.bbox.half_side,
                    self.bbox.center.x + self.bbox.half_side,
                ),
                p.y.clamp(
                    self.bbox.center.y - self.bbox.half_side,
                    self.bbox.center.y + self.bbox.half_side,
                ),
            );
            return self.at(q) + p.dist(q);
        };
        let mut best = f64::INFINITY;
        for dj in -1..=1 {
            for di in -1..=1 {
                let (i, j) = (ci as i64 + di, cj as i64 + dj);
                if i < 0 || j < 0 || i >= n || j >= n {
                    continue;
                }
                let s = self.nearest[(j * n + i) as usize] as usize;
                let c = self
                    .bbox
                    .pixel_center(self.level, s % self.n(), s / self.n());
                best = best.min(p.dist(c));
            }
        }
        best
    }
}

/// One-dimensional squared distance transform (lower envelope of parabolas).
/// `f` holds squared distances (or infinity); writes the transform and the
/// minimizing index.
fn envelope(f: &[f64], d: &mut [f64], arg: &mut [usize]) {
    let n = f.len();
    let sites: Vec<usize> = (0..n).filter(|&q| f[q].is_finite()).collect();
    if sites.is_empty() {
        d.fill(f64::INFINITY);
        arg.fill(usize::MAX);
        return;
    }
    let mut v = Vec::with_capacity(sites.len());
    let mut z: Vec<f64> = Vec::with_capacity(sites.len() + 1);
    v.push(sites[0]);
    z.push(f64::NEG_INFINITY);
    z.push(f64::INFINITY);
    for &q in &sites[1..] {
        loop {
            let p = *v.last().unwrap();
            let (qf, pf) = (q as f64, p as f64);
            let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf));
            if s <= z[v.len() - 1] {
                v.pop();
                z.pop();
                if v.is_empty() {
                    v.push(q);
                    z.push(f64::INFINITY);
                    break;
                }
            } else {
                v.push(q);
                *z.last_mut().unwrap() = s;
                z.push(f64::INFINITY);
                break;
            }
        }
    }
    let mut k = 0;
    for x in 0..n {
        while z[k + 1] < x as f64 {
            k += 1;
        }
        let p = v[k];
        let dx = x as f64 - p as f64;
        d[x] = dx * dx + f[p];
        arg[x] = p;
    }
}

/// Exact Euclidean distance transform of `mask` by two separable passes.
pub fn distance_transform(mask: &CompactSetMask) -> DistanceField {
    let n = mask.n();
    // pass 1: along rows
    let rows: Vec<(Vec<f64>, Vec<usize>)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let f: Vec<f64> = (0..n)
                .map(|i| if mask.get(i, j) { 0.0 } else { f64::INFINITY })
                .collect();
            let mut d = vec![0.0; n];
            let mut a = vec![0; n];
            envelope(&f, &mut d, &mut a);
            (d, a)
        })
        .collect();
    // pass 2: along columns
    let cols: Vec<(Vec<f64>, Vec<usize>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let f: Vec<f64> = (0..n).map(|j| rows[j].0[i]).collect();
            let mut d = vec![0.0; n];
            let mut a = vec![0; n];
            envelope(&f, &mut d, &mut a);
            (d, a)
        })
        .collect();
    let h = mask.pixel_size();
    let mut values = vec![0.0; n * n];
    let mut nearest = vec![0u32; n * n];
    for (i, (d, a)) in cols.iter().enumerate() {
        for j in 0..n {
            let k = j * n + i;
            values[k] = d[j].sqrt() * h;
            let row = a[j];
            nearest[k] = (row * n + rows[row].1[i]) as u32;
        }
    }
    DistanceField {
        bbox: mask.bbox,
        level: mask.level,
        values,
        nearest,
    }
}
