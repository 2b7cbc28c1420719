use serde::{Deserialize, Serialize};

use super::edt::{distance_transform, DistanceField};
use super::mask::{BoundingBox, CompactSetMask, Point};
use crate::{Error, Result};

/// Label of pixels not covered by any square.
pub const NONE: u32 = u32::MAX;

/// Dyadic square `[i, i+1] x [j, j+1] * side` at `level` of the box grid.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicSquare {
    pub level: u32,
    pub i: usize,
    pub j: usize,
}

impl DyadicSquare {
    pub fn side(&self, bbox: &BoundingBox) -> f64 {
        bbox.pixel_size(self.level)
    }

    pub fn diam(&self, bbox: &BoundingBox) -> f64 {
        self.side(bbox) * std::f64::consts::SQRT_2
    }

    pub fn center(&self, bbox: &BoundingBox) -> Point {
        bbox.pixel_center(self.level, self.i, self.j)
    }

    /// Lower-left pixel and side length, in pixels of `mask_level`.
    pub fn pixel_block(&self, mask_level: u32) -> (usize, usize, usize) {
        let s = 1usize << (mask_level - self.level);
        (self.i * s, self.j * s, s)
    }
}

/// Whitney decomposition of the complement of a mask: maximal dyadic squares
/// `Q` with `diam(Q) <= dist(Q, K) <= 4 diam(Q)`, plus residual squares at the
/// deepest level that are still too close to `K`.
#[derive(Clone, Debug)]
pub struct WhitneyDecomposition {
    pub bbox: BoundingBox,
    pub mask_level: u32,
    pub deepest_level: u32,
    pub squares: Vec<DyadicSquare>,
    /// Deepest-level squares violating the left Whitney inequality.
    pub residual: Vec<bool>,
    /// `dist(Q, K)`: minimum of the distance field over the square's pixels.
    pub dist_to_set: Vec<f64>,
    /// `d(z_j)`: distance from the square's center to `K`.
    pub center_distance: Vec<f64>,
    /// Unordered pairs `(a, b)`, `a < b`, of squares whose boundaries meet.
    pub adjacency: Vec<(usize, usize)>,
    /// The subset of `adjacency` sharing a boundary segment of positive length.
    pub edge_adjacency: Vec<(usize, usize)>,
    /// Square index per mask pixel, [`NONE`] for `K` and uncovered pixels.
    pub labels: Vec<u32>,
    pub distance_field: DistanceField,
    neighbors: Vec<Vec<usize>>,
    edge_neighbors: Vec<Vec<usize>>,
}

impl WhitneyDecomposition {
    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn center(&self, k: usize) -> Point {
        self.squares[k].center(&self.bbox)
    }

    pub fn side(&self, k: usize) -> f64 {
        self.squares[k].side(&self.bbox)
    }

    pub fn diam(&self, k: usize) -> f64 {
        self.squares[k].diam(&self.bbox)
    }

    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.neighbors[k]
    }

    pub fn edge_neighbors(&self, k: usize) -> &[usize] {
        &self.edge_neighbors[k]
    }

    pub fn pixel_block(&self, k: usize) -> (usize, usize, usize) {
        self.squares[k].pixel_block(self.mask_level)
    }

    /// Square containing `p`, if any.
    pub fn containing(&self, p: Point) -> Option<usize> {
        let (i, j) = self.bbox.pixel_of(self.mask_level, p)?;
        let l = self.labels[j * (1 << self.mask_level) + i];
        (l != NONE).then_some(l as usize)
    }

    /// Whether square `k` touches the outer boundary of the box.
    pub fn touches_box_boundary(&self, k: usize) -> bool {
        let (i0, j0, s) = self.pixel_block(k);
        let n = 1usize << self.mask_level;
        i0 == 0 || j0 == 0 || i0 + s == n || j0 + s == n
    }
}

/// Builds the Whitney decomposition of the complement of `mask`, subdividing
/// no deeper than `deepest_level`.
pub fn whitney(mask: &CompactSetMask, deepest_level: u32) -> Result<WhitneyDecomposition> {
    let df = distance_transform(mask);
    whitney_with_field(mask, deepest_level, df)
}

pub(crate) fn whitney_with_field(
    mask: &CompactSetMask,
    deepest_level: u32,
    df: DistanceField,
) -> Result<WhitneyDecomposition> {
    if deepest_level > mask.level {
        return Err(Error::param(
            "deepest_level",
            format!("{deepest_level} exceeds mask level {}", mask.level),
        ));
    }
    let bbox = mask.bbox;
    let top = mask.level;
    let n = mask.n();

    // min-pyramid of the distance field, pyramid[l] has 2^l x 2^l entries
    let mut pyramid: Vec<Vec<f64>> = vec![Vec::new(); top as usize + 1];
    pyramid[top as usize] = df.values().to_vec();
    for l in (0..top).rev() {
        let m = 1usize << l;
        let fine = &pyramid[l as usize + 1];
        let mut coarse = vec![0.0; m * m];
        for j in 0..m {
            for i in 0..m {
                let a = fine[(2 * j) * 2 * m + 2 * i];
                let b = fine[(2 * j) * 2 * m + 2 * i + 1];
                let c = fine[(2 * j + 1) * 2 * m + 2 * i];
                let d = fine[(2 * j + 1) * 2 * m + 2 * i + 1];
                coarse[j * m + i] = a.min(b).min(c).min(d);
            }
        }
        pyramid[l as usize] = coarse;
    }

    let mut squares = Vec::new();
    let mut residual = Vec::new();
    let mut dist_to_set = Vec::new();
    let mut stack = vec![DyadicSquare {
        level: 0,
        i: 0,
        j: 0,
    }];
    while let Some(q) = stack.pop() {
        let dist = pyramid[q.level as usize][q.j * (1 << q.level) + q.i];
        let diam = q.diam(&bbox);
        if dist > 0.0 && diam <= dist {
            squares.push(q);
            residual.push(false);
            dist_to_set.push(dist);
        } else if q.level == deepest_level {
            if dist > 0.0 {
                squares.push(q);
                residual.push(true);
                dist_to_set.push(dist);
            }
        } else {
            // push in reverse so squares come out in a stable row-major-ish order
            for (di, dj) in [(1, 1), (0, 1), (1, 0), (0, 0)] {
                stack.push(DyadicSquare {
                    level: q.level + 1,
                    i: 2 * q.i + di,
                    j: 2 * q.j + dj,
                });
            }
        }
    }

    let mut labels = vec![NONE; n * n];
    for (k, q) in squares.iter().enumerate() {
        let (i0, j0, s) = q.pixel_block(top);
        for j in j0..j0 + s {
            labels[j * n + i0..j * n + i0 + s].fill(k as u32);
        }
    }

    let mut adjacency = Vec::new();
    let mut edge_adjacency = Vec::new();
    let pair = |a: u32, b: u32| (a.min(b) as usize, a.max(b) as usize);
    for j in 0..n {
        for i in 0..n {
            let a = labels[j * n + i];
            if a == NONE {
                continue;
            }
            let mut check = |ii: usize, jj: usize, edge: bool| {
                let b = labels[jj * n + ii];
                if b != NONE && b != a {
                    adjacency.push(pair(a, b));
                    if edge {
                        edge_adjacency.push(pair(a, b));
                    }
                }
            };
            if i + 1 < n {
                check(i + 1, j, true);
            }
            if j + 1 < n {
                check(i, j + 1, true);
                if i + 1 < n {
                    check(i + 1, j + 1, false);
                }
                if i > 0 {
                    check(i - 1, j + 1, false);
                }
            }
        }
    }
    adjacency.sort_unstable();
    adjacency.dedup();
    edge_adjacency.sort_unstable();
    edge_adjacency.dedup();

    let mut neighbors = vec![Vec::new(); squares.len()];
    for &(a, b) in &adjacency {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    let mut edge_neighbors = vec![Vec::new(); squares.len()];
    for &(a, b) in &edge_adjacency {
        edge_neighbors[a].push(b);
        edge_neighbors[b].push(a);
    }

    let center_distance = squares.iter().map(|q| df.at(q.center(&bbox))).collect();

    Ok(WhitneyDecomposition {
        bbox,
        mask_level: top,
        deepest_level,
        squares,
        residual,
        dist_to_set,
        center_distance,
        adjacency,
        edge_adjacency,
        labels,
        distance_field: df,
        neighbors,
        edge_neighbors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, ShapeSpec};

    fn decompose(spec: &str, level: u32) -> (CompactSetMask, WhitneyDecomposition) {
        let spec: ShapeSpec = spec.parse().unwrap();
        let mask = rasterize(&spec, spec.default_box().unwrap(), level).unwrap();
        let w = whitney(&mask, level).unwrap();
        (mask, w)
    }

    #[test]
    fn sandwich_holds_for_disk() {
        let (_, w) = decompose("disk:0.5", 9);
        for k in 0..w.len() {
            if w.residual[k] {
                continue;
            }
            let (diam, dist) = (w.diam(k), w.dist_to_set[k]);
            assert!(
                diam <= dist && dist <= 4.0 * diam,
                "square {k}: {diam} {dist}"
            );
        }
    }

    #[test]
    fn rings_around_a_point_double_in_size() {
        let bbox = BoundingBox::new(Point::ORIGIN, 1.0).unwrap();
        let mask = rasterize(
            &ShapeSpec::Dot {
                center: Point::ORIGIN,
            },
            bbox,
            8,
        )
        .unwrap();
        let w = whitney(&mask, 8).unwrap();
        let pc = mask.pixel_center_of(mask.occupied()[0]);
        let mut by_level: std::collections::BTreeMap<u32, (f64, f64)> = Default::default();
        for k in 0..w.len() {
            let r = w.center(k).dist(pc);
            let e = by_level
                .entry(w.squares[k].level)
                .or_insert((f64::INFINITY, 0.0));
            e.0 = e.0.min(r);
            e.1 = e.1.max(r);
        }
        // coarser squares live strictly farther out
        let levels: Vec<_> = by_level.iter().collect();
        for pair in levels.windows(2) {
            let (coarse, fine) = (pair[0].1, pair[1].1);
            assert!(coarse.0 >= fine.0, "{levels:?}");
        }
    }

    #[test]
    fn coverage_and_neighbor_ratio() {
        let (mask, w) = decompose("segment:1", 8);
        let n = mask.n();
        let h = mask.pixel_size();
        for k in 0..n * n {
            if w.distance_field.get_index(k) > 4.0 * h {
                assert_ne!(w.labels[k], NONE);
            }
            if mask.get_index(k) {
                assert_eq!(w.labels[k], NONE);
            }
        }
        for &(a, b) in &w.adjacency {
            let r = w.side(a) / w.side(b);
            assert!((0.25..=4.0).contains(&r));
        }
    }

    #[test]
    fn adjacency_is_exact_touching_relation() {
        let (_, w) = decompose("cantor:0.25,2", 6);
        let touch = |a: usize, b: usize| {
            let (ai, aj, asz) = w.pixel_block(a);
            let (bi, bj, bsz) = w.pixel_block(b);
            let gx = ai.max(bi) as i64 - (ai + asz).min(bi + bsz) as i64;
            let gy = aj.max(bj) as i64 - (aj + asz).min(bj + bsz) as i64;
            (gx <= 0 && gy <= 0, gx < 0 || gy < 0)
        };
        let set: std::collections::HashSet<_> = w.adjacency.iter().copied().collect();
        let eset: std::collections::HashSet<_> = w.edge_adjacency.iter().copied().collect();
        for a in 0..w.len() {
            for b in a + 1..w.len() {
                let (t, e) = touch(a, b);
                assert_eq!(set.contains(&(a, b)), t, "{a} {b}");
                assert_eq!(eset.contains(&(a, b)), t && e, "{a} {b}");
            }
        }
    }

    #[test]
    fn rejects_too_deep() {
        let spec = ShapeSpec::disk(0.5);
        let mask = rasterize(&spec, spec.default_box().unwrap(), 5).unwrap();
        assert!(whitney(&mask, 6).is_err());
    }

    #[test]
    fn matches_brute_force_maximal_squares() {
        let (mask, w) = decompose("segment:1", 7);
        let occ: Vec<Point> = mask
            .occupied()
            .iter()
            .map(|&k| mask.pixel_center_of(k))
            .collect();
        let bbox = mask.bbox;
        let dist = |q: &DyadicSquare| {
            let (i0, j0, s) = q.pixel_block(mask.level);
            let mut best = f64::INFINITY;
            for j in j0..j0 + s {
                for i in i0..i0 + s {
                    let p = bbox.pixel_center(mask.level, i, j);
                    for o in &occ {
                        best = best.min(p.dist(*o));
                    }
                }
            }
            best
        };
        let mut good_at: Vec<Vec<bool>> = Vec::new();
        for level in 0..=mask.level {
            let m = 1usize << level;
            let mut row = vec![false; m * m];
            for j in 0..m {
                for i in 0..m {
                    let q = DyadicSquare { level, i, j };
                    let d = dist(&q);
                    row[j * m + i] = d > 0.0 && q.diam(&bbox) <= d;
                }
            }
            good_at.push(row);
        }
        let good = |l: u32, i: usize, j: usize| good_at[l as usize][j * (1 << l) + i];
        let mut expected = std::collections::HashSet::new();
        for level in 0..=mask.level {
            let m = 1usize << level;
            for j in 0..m {
                for i in 0..m {
                    let ancestor_good =
                        (0..level).any(|l| good(l, i >> (level - l), j >> (level - l)));
                    if good(level, i, j) && !ancestor_good {
                        expected.insert(DyadicSquare { level, i, j });
                    }
                }
            }
        }
        let got: std::collections::HashSet<_> = (0..w.len())
            .filter(|&k| !w.residual[k])
            .map(|k| w.squares[k])
            .collect();
        assert_eq!(got, expected);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn squares_tile_the_complement(
            pts in proptest::collection::vec((2usize..62, 2usize..62), 1..12)
        ) {
            let bbox = BoundingBox::new(Point::ORIGIN, 1.0).unwrap();
            let n = 64;
            let mut bits = vec![false; n * n];
            for (i, j) in pts {
                bits[j * n + i] = true;
            }
            let mask = CompactSetMask::from_bits(bbox, 6, ShapeSpec::custom("points"), &bits).unwrap();
            let w = whitney(&mask, 6).unwrap();
            // at full depth every complement pixel is covered exactly once
            let mut cover = vec![0u32; n * n];
            for k in 0..w.len() {
                let (i0, j0, s) = w.pixel_block(k);
                for j in j0..j0 + s {
                    for i in i0..i0 + s {
                        cover[j * n + i] += 1;
                    }
                }
                if !w.residual[k] {
                    proptest::prop_assert!(w.diam(k) <= w.dist_to_set[k]);
                    proptest::prop_assert!(w.dist_to_set[k] <= 4.0 * w.diam(k));
                }
            }
            for k in 0..n * n {
                proptest::prop_assert_eq!(cover[k], u32::from(!mask.get_index(k)));
            }
        }
    }
}
