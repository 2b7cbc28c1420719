use serde::{Deserialize, Serialize};

use super::shape::ShapeSpec;
use crate::{Error, Result, SCHEMA};

/// A point of the plane.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

/// Axis-aligned square frame that every computation of a run lives in.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub center: Point,
    pub half_side: f64,
}

impl BoundingBox {
    pub fn new(center: Point, half_side: f64) -> Result<Self> {
        if !(half_side > 0.0 && half_side.is_finite()) {
            return Err(Error::param("half_side", "must be positive and finite"));
        }
        if !(center.x.is_finite() && center.y.is_finite()) {
            return Err(Error::param("center", "must be finite"));
        }
        Ok(BoundingBox { center, half_side })
    }

    pub fn side(&self) -> f64 {
        2.0 * self.half_side
    }

    /// Lower-left corner.
    pub fn origin(&self) -> Point {
        Point::new(
            self.center.x - self.half_side,
            self.center.y - self.half_side,
        )
    }

    /// Pixel side length at `level`.
    pub fn pixel_size(&self, level: u32) -> f64 {
        self.side() / (1u64 << level) as f64
    }

    /// Center of pixel `(i, j)` at `level` (`i` along x, `j` along y).
    pub fn pixel_center(&self, level: u32, i: usize, j: usize) -> Point {
        let h = self.pixel_size(level);
        let o = self.origin();
        Point::new(o.x + (i as f64 + 0.5) * h, o.y + (j as f64 + 0.5) * h)
    }

    /// Pixel containing `p`, if `p` is inside the box.
    pub fn pixel_of(&self, level: u32, p: Point) -> Option<(usize, usize)> {
        let n = 1usize << level;
        let h = self.pixel_size(level);
        let o = self.origin();
        let fi = ((p.x - o.x) / h).floor();
        let fj = ((p.y - o.y) / h).floor();
        if fi < 0.0 || fj < 0.0 || fi > n as f64 || fj > n as f64 {
            return None;
        }
        // points on the far edge belong to the last pixel
        Some(((fi as usize).min(n - 1), (fj as usize).min(n - 1)))
    }

    pub fn contains(&self, p: Point) -> bool {
        (p.x - self.center.x).abs() <= self.half_side
            && (p.y - self.center.y).abs() <= self.half_side
    }

    pub fn scaled(&self, s: f64) -> BoundingBox {
        BoundingBox {
            center: self.center.scale(s),
            half_side: self.half_side * s,
        }
    }
}

/// Pixel representation of a compact set `K`: the union of the occupied
/// closed pixels of a `2^level x 2^level` grid over a [`BoundingBox`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompactSetMask {
    pub bbox: BoundingBox,
    pub level: u32,
    pub spec: ShapeSpec,
    words: Vec<u64>,
    count: usize,
}

pub(crate) const MIN_LEVEL: u32 = 3;
pub(crate) const MAX_LEVEL: u32 = 14;

impl CompactSetMask {
    /// Builds a mask from a row-major occupancy vector (`j * n + i`).
    ///
    /// Fails when no pixel is set or when a set pixel touches the box border.
    pub fn from_bits(
        bbox: BoundingBox,
        level: u32,
        spec: ShapeSpec,
        bits: &[bool],
    ) -> Result<Self> {
        if !(MIN_LEVEL..=MAX_LEVEL).contains(&level) {
            return Err(Error::param(
                "level",
                format!("{level} outside [{MIN_LEVEL}, {MAX_LEVEL}]"),
            ));
        }
        let n = 1usize << level;
        if bits.len() != n * n {
            return Err(Error::param(
                "bits",
                format!("expected {} pixels, got {}", n * n, bits.len()),
            ));
        }
        let mut words = vec![0u64; (n * n).div_ceil(64)];
        let mut count = 0;
        for (k, &b) in bits.iter().enumerate() {
            if b {
                words[k / 64] |= 1 << (k % 64);
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::EmptyMask(format!("{spec} has no occupied pixel")));
        }
        let mask = CompactSetMask {
            bbox,
            level,
            spec,
            words,
            count,
        };
        for c in super::border_cells(n) {
            if mask.get_index(c) {
                let (i, j) = (c % n, c / n);
                return Err(Error::Geometry(format!(
                    "occupied pixel ({i}, {j}) touches the box boundary; enlarge the box"
                )));
            }
        }
        Ok(mask)
    }

    /// Pixels per side.
    pub fn n(&self) -> usize {
        1 << self.level
    }

    pub fn pixel_size(&self) -> f64 {
        self.bbox.pixel_size(self.level)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.get_index(j * self.n() + i)
    }

    #[inline]
    pub fn get_index(&self, k: usize) -> bool {
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    /// Checked access; pixels outside the grid count as unoccupied.
    pub fn get_signed(&self, i: i64, j: i64) -> bool {
        let n = self.n() as i64;
        i >= 0 && j >= 0 && i < n && j < n && self.get(i as usize, j as usize)
    }

    pub fn occupied_count(&self) -> usize {
        self.count
    }

    /// Total area of the occupied closed pixels.
    pub fn area(&self) -> f64 {
        self.count as f64 * self.pixel_size().powi(2)
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.n() * self.n())
            .map(|k| self.get_index(k))
            .collect()
    }

    /// Indices of occupied pixels, row-major.
    pub fn occupied(&self) -> Vec<usize> {
        (0..self.n() * self.n())
            .filter(|&k| self.get_index(k))
            .collect()
    }

    /// Occupied pixels with at least one unoccupied edge neighbour.
    pub fn boundary_pixels(&self) -> Vec<usize> {
        let n = self.n();
        self.occupied()
            .into_iter()
            .filter(|&k| {
                let (i, j) = ((k % n) as i64, (k / n) as i64);
                super::N4
                    .iter()
                    .any(|&(di, dj)| !self.get_signed(i + di, j + dj))
            })
            .collect()
    }

    pub fn pixel_center_of(&self, k: usize) -> Point {
        let n = self.n();
        self.bbox.pixel_center(self.level, k % n, k / n)
    }

    /// The same pixel pattern in a box dilated by `s` about the origin.
    pub fn scaled(&self, s: f64) -> Result<CompactSetMask> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::param("scale", "must be positive"));
        }
        let mut m = self.clone();
        m.bbox = self.bbox.scaled(s);
        m.spec = self.spec.scaled(s);
        Ok(m)
    }

    /// Row-major run lengths, alternating unoccupied/occupied, starting with
    /// an unoccupied run (possibly of length zero).
    pub fn to_rle(&self) -> Vec<u32> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u32;
        for k in 0..self.n() * self.n() {
            let b = self.get_index(k);
            if b == current {
                len += 1;
            } else {
                runs.push(len);
                current = b;
                len = 1;
            }
        }
        runs.push(len);
        runs
    }

    pub fn from_rle(bbox: BoundingBox, level: u32, spec: ShapeSpec, runs: &[u32]) -> Result<Self> {
        if !(MIN_LEVEL..=MAX_LEVEL).contains(&level) {
            return Err(Error::Format(format!("level {level} out of range")));
        }
        let total = 1usize << (2 * level);
        let mut bits = Vec::with_capacity(total);
        let mut value = false;
        for &r in runs {
            bits.extend(std::iter::repeat_n(value, r as usize));
            value = !value;
        }
        if bits.len() != total {
            return Err(Error::Format(format!(
                "run lengths cover {} pixels, expected {total}",
                bits.len()
            )));
        }
        Self::from_bits(bbox, level, spec, &bits)
    }

    pub fn to_file(&self) -> MaskFile {
        MaskFile {
            schema: SCHEMA.to_string(),
            kind: "mask".to_string(),
            bbox: self.bbox,
            level: self.level,
            spec: self.spec.clone(),
            occupied: self.count,
            rle: self.to_rle(),
        }
    }

    pub fn from_file(file: &MaskFile) -> Result<Self> {
        if file.schema != SCHEMA {
            return Err(Error::Format(format!("unknown schema {}", file.schema)));
        }
        let m = Self::from_rle(file.bbox, file.level, file.spec.clone(), &file.rle)?;
        if m.count != file.occupied {
            return Err(Error::Format(format!(
                "occupied count {} does not match header {}",
                m.count, file.occupied
            )));
        }
        Ok(m)
    }
}

/// On-disk form of a [`CompactSetMask`]: a JSON header with a row-major
/// run-length encoded bitmap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskFile {
    pub schema: String,
    pub kind: String,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub level: u32,
    pub spec: ShapeSpec,
    pub occupied: usize,
    pub rle: Vec<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_mask() -> CompactSetMask {
        let bbox = BoundingBox::new(Point::ORIGIN, 1.0).unwrap();
        let n = 8;
        let mut bits = vec![false; n * n];
        bits[3 * n + 3] = true;
        bits[3 * n + 4] = true;
        bits[5 * n + 2] = true;
        CompactSetMask::from_bits(bbox, 3, ShapeSpec::custom("test"), &bits).unwrap()
    }

    #[test]
    fn rle_round_trip() {
        let m = small_mask();
        let f = m.to_file();
        let back = CompactSetMask::from_file(&f).unwrap();
        assert_eq!(back, m);
        assert_eq!(f.rle.iter().map(|&r| r as usize).sum::<usize>(), 64);
    }

    #[test]
    fn rejects_empty_and_border() {
        let bbox = BoundingBox::new(Point::ORIGIN, 1.0).unwrap();
        let bits = vec![false; 64];
        assert!(matches!(
            CompactSetMask::from_bits(bbox, 3, ShapeSpec::custom("e"), &bits),
            Err(Error::EmptyMask(_))
        ));
        let mut bits = vec![false; 64];
        bits[0] = true;
        assert!(matches!(
            CompactSetMask::from_bits(bbox, 3, ShapeSpec::custom("e"), &bits),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn boundary_pixels_of_block() {
        let bbox = BoundingBox::new(Point::ORIGIN, 1.0).unwrap();
        let n = 8;
        let mut bits = vec![false; n * n];
        for j in 2..6 {
            for i in 2..6 {
                bits[j * n + i] = true;
            }
        }
        let m = CompactSetMask::from_bits(bbox, 3, ShapeSpec::custom("block"), &bits).unwrap();
        assert_eq!(m.boundary_pixels().len(), 12);
        assert!((m.area() - 16.0 * 0.0625).abs() < 1e-15);
    }

    #[test]
    fn pixel_lookup() {
        let b = BoundingBox::new(Point::new(1.0, -1.0), 2.0).unwrap();
        let c = b.pixel_center(4, 3, 7);
        assert_eq!(b.pixel_of(4, c), Some((3, 7)));
        assert_eq!(b.pixel_of(4, Point::new(3.0, 1.0)), Some((15, 15)));
        assert_eq!(b.pixel_of(4, Point::new(3.5, 1.0)), None);
    }
}
