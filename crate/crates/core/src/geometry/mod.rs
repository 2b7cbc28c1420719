//! Dyadic grid infrastructure: bounding boxes, rasterized compact sets,
//! distance fields and Whitney decompositions.

mod edt;
mod files;
mod mask;
mod shape;
mod whitney;

pub use edt::{distance_transform, DistanceField};
pub use files::{SquareRecord, WhitneyFile};
pub use mask::{BoundingBox, CompactSetMask, MaskFile, Point};
pub use shape::{rasterize, ShapeSpec};
pub use whitney::{whitney, DyadicSquare, WhitneyDecomposition, NONE};

/// Offsets of the four edge neighbours of a pixel.
pub(crate) const N4: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Offsets of the eight edge-or-corner neighbours of a pixel.
pub(crate) const N8: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Flood fill on an `n x n` grid of `passable` cells from `seeds`, with 4- or
/// 8-connectivity. Returns the reached set.
pub(crate) fn flood_fill(n: usize, passable: &[bool], seeds: &[usize], eight: bool) -> Vec<bool> {
    let mut seen = vec![false; n * n];
    let mut stack: Vec<usize> = Vec::new();
    for &s in seeds {
        if passable[s] && !seen[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    let offsets: &[(i64, i64)] = if eight { &N8 } else { &N4 };
    while let Some(c) = stack.pop() {
        let (i, j) = ((c % n) as i64, (c / n) as i64);
        for &(di, dj) in offsets {
            let (a, b) = (i + di, j + dj);
            if a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                continue;
            }
            let q = b as usize * n + a as usize;
            if passable[q] && !seen[q] {
                seen[q] = true;
                stack.push(q);
            }
        }
    }
    seen
}

/// Connected-component labels of `passable` cells; `usize::MAX` elsewhere.
pub(crate) fn label_components(n: usize, passable: &[bool], eight: bool) -> (Vec<usize>, usize) {
    let mut label = vec![usize::MAX; n * n];
    let mut count = 0;
    let offsets: &[(i64, i64)] = if eight { &N8 } else { &N4 };
    let mut stack = Vec::new();
    for start in 0..n * n {
        if !passable[start] || label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        stack.push(start);
        while let Some(c) = stack.pop() {
            let (i, j) = ((c % n) as i64, (c / n) as i64);
            for &(di, dj) in offsets {
                let (a, b) = (i + di, j + dj);
                if a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                    continue;
                }
                let q = b as usize * n + a as usize;
                if passable[q] && label[q] == usize::MAX {
                    label[q] = count;
                    stack.push(q);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Indices of the cells on the outer ring of an `n x n` grid.
pub(crate) fn border_cells(n: usize) -> Vec<usize> {
    let mut v = Vec::with_capacity(4 * n);
    for i in 0..n {
        v.push(i);
        v.push((n - 1) * n + i);
        if i > 0 && i < n - 1 {
            v.push(i * n);
            v.push(i * n + n - 1);
        }
    }
    v
}
