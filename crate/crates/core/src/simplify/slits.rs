use serde::{Deserialize, Serialize};

use crate::geometry::{Point, WhitneyDecomposition};
use crate::{Error, Result};

use super::graph::{outer_squares, JohnGraph};

/// Subpixels per mask pixel side on the grid that carries the walls.
pub const SUBDIVISION: usize = 4;
/// `log2(SUBDIVISION)`.
pub const SUBDIVISION_LEVELS: u32 = 2;

/// Maximal run of wall cells along a square's boundary, traversed
/// counter-clockwise from the lower-left corner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlitArc {
    pub start: Point,
    pub end: Point,
    pub cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareSlit {
    pub square: usize,
    /// Squares reached through a gate of this square.
    pub gates: Vec<usize>,
    pub arcs: Vec<SlitArc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlitSet {
    pub delta: f64,
    /// Largest number of gates on one square.
    pub max_gates: usize,
    /// Upper bound on `delta` keeping the gates of a square apart.
    pub delta_bound: f64,
    /// Exit square next to the root, outside the graph.
    pub special: usize,
    pub squares: Vec<SquareSlit>,
}

/// A domain cut along the slits, on the subdivided grid.
#[derive(Clone, Debug)]
pub struct SimplifiedDomain {
    pub base: WhitneyDecomposition,
    pub graph: JohnGraph,
    pub slits: SlitSet,
    /// Level of the subdivided grid.
    pub sub_level: u32,
    /// Cells of the original domain.
    pub omega: Vec<bool>,
    /// Cells of the original domain minus the slits.
    pub omega_hat: Vec<bool>,
    /// Cells of the compact set.
    pub set_cells: Vec<bool>,
    /// Owning square of each wall cell, `usize::MAX` elsewhere.
    pub wall_owner: Vec<usize>,
}

impl SimplifiedDomain {
    pub fn sub_n(&self) -> usize {
        1 << self.sub_level
    }

    pub fn cell_center(&self, k: usize) -> Point {
        let n = self.sub_n();
        self.base.bbox.pixel_center(self.sub_level, k % n, k / n)
    }
}

/// Distance from `p` to the segment `[a, b]`.
fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.dist(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Whether the segment `[a, b]` meets the closed box `[lo, hi]` (slightly
/// inflated), by parametric clipping.
fn segment_hits_cell(a: Point, b: Point, lo: Point, hi: Point, slack: f64) -> bool {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let d = [b.x - a.x, b.y - a.y];
    let p0 = [a.x, a.y];
    let lo = [lo.x - slack, lo.y - slack];
    let hi = [hi.x + slack, hi.y + slack];
    for axis in 0..2 {
        if d[axis].abs() < 1e-300 {
            if p0[axis] < lo[axis] || p0[axis] > hi[axis] {
                return false;
            }
        } else {
            let mut ta = (lo[axis] - p0[axis]) / d[axis];
            let mut tb = (hi[axis] - p0[axis]) / d[axis];
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Ring cells of a block `(x0, y0, side)` in counter-clockwise order from the
/// lower-left corner.
fn ring(x0: usize, y0: usize, s: usize) -> Vec<(usize, usize)> {
    if s == 1 {
        return vec![(x0, y0)];
    }
    let mut v = Vec::with_capacity(4 * s - 4);
    for x in x0..x0 + s {
        v.push((x, y0));
    }
    for y in y0 + 1..y0 + s {
        v.push((x0 + s - 1, y));
    }
    for x in (x0..x0 + s - 1).rev() {
        v.push((x, y0 + s - 1));
    }
    for y in (y0 + 1..y0 + s - 1).rev() {
        v.push((x0, y));
    }
    v
}

/// Cuts the slits of every graph square and returns the simplified domain.
///
/// Each graph square gets a one-cell wall on the inside of its boundary on a
/// grid `SUBDIVISION` times finer than the mask. Gates are the wall cells
/// within `delta * diam` of an incident graph edge, together with the cells
/// the edge itself crosses. Wall cells facing the compact set, other than
/// block corners, are left open so that the set stays on the boundary.
pub fn cut_slits(w: &WhitneyDecomposition, g: &JohnGraph, delta: f64) -> Result<SimplifiedDomain> {
    let total = w.len();
    let idx = g.index(total);
    let incident = g.incident(total);
    let root_pos = idx
        .get(g.root)
        .copied()
        .flatten()
        .ok_or_else(|| Error::param("graph", "root is not a vertex"))?;

    // exit square: an edge neighbour of the root outside the graph
    let outer = outer_squares(w)?;
    let special = w
        .edge_neighbors(g.root)
        .iter()
        .copied()
        .filter(|&k| idx[k].is_none() && outer[k])
        .max_by(|&a, &b| {
            w.center_distance[a]
                .total_cmp(&w.center_distance[b])
                .then(b.cmp(&a))
        })
        .ok_or_else(|| Error::Construction {
            layer: 0,
            reason: "every edge neighbour of the root square belongs to the graph".into(),
        })?;

    let gates_of = |pos: usize| -> Vec<usize> {
        let mut v = incident[pos].clone();
        if pos == root_pos {
            v.push(special);
        }
        v
    };
    let max_gates = (0..g.vertices.len())
        .map(|p| gates_of(p).len())
        .max()
        .unwrap_or(0);
    let delta_bound = 1.0 / (2.0 * (1.0 + max_gates as f64));
    if !(delta > 0.0 && delta < delta_bound) {
        return Err(Error::param(
            "delta",
            format!(
                "{delta} is outside the gate-disjointness bound (0, {delta_bound}) for squares with {max_gates} gates"
            ),
        ));
    }

    let n = 1usize << w.mask_level;
    let sub_level = w.mask_level + SUBDIVISION_LEVELS;
    let ns = n * SUBDIVISION;
    let bbox = w.bbox;
    let cell = bbox.pixel_size(sub_level);

    let free: Vec<bool> = w.distance_field.values().iter().map(|&d| d > 0.0).collect();
    let outer_px = crate::geometry::flood_fill(n, &free, &crate::geometry::border_cells(n), false);
    let mut omega = vec![false; ns * ns];
    let mut set_cells = vec![false; ns * ns];
    for j in 0..ns {
        for i in 0..ns {
            let p = (j / SUBDIVISION) * n + i / SUBDIVISION;
            omega[j * ns + i] = outer_px[p];
            set_cells[j * ns + i] = !free[p];
        }
    }

    let mut omega_hat = omega.clone();
    let mut wall_owner = vec![usize::MAX; ns * ns];
    let mut squares = Vec::with_capacity(g.vertices.len());
    for (pos, v) in g.vertices.iter().enumerate() {
        let q = v.square;
        let (i0, j0, s) = w.pixel_block(q);
        let (x0, y0, side) = (i0 * SUBDIVISION, j0 * SUBDIVISION, s * SUBDIVISION);
        let zq = w.center(q);
        let reach = delta * w.diam(q);
        let gates = gates_of(pos);
        let segments: Vec<(Point, Point)> = gates.iter().map(|&k| (zq, w.center(k))).collect();
        let corners = [
            (x0, y0),
            (x0 + side - 1, y0),
            (x0, y0 + side - 1),
            (x0 + side - 1, y0 + side - 1),
        ];
        let cells = ring(x0, y0, side);
        let mut is_wall = Vec::with_capacity(cells.len());
        for &(x, y) in &cells {
            let k = y * ns + x;
            let c = bbox.pixel_center(sub_level, x, y);
            let lo = Point::new(c.x - cell / 2.0, c.y - cell / 2.0);
            let hi = Point::new(c.x + cell / 2.0, c.y + cell / 2.0);
            let gate = segments.iter().any(|&(a, b)| {
                segment_distance(c, a, b) < reach || segment_hits_cell(a, b, lo, hi, 1e-9 * cell)
            });
            let faces_set = !corners.contains(&(x, y))
                && [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .any(|&(dx, dy)| {
                        let (a, b) = (x as i64 + dx, y as i64 + dy);
                        a >= 0
                            && b >= 0
                            && (a as usize) < ns
                            && (b as usize) < ns
                            && set_cells[b as usize * ns + a as usize]
                    });
            let wall = !gate && !faces_set;
            if wall {
                omega_hat[k] = false;
                wall_owner[k] = q;
            }
            is_wall.push(wall);
        }
        squares.push(SquareSlit {
            square: q,
            gates,
            arcs: arcs(&cells, &is_wall, |x, y| bbox.pixel_center(sub_level, x, y)),
        });
    }

    Ok(SimplifiedDomain {
        base: w.clone(),
        graph: g.clone(),
        slits: SlitSet {
            delta,
            max_gates,
            delta_bound,
            special,
            squares,
        },
        sub_level,
        omega,
        omega_hat,
        set_cells,
        wall_owner,
    })
}

/// Groups cyclically consecutive wall cells into arcs.
fn arcs(
    cells: &[(usize, usize)],
    wall: &[bool],
    center: impl Fn(usize, usize) -> Point,
) -> Vec<SlitArc> {
    let m = cells.len();
    let Some(open) = wall.iter().position(|&w| !w) else {
        let (a, b) = (cells[0], cells[m - 1]);
        return vec![SlitArc {
            start: center(a.0, a.1),
            end: center(b.0, b.1),
            cells: m,
        }];
    };
    let mut out = Vec::new();
    let mut run: Option<(usize, usize)> = None;
    for t in 1..=m {
        let k = (open + t) % m;
        if wall[k] {
            run = Some(match run {
                None => (k, 1),
                Some((s, len)) => (s, len + 1),
            });
        } else if let Some((s, len)) = run.take() {
            let e = (s + len - 1) % m;
            out.push(SlitArc {
                start: center(cells[s].0, cells[s].1),
                end: center(cells[e].0, cells[e].1),
                cells: len,
            });
        }
    }
    out
}
