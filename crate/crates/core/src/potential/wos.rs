use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{DistanceField, Point};
use crate::{Error, Result};

/// Steps after which a walk is abandoned.
pub const WALK_CAP: usize = 10_000;

/// Closed arc of a circle: angles `start..=start + width`, in radians.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularArc {
    pub start: f64,
    pub width: f64,
}

impl AngularArc {
    pub fn contains(&self, angle: f64) -> bool {
        let tau = std::f64::consts::TAU;
        self.width >= tau || (angle - self.start).rem_euclid(tau) <= self.width
    }
}

/// Domain and target set for walk-on-spheres.
#[derive(Clone, Debug)]
pub enum WalkDomain {
    /// Open disk; the target is a union of boundary arcs.
    Disk {
        center: Point,
        radius: f64,
        target: Vec<AngularArc>,
    },
    /// Complement of a rasterized set given by its distance field; the target
    /// is a set of occupied pixels (row-major flags).
    Mask {
        field: DistanceField,
        target: Vec<bool>,
    },
}

impl WalkDomain {
    /// Distance to the boundary and the nearest boundary point.
    fn nearest(&self, z: Point) -> (f64, Point) {
        match self {
            WalkDomain::Disk { center, radius, .. } => {
                let v = z - *center;
                let r = v.norm();
                let dir = if r > 0.0 {
                    v.scale(1.0 / r)
                } else {
                    Point::new(1.0, 0.0)
                };
                (radius - r, *center + dir.scale(*radius))
            }
            WalkDomain::Mask { field, .. } => {
                let d = field.at(z);
                let n = field.n();
                let site = match field.bbox.pixel_of(field.level, z) {
                    Some((i, j)) => field.nearest_site(j * n + i),
                    None => {
                        let b = field.bbox;
                        let q = Point::new(
                            z.x.clamp(b.origin().x, b.origin().x + b.side()),
                            z.y.clamp(b.origin().y, b.origin().y + b.side()),
                        );
                        let (i, j) = b.pixel_of(field.level, q).expect("clamped into the box");
                        field.nearest_site(j * n + i)
                    }
                };
                (d, field.bbox.pixel_center(field.level, site % n, site / n))
            }
        }
    }

    fn in_target(&self, p: Point) -> bool {
        match self {
            WalkDomain::Disk { center, target, .. } => {
                let v = p - *center;
                let a = v.y.atan2(v.x);
                target.iter().any(|arc| arc.contains(a))
            }
            WalkDomain::Mask { field, target } => {
                let (i, j) = field
                    .bbox
                    .pixel_of(field.level, p)
                    .expect("site inside the box");
                target[j * field.n() + i]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WosEstimate {
    /// Fraction of finished walks that stopped next to the target.
    pub estimate: f64,
    pub standard_error: f64,
    pub n_walks: usize,
    pub hits: usize,
    /// Walks that exhausted the step budget.
    pub unfinished: usize,
    pub unfinished_fraction: f64,
    /// Set when any walk was abandoned.
    pub flagged: bool,
    pub mean_steps: f64,
}

/// Harmonic measure of the target seen from `start`, by walk-on-spheres.
/// Walk `i` draws from its own generator seeded with `seed + i`.
pub fn harmonic_measure_wos(
    domain: &WalkDomain,
    start: Point,
    n_walks: usize,
    shell: f64,
    seed: u64,
) -> Result<WosEstimate> {
    if n_walks == 0 {
        return Err(Error::param("n_walks", "must be positive"));
    }
    if !(shell > 0.0) {
        return Err(Error::param("shell", "must be positive"));
    }
    if let WalkDomain::Mask { field, target } = domain {
        if shell < field.pixel_size() {
            return Err(Error::param("shell", "must be at least one pixel"));
        }
        if target.len() != field.n() * field.n() {
            return Err(Error::param("target", "length does not match the grid"));
        }
    }
    let (d0, _) = domain.nearest(start);
    if !(d0 > 0.0) {
        return Err(Error::param("start", "not an interior point"));
    }

    let outcomes: Vec<(Option<bool>, usize)> = (0..n_walks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mut z = start;
            for step in 0..WALK_CAP {
                let (d, nearest) = domain.nearest(z);
                if d <= shell {
                    return (Some(domain.in_target(nearest)), step);
                }
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                z = z + Point::new(a.cos(), a.sin()).scale(d);
            }
            (None, WALK_CAP)
        })
        .collect();
    let hits = outcomes.iter().filter(|o| o.0 == Some(true)).count();
    let unfinished = outcomes.iter().filter(|o| o.0.is_none()).count();
    let finished = n_walks - unfinished;
    let p = if finished > 0 {
        hits as f64 / finished as f64
    } else {
        0.0
    };
    let se = if finished > 0 {
        (p * (1.0 - p) / finished as f64).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(WosEstimate {
        estimate: p,
        standard_error: se,
        n_walks,
        hits,
        unfinished,
        unfinished_fraction: unfinished as f64 / n_walks as f64,
        flagged: unfinished > 0,
        mean_steps: outcomes.iter().map(|o| o.1 as f64).sum::<f64>() / n_walks as f64,
    })
}
