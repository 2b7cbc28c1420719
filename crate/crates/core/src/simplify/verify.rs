use serde::{Deserialize, Serialize};

use crate::geometry::{
    border_cells, distance_transform, flood_fill, label_components, whitney, CompactSetMask, Point,
    ShapeSpec,
};
use crate::john::{estimate_john_constant, JohnCenter};
use crate::{Error, Result};

use super::slits::{SimplifiedDomain, SUBDIVISION};

/// Outcome of one check, with a cell that witnesses a failure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub passed: bool,
    pub witness: Option<Point>,
    pub detail: String,
}

impl Check {
    fn pass(detail: impl Into<String>) -> Self {
        Check {
            passed: true,
            witness: None,
            detail: detail.into(),
        }
    }

    fn fail(witness: Point, detail: impl Into<String>) -> Self {
        Check {
            passed: false,
            witness: Some(witness),
            detail: detail.into(),
        }
    }
}

/// John-constant lower bounds before and after cutting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JohnComparison {
    pub original: f64,
    pub simplified: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub connected: Check,
    pub simply_connected: Check,
    pub boundary_contained: Check,
    /// Walls stay inside the domain, at distance at least `d(z_j) / 4` from
    /// the set.
    pub surgery: Check,
    pub john: Option<JohnComparison>,
    pub passed: bool,
}

/// Cells of the subdivided grid as a compact-set mask (everything outside the
/// cut domain).
pub fn complement_mask(s: &SimplifiedDomain) -> Result<CompactSetMask> {
    let bits: Vec<bool> = s.omega_hat.iter().map(|&o| !o).collect();
    CompactSetMask::from_bits(
        s.base.bbox,
        s.sub_level,
        ShapeSpec::custom("complement of the cut domain"),
        &bits,
    )
}

/// Runs the topological checks and, when `john_samples > 0`, compares John
/// estimates with the far field as center.
pub fn verify_simplified(
    s: &SimplifiedDomain,
    john_samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let ((connected, simply_connected), (boundary_contained, surgery)) = rayon::join(
        || rayon::join(|| check_connected(s), || check_simply_connected(s)),
        || rayon::join(|| check_boundary(s), || check_surgery(s)),
    );
    let john = if john_samples > 0 && connected.passed {
        Some(compare_john(s, john_samples, seed)?)
    } else {
        None
    };
    let passed = connected.passed
        && simply_connected.passed
        && boundary_contained.passed
        && surgery.passed
        && john.as_ref().is_none_or(|j| j.simplified > 0.0);
    Ok(VerificationReport {
        connected,
        simply_connected,
        boundary_contained,
        surgery,
        john,
        passed,
    })
}

/// (a) the cut domain is one 4-connected component.
fn check_connected(s: &SimplifiedDomain) -> Check {
    let ns = s.sub_n();
    let Some(&seed) = border_cells(ns).iter().find(|&&c| s.omega_hat[c]) else {
        return Check::fail(
            s.cell_center(0),
            "the cut domain does not reach the box border",
        );
    };
    let reached = flood_fill(ns, &s.omega_hat, &[seed], false);
    match (0..ns * ns).find(|&k| s.omega_hat[k] && !reached[k]) {
        Some(k) => Check::fail(s.cell_center(k), "cell not connected to the far field"),
        None => Check::pass("one component"),
    }
}

/// (b) the far field lies in the cut domain and the rest of the sphere, the
/// cells outside the domain, is 8-connected.
fn check_simply_connected(s: &SimplifiedDomain) -> Check {
    let ns = s.sub_n();
    if let Some(&k) = border_cells(ns).iter().find(|&&c| !s.omega_hat[c]) {
        return Check::fail(s.cell_center(k), "box border cell outside the cut domain");
    }
    let outside: Vec<bool> = s.omega_hat.iter().map(|&o| !o).collect();
    let (labels, count) = label_components(ns, &outside, true);
    if count <= 1 {
        return Check::pass("complement connected");
    }
    // report a cell of the smallest extra component
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        if l != usize::MAX {
            sizes[l] += 1;
        }
    }
    let main = (0..count).max_by_key(|&c| sizes[c]).unwrap();
    let k = labels
        .iter()
        .position(|&l| l != usize::MAX && l != main)
        .unwrap();
    Check::fail(
        s.cell_center(k),
        format!("complement splits into {count} components"),
    )
}

/// (c) every mask pixel of the set with a domain neighbour still touches the
/// cut domain.
fn check_boundary(s: &SimplifiedDomain) -> Check {
    let n = 1usize << s.base.mask_level;
    let ns = s.sub_n();
    let in_omega_px = |i: usize, j: usize| s.omega[(j * SUBDIVISION) * ns + i * SUBDIVISION];
    for j in 0..n {
        for i in 0..n {
            if !s.set_cells[(j * SUBDIVISION) * ns + i * SUBDIVISION] {
                continue;
            }
            let near_omega = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|&(di, dj)| {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    a >= 0
                        && b >= 0
                        && (a as usize) < n
                        && (b as usize) < n
                        && in_omega_px(a as usize, b as usize)
                });
            if !near_omega {
                continue;
            }
            let touches = (0..SUBDIVISION).any(|t| {
                let (x0, y0, e) = (i * SUBDIVISION, j * SUBDIVISION, SUBDIVISION - 1);
                let edge = [
                    (x0 + t, y0),
                    (x0 + t, y0 + e),
                    (x0, y0 + t),
                    (x0 + e, y0 + t),
                ];
                edge.iter().any(|&(x, y)| {
                    [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)]
                        .iter()
                        .any(|&(dx, dy)| {
                            let (a, b) = (x as i64 + dx, y as i64 + dy);
                            a >= 0
                                && b >= 0
                                && (a as usize) < ns
                                && (b as usize) < ns
                                && s.omega_hat[b as usize * ns + a as usize]
                        })
                })
            });
            if !touches {
                let c = s.base.bbox.pixel_center(s.base.mask_level, i, j);
                return Check::fail(c, "boundary pixel of the set sealed off by walls");
            }
        }
    }
    Check::pass("boundary preserved")
}

/// Walls are domain cells, and each lies at distance at least a quarter of
/// its square's center distance from the set.
fn check_surgery(s: &SimplifiedDomain) -> Check {
    let ns = s.sub_n();
    for k in 0..ns * ns {
        if s.omega_hat[k] && !s.omega[k] {
            return Check::fail(s.cell_center(k), "cut domain leaves the original domain");
        }
        if s.omega[k] && !s.omega_hat[k] && s.wall_owner[k] == usize::MAX {
            return Check::fail(s.cell_center(k), "removed cell is not a wall");
        }
    }
    let set = match CompactSetMask::from_bits(
        s.base.bbox,
        s.sub_level,
        ShapeSpec::custom("set on the subdivided grid"),
        &s.set_cells,
    ) {
        Ok(m) => m,
        Err(e) => return Check::fail(s.cell_center(0), e.to_string()),
    };
    let df = distance_transform(&set);
    for k in 0..ns * ns {
        let q = s.wall_owner[k];
        if q == usize::MAX {
            continue;
        }
        let need = s.base.center_distance[q] / 4.0;
        if df.get_index(k) < need * (1.0 - 1e-12) {
            return Check::fail(
                s.cell_center(k),
                format!("wall at distance {} < {need}", df.get_index(k)),
            );
        }
    }
    Check::pass("walls sound")
}

fn compare_john(s: &SimplifiedDomain, samples: usize, seed: u64) -> Result<JohnComparison> {
    let original = estimate_john_constant(&s.base, JohnCenter::INFINITY, samples, seed)?;
    let mask = complement_mask(s)?;
    let w = whitney(&mask, mask.level)?;
    let cut =
        estimate_john_constant(&w, JohnCenter::INFINITY, samples, seed).map_err(|e| match e {
            Error::Connectivity(m) => Error::Connectivity(format!("cut domain: {m}")),
            other => other,
        })?;
    Ok(JohnComparison {
        original: original.epsilon_lower,
        simplified: cut.epsilon_lower,
        samples,
    })
}
