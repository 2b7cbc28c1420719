//! Numerical checks of two distortion estimates for univalent maps of the
//! disk: capacity of arc images against the arc's capacity squared, and the
//! capacity of the set of directions whose radial image is long.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::{Error, Result};

use super::capacity::{point_set_capacity, CapacityMethod};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConformalMap {
    Identity,
    /// `z / (1 - z)^2`, onto the plane minus `(-inf, -1/4]`.
    Koebe,
    /// `z / (1 - z^2)`, onto the plane minus two rays of the imaginary axis.
    SquareRootSlit,
}

impl std::str::FromStr for ConformalMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(ConformalMap::Identity),
            "koebe" => Ok(ConformalMap::Koebe),
            "sqrt_slit" | "square_root_slit" | "slit" => Ok(ConformalMap::SquareRootSlit),
            other => Err(Error::param(
                "map",
                format!("`{other}` is not in the catalog"),
            )),
        }
    }
}

impl ConformalMap {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match self {
            ConformalMap::Identity => z,
            ConformalMap::Koebe => z / ((one - z) * (one - z)),
            ConformalMap::SquareRootSlit => z / (one - z * z),
        }
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match self {
            ConformalMap::Identity => one,
            ConformalMap::Koebe => (one + z) / ((one - z) * (one - z) * (one - z)),
            ConformalMap::SquareRootSlit => (one + z * z) / ((one - z * z) * (one - z * z)),
        }
    }

    /// Length of the image of the radius `[0, e^{i theta})`.
    pub fn ray_length(&self, theta: f64) -> f64 {
        let dir = Complex64::new(theta.cos(), theta.sin());
        let g = |r: f64| self.derivative(dir * r).norm();
        adaptive_simpson(&g, 0.0, 1.0, 1e-9)
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol * (left + right).abs().max(1e-300) {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// Closed-form capacity of a circular arc of the unit circle.
pub fn arc_capacity(width: f64) -> f64 {
    if width >= std::f64::consts::TAU {
        1.0
    } else {
        (width / 4.0).sin()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionRow {
    /// Angular width of the arc, centered at `pi`.
    pub arc_width: f64,
    pub arc_capacity: f64,
    pub arc_capacity_numeric: f64,
    pub image_capacity: f64,
    /// `Cap(f(E)) / Cap(E)^2`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayLengthRow {
    pub lambda: f64,
    /// Angular measure of `{theta : length > lambda}`.
    pub measure: f64,
    pub capacity: f64,
    /// `Cap * lambda^{1/2}`.
    pub scaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeurlingReport {
    pub map: ConformalMap,
    pub n_points: usize,
    pub distortion: Vec<DistortionRow>,
    pub min_ratio: f64,
    pub ray_lengths: Vec<RayLengthRow>,
    pub max_scaled: f64,
}

/// Tabulates both distortion quantities for `map` over arcs of the given
/// angular widths (centered at `pi`) and the given length thresholds.
pub fn verify_beurling(
    map: ConformalMap,
    arc_widths: &[f64],
    lambdas: &[f64],
    n_points: usize,
    seed: u64,
) -> Result<BeurlingReport> {
    use std::f64::consts::{PI, TAU};
    if n_points < 8 {
        return Err(Error::param("n_points", "at least 8 points are needed"));
    }
    for &w in arc_widths {
        if !(w > 0.0 && w <= TAU) {
            return Err(Error::param("arc_widths", format!("{w} outside (0, 2 pi]")));
        }
    }
    for &l in lambdas {
        if !(l > 0.0) {
            return Err(Error::param("lambdas", format!("{l} is not positive")));
        }
    }
    let on_circle = |t: f64| Complex64::new(t.cos(), t.sin());
    let to_point = |z: Complex64| Point::new(z.re, z.im);

    let mut distortion = Vec::new();
    for &w in arc_widths {
        let full = w >= TAU;
        let count = if full { n_points } else { n_points + 1 };
        let angles: Vec<f64> = (0..count)
            .map(|k| {
                if full {
                    TAU * (k as f64 + 0.5) / n_points as f64
                } else {
                    PI - w / 2.0 + w * k as f64 / n_points as f64
                }
            })
            .collect();
        let arc: Vec<Point> = angles.iter().map(|&t| to_point(on_circle(t))).collect();
        let image: Vec<Point> = angles
            .iter()
            .map(|&t| to_point(map.eval(on_circle(t))))
            .filter(|p| p.x.is_finite() && p.y.is_finite())
            .collect();
        let cap_arc = arc_capacity(w);
        let numeric = point_set_capacity(&arc, CapacityMethod::Energy, n_points, seed).value;
        let image_cap = point_set_capacity(&image, CapacityMethod::Energy, n_points, seed).value;
        distortion.push(DistortionRow {
            arc_width: w,
            arc_capacity: cap_arc,
            arc_capacity_numeric: numeric,
            image_capacity: image_cap,
            ratio: image_cap / (cap_arc * cap_arc),
        });
    }

    // radial lengths on a fine angle grid, avoiding the exact singular
    // directions
    let grid = 4 * n_points;
    let angles: Vec<f64> = (0..grid)
        .map(|k| TAU * (k as f64 + 0.5) / grid as f64)
        .collect();
    let lengths: Vec<f64> = {
        use rayon::prelude::*;
        angles.par_iter().map(|&t| map.ray_length(t)).collect()
    };
    let mut ray_lengths = Vec::new();
    for &lambda in lambdas {
        let set: Vec<Point> = angles
            .iter()
            .zip(&lengths)
            .filter(|(_, &l)| l > lambda)
            .map(|(&t, _)| to_point(on_circle(t)))
            .collect();
        let capacity = point_set_capacity(&set, CapacityMethod::Energy, n_points, seed).value;
        ray_lengths.push(RayLengthRow {
            lambda,
            measure: TAU * set.len() as f64 / grid as f64,
            capacity,
            scaled: capacity * lambda.sqrt(),
        });
    }
    let min_ratio = distortion
        .iter()
        .map(|r| r.ratio)
        .fold(f64::INFINITY, f64::min);
    let max_scaled = ray_lengths.iter().map(|r| r.scaled).fold(0.0, f64::max);
    Ok(BeurlingReport {
        map,
        n_points,
        distortion,
        min_ratio,
        ray_lengths,
        max_scaled,
    })
}
