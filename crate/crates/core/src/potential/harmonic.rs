use crate::geometry::{label_components, BoundingBox, Point, N4};
use crate::{Error, Result};

use super::solver::solve_dirichlet;

/// Relative tolerance of the linear solver, against the boundary oscillation.
pub const SOLVER_TOLERANCE: f64 = 1e-8;

/// Grid function on the pixel centers of a box: discrete-harmonic on
/// `harmonic_region`, prescribed on `boundary_region`, undefined (NaN)
/// elsewhere.
#[derive(Clone, Debug)]
pub struct HarmonicField {
    pub bbox: BoundingBox,
    pub level: u32,
    pub values: Vec<f64>,
    pub harmonic_region: Vec<bool>,
    pub boundary_region: Vec<bool>,
    /// Max-norm of the 5-point graph Laplacian over the harmonic region.
    pub residual: f64,
    /// The residual target the solver worked to.
    pub tolerance: f64,
    pub iterations: usize,
}

impl HarmonicField {
    pub fn n(&self) -> usize {
        1 << self.level
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n() + i]
    }

    pub fn node(&self, k: usize) -> Point {
        self.bbox
            .pixel_center(self.level, k % self.n(), k / self.n())
    }

    /// Value at the node nearest to `p`.
    pub fn at(&self, p: Point) -> Option<f64> {
        let (i, j) = self.bbox.pixel_of(self.level, p)?;
        let v = self.get(i, j);
        v.is_finite().then_some(v)
    }

    /// Max-norm of the graph Laplacian on the harmonic region, recomputed.
    pub fn laplacian_residual(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for k in 0..n * n {
            if !self.harmonic_region[k] {
                continue;
            }
            let mut s = 0.0;
            for q in neighbours(n, k) {
                let v = self.values[q];
                if v.is_finite() {
                    s += v - self.values[k];
                }
            }
            worst = worst.max(s.abs());
        }
        worst
    }

    /// Discrete maximum principle, checked on every connected component of
    /// the harmonic region against the boundary values adjacent to it.
    pub fn maximum_principle_holds(&self) -> bool {
        let n = self.n();
        let (labels, count) = label_components(n, &self.harmonic_region, false);
        let mut lo = vec![f64::INFINITY; count];
        let mut hi = vec![f64::NEG_INFINITY; count];
        for k in 0..n * n {
            if labels[k] == usize::MAX {
                continue;
            }
            for q in neighbours(n, k) {
                if self.boundary_region[q] {
                    lo[labels[k]] = lo[labels[k]].min(self.values[q]);
                    hi[labels[k]] = hi[labels[k]].max(self.values[q]);
                }
            }
        }
        let slack = 1e-6 * self.tolerance.max(f64::MIN_POSITIVE) / SOLVER_TOLERANCE;
        (0..n * n).all(|k| {
            let c = labels[k];
            c == usize::MAX || (self.values[k] >= lo[c] - slack && self.values[k] <= hi[c] + slack)
        })
    }
}

pub(crate) fn neighbours(n: usize, k: usize) -> impl Iterator<Item = usize> {
    let (i, j) = ((k % n) as i64, (k / n) as i64);
    N4.iter().filter_map(move |&(di, dj)| {
        let (a, b) = (i + di, j + dj);
        (a >= 0 && b >= 0 && a < n as i64 && b < n as i64).then(|| b as usize * n + a as usize)
    })
}

/// Solves the discrete Dirichlet problem: harmonic on the `domain` nodes with
/// the prescribed `boundary` values. Nodes in neither set are inactive.
pub fn harmonic_solve(
    bbox: BoundingBox,
    level: u32,
    domain: &[bool],
    boundary: &[Option<f64>],
) -> Result<HarmonicField> {
    harmonic_solve_from(bbox, level, domain, boundary, None)
}

/// As [`harmonic_solve`], starting the iteration from `initial` on the domain.
pub fn harmonic_solve_from(
    bbox: BoundingBox,
    level: u32,
    domain: &[bool],
    boundary: &[Option<f64>],
    initial: Option<&[f64]>,
) -> Result<HarmonicField> {
    let n = 1usize << level;
    if domain.len() != n * n || boundary.len() != n * n {
        return Err(Error::param("domain", format!("expected {} nodes", n * n)));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..n * n {
        if let Some(v) = boundary[k] {
            if domain[k] {
                return Err(Error::param(
                    "boundary",
                    format!("node {k} is also a domain node"),
                ));
            }
            if !v.is_finite() {
                return Err(Error::param(
                    "boundary",
                    format!("value at node {k} is not finite"),
                ));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }

    // every component of the domain must see a boundary node
    let (labels, count) = label_components(n, domain, false);
    let mut anchored = vec![false; count];
    for k in 0..n * n {
        if labels[k] != usize::MAX && neighbours(n, k).any(|q| boundary[q].is_some()) {
            anchored[labels[k]] = true;
        }
    }
    if let Some(c) = anchored.iter().position(|a| !a) {
        let k = labels.iter().position(|&l| l == c).unwrap();
        return Err(Error::Connectivity(format!(
            "domain component containing node ({}, {}) has no boundary contact",
            k % n,
            k / n
        )));
    }

    let mean = if lo.is_finite() { 0.5 * (lo + hi) } else { 0.0 };
    let mut values: Vec<f64> = (0..n * n)
        .map(|k| match boundary[k] {
            Some(v) => v,
            None if domain[k] => initial.map_or(mean, |x| x[k]),
            None => f64::NAN,
        })
        .collect();
    let oscillation = if lo.is_finite() { hi - lo } else { 0.0 };
    let (residual, tolerance, iterations) = if oscillation == 0.0 {
        for k in 0..n * n {
            if domain[k] {
                values[k] = lo;
            }
        }
        (0.0, 0.0, 0)
    } else {
        let tol = SOLVER_TOLERANCE * oscillation;
        let mut x: Vec<f64> = values
            .iter()
            .map(|v| if v.is_finite() { *v } else { 0.0 })
            .collect();
        let stats = solve_dirichlet(n, domain, boundary, &mut x, tol, 10_000);
        for k in 0..n * n {
            if domain[k] {
                values[k] = x[k];
            }
        }
        (stats.residual, tol, stats.iterations)
    };
    Ok(HarmonicField {
        bbox,
        level,
        values,
        harmonic_region: domain.to_vec(),
        boundary_region: boundary.iter().map(Option::is_some).collect(),
        residual,
        tolerance,
        iterations,
    })
}

/// Sum of squared forward differences over grid edges whose first node lies
/// in `region` (the pixel area cancels the `1/h^2` of the gradient).
pub fn dirichlet_energy(field: &HarmonicField, region: &[bool]) -> f64 {
    grid_energy(field.n(), &field.values, region)
}

pub(crate) fn grid_energy(n: usize, values: &[f64], region: &[bool]) -> f64 {
    let mut e = 0.0;
    for k in 0..n * n {
        if !region[k] || !values[k].is_finite() {
            continue;
        }
        let (i, j) = (k % n, k / n);
        if i + 1 < n && values[k + 1].is_finite() {
            let d = values[k + 1] - values[k];
            e += d * d;
        }
        if j + 1 < n && values[k + n].is_finite() {
            let d = values[k + n] - values[k];
            e += d * d;
        }
    }
    e
}

/// Dirichlet problem on the grid disk `|z - center| < radius`, with boundary
/// nodes the outside neighbours of the disk nodes, valued by `f`.
pub fn disk_dirichlet_problem(
    bbox: BoundingBox,
    level: u32,
    center: Point,
    radius: f64,
    f: impl Fn(Point) -> f64,
) -> (Vec<bool>, Vec<Option<f64>>) {
    let n = 1usize << level;
    let domain: Vec<bool> = (0..n * n)
        .map(|k| bbox.pixel_center(level, k % n, k / n).dist(center) < radius)
        .collect();
    let boundary = (0..n * n)
        .map(|k| {
            (!domain[k] && neighbours(n, k).any(|q| domain[q]))
                .then(|| f(bbox.pixel_center(level, k % n, k / n)))
        })
        .collect();
    (domain, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_box() -> BoundingBox {
        BoundingBox::new(Point::ORIGIN, 1.25).unwrap()
    }

    #[test]
    fn linear_data_is_reproduced() {
        let (dom, bnd) = disk_dirichlet_problem(unit_box(), 7, Point::ORIGIN, 1.0, |p| p.x);
        let f = harmonic_solve(unit_box(), 7, &dom, &bnd).unwrap();
        assert!(f.residual <= f.tolerance);
        for k in 0..f.values.len() {
            if dom[k] {
                assert!((f.values[k] - f.node(k).x).abs() < 1e-6);
            }
        }
        assert!(f.maximum_principle_holds());
        assert!(f.laplacian_residual() <= f.tolerance * (1.0 + 1e-6));
    }

    #[test]
    fn constant_data_is_exact() {
        let (dom, bnd) = disk_dirichlet_problem(unit_box(), 6, Point::ORIGIN, 1.0, |_| 2.5);
        let f = harmonic_solve(unit_box(), 6, &dom, &bnd).unwrap();
        assert!(dom.iter().zip(&f.values).all(|(&d, &v)| !d || v == 2.5));
        assert_eq!(dirichlet_energy(&f, &dom), 0.0);
    }

    #[test]
    fn energy_of_linear_function_is_area() {
        let (dom, bnd) = disk_dirichlet_problem(unit_box(), 9, Point::ORIGIN, 1.0, |p| p.x);
        let f = harmonic_solve(unit_box(), 9, &dom, &bnd).unwrap();
        let e = dirichlet_energy(&f, &dom);
        assert!((e - PI).abs() / PI < 0.03, "{e}");
    }

    #[test]
    fn energy_is_additive() {
        let (dom, bnd) = disk_dirichlet_problem(unit_box(), 6, Point::ORIGIN, 1.0, |p| p.x * p.y);
        let f = harmonic_solve(unit_box(), 6, &dom, &bnd).unwrap();
        let left: Vec<bool> = (0..f.values.len())
            .map(|k| dom[k] && f.node(k).x < 0.1)
            .collect();
        let right: Vec<bool> = (0..f.values.len()).map(|k| dom[k] && !left[k]).collect();
        let total = dirichlet_energy(&f, &dom);
        let parts = dirichlet_energy(&f, &left) + dirichlet_energy(&f, &right);
        assert!((total - parts).abs() <= 1e-12 * total);
    }

    #[test]
    fn unanchored_component_is_rejected() {
        let bbox = unit_box();
        let n = 1 << 4;
        let mut dom = vec![false; n * n];
        dom[5 * n + 5] = true;
        let bnd = vec![None; n * n];
        assert!(matches!(
            harmonic_solve(bbox, 4, &dom, &bnd),
            Err(Error::Connectivity(_))
        ));
    }
}
