use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Point;

use super::capacity::{grid_energy_capacity, CapacityEstimate};
use super::harmonic::HarmonicField;

/// Sites used for the capacity of a super-level set.
const LEVEL_SET_POINTS: usize = 512;

/// Capacity of `{z in boundary : |H(z) - H(center)| >= lambda}`, energy
/// method with one-pixel self-terms. An empty set has capacity 0.
pub fn oscillation_capacity(
    field: &HarmonicField,
    center: usize,
    lambda: f64,
    boundary: &[bool],
    seed: u64,
) -> CapacityEstimate {
    let h0 = field.values[center];
    let sites: Vec<Point> = (0..field.values.len())
        .filter(|&k| boundary[k] && (field.values[k] - h0).abs() >= lambda)
        .map(|k| field.node(k))
        .collect();
    let h = field.bbox.pixel_size(field.level);
    grid_energy_capacity(&sites, h, LEVEL_SET_POINTS, seed)
}

/// `H(z) = sum_k Re(c_k z^k)`, `k = 1..=degree`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPolynomial {
    /// `(Re c_k, Im c_k)` for `k = 1, 2, ...`.
    pub coefficients: Vec<(f64, f64)>,
}

impl HarmonicPolynomial {
    /// Random degree in `1..=max_degree`, coefficients uniform in the unit
    /// square.
    pub fn random(max_degree: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let degree = rng.gen_range(1..=max_degree.max(1));
        let coefficients = (0..degree)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        HarmonicPolynomial { coefficients }
    }

    pub fn eval(&self, p: Point) -> f64 {
        let (mut zr, mut zi) = (1.0, 0.0);
        let mut s = 0.0;
        for &(a, b) in &self.coefficients {
            let t = zr * p.x - zi * p.y;
            zi = zr * p.y + zi * p.x;
            zr = t;
            s += a * zr - b * zi;
        }
        s
    }

    /// Dirichlet energy over the unit disk, `pi sum k |c_k|^2`.
    pub fn unit_disk_energy(&self) -> f64 {
        std::f64::consts::PI
            * self
                .coefficients
                .iter()
                .enumerate()
                .map(|(k, (a, b))| (k + 1) as f64 * (a * a + b * b))
                .sum::<f64>()
    }

    pub fn scaled(&self, s: f64) -> Self {
        HarmonicPolynomial {
            coefficients: self
                .coefficients
                .iter()
                .map(|(a, b)| (a * s, b * s))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundingBox;
    use crate::potential::{dirichlet_energy, disk_dirichlet_problem, harmonic_solve};

    fn unit_disk_field(f: impl Fn(Point) -> f64, level: u32) -> (HarmonicField, Vec<bool>, usize) {
        let bbox = BoundingBox::new(Point::ORIGIN, 1.25).unwrap();
        let (dom, bnd) = disk_dirichlet_problem(bbox, level, Point::ORIGIN, 1.0, f);
        let field = harmonic_solve(bbox, level, &dom, &bnd).unwrap();
        let boundary: Vec<bool> = bnd.iter().map(Option::is_some).collect();
        let n = 1usize << level;
        let (i, j) = bbox.pixel_of(level, Point::ORIGIN).unwrap();
        (field, boundary, j * n + i)
    }

    #[test]
    fn constant_field_has_empty_level_set() {
        let (f, b, c) = unit_disk_field(|_| 1.0, 6);
        assert_eq!(oscillation_capacity(&f, c, 0.1, &b, 0).value, 0.0);
    }

    #[test]
    fn coordinate_field_gives_arc_capacity() {
        let s = std::f64::consts::PI.sqrt();
        let (f, b, c) = unit_disk_field(|p| p.x / s, 9);
        let e = dirichlet_energy(&f, &f.harmonic_region);
        assert!((e - 1.0).abs() < 0.03, "{e}");
        let cap = oscillation_capacity(&f, c, 0.5, &b, 0);
        // {|cos t| >= 0.5 sqrt(pi)} is two opposite arcs of half-width t0;
        // squaring maps them onto one arc of width 4 t0, and
        // Cap(E)^2 = Cap(E^2) for sets symmetric under z -> -z
        let theta0 = (0.5 * s).acos();
        let exact = theta0.sin().sqrt();
        assert!(
            (cap.value - exact).abs() / exact < 0.05,
            "{} vs {exact}",
            cap.value
        );
        assert!(cap.value <= 10.0 * (-std::f64::consts::PI * 0.25).exp());
        assert_eq!(oscillation_capacity(&f, c, 10.0, &b, 0).value, 0.0);
    }

    #[test]
    fn polynomial_energy_matches_grid() {
        let p = HarmonicPolynomial::random(5, 3);
        let (f, _, _) = unit_disk_field(|z| p.eval(z), 9);
        let e = dirichlet_energy(&f, &f.harmonic_region);
        let exact = p.unit_disk_energy();
        assert!((e - exact).abs() / exact < 0.05, "{e} vs {exact}");
    }

    #[test]
    fn polynomial_eval() {
        let p = HarmonicPolynomial {
            coefficients: vec![(0.0, 0.0), (1.0, 0.0)],
        };
        // Re z^2 = x^2 - y^2
        assert!((p.eval(Point::new(0.3, 0.2)) - 0.05).abs() < 1e-15);
    }
}
