//! Grid-scale removability experiments: continuous test functions harmonic
//! off a compact set, harmonic replacement in shrinking collars, and the
//! Cauchy-transform witness for sets of positive area.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{border_cells, distance_transform, CompactSetMask, DistanceField, Point};
use crate::potential::{
    cauchy_transform, harmonic_solve_from, neighbours, ComplexField, HarmonicField,
};
use crate::{Error, Result};

/// Boundary data imposed on the compact set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceSpec {
    Constant {
        value: f64,
    },
    /// `Re z / scale`.
    Coordinate {
        scale: f64,
    },
    /// `sum_{k=1}^{terms} k^{-3} Re(c_k (z / R)^k)` with seeded unit-modulus
    /// `c_k` and `R` the box half-side, so the trace is dilation invariant.
    RandomFourier {
        terms: usize,
    },
}

impl std::str::FromStr for TraceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = |default: f64| -> Result<f64> {
            if arg.is_empty() {
                Ok(default)
            } else {
                arg.parse()
                    .map_err(|_| Error::param("trace", format!("bad number `{arg}`")))
            }
        };
        match head {
            "constant" => Ok(TraceSpec::Constant { value: num(1.0)? }),
            "coordinate" => Ok(TraceSpec::Coordinate { scale: num(1.0)? }),
            "random" | "random_fourier" => Ok(TraceSpec::RandomFourier {
                terms: num(8.0)? as usize,
            }),
            other => Err(Error::param("trace", format!("unknown trace `{other}`"))),
        }
    }
}

/// A trace made concrete for one box and seed.
struct Trace {
    spec: TraceSpec,
    center: Point,
    radius: f64,
    phases: Vec<(f64, f64)>,
}

impl Trace {
    fn new(spec: &TraceSpec, mask: &CompactSetMask, seed: u64) -> Result<Self> {
        match spec {
            TraceSpec::Coordinate { scale } if !(*scale > 0.0) => {
                return Err(Error::param("trace", "coordinate scale must be positive"))
            }
            TraceSpec::RandomFourier { terms } if *terms == 0 => {
                return Err(Error::param(
                    "trace",
                    "random trace needs at least one term",
                ))
            }
            _ => {}
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phases = match spec {
            TraceSpec::RandomFourier { terms } => (0..*terms)
                .map(|_| {
                    let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    (a.cos(), a.sin())
                })
                .collect(),
            _ => Vec::new(),
        };
        Ok(Trace {
            spec: spec.clone(),
            center: mask.bbox.center,
            radius: mask.bbox.half_side,
            phases,
        })
    }

    fn eval(&self, p: Point) -> f64 {
        match self.spec {
            TraceSpec::Constant { value } => value,
            TraceSpec::Coordinate { scale } => p.x / scale,
            TraceSpec::RandomFourier { .. } => {
                let w = (p - self.center).scale(1.0 / self.radius);
                let (mut zr, mut zi) = (1.0, 0.0);
                let mut s = 0.0;
                for (k, &(a, b)) in self.phases.iter().enumerate() {
                    let t = zr * w.x - zi * w.y;
                    zi = zr * w.y + zi * w.x;
                    zr = t;
                    s += (a * zr - b * zi) / ((k + 1) as f64).powi(3);
                }
                s
            }
        }
    }
}

/// Continuous function equal to the trace on `K`, discrete-harmonic on each
/// complementary component, with the trace's mean on the box edge.
pub fn build_test_function(
    mask: &CompactSetMask,
    trace: &TraceSpec,
    seed: u64,
) -> Result<HarmonicField> {
    let trace = Trace::new(trace, mask, seed)?;
    let n = mask.n();
    let mut fixed: Vec<Option<f64>> = vec![None; n * n];
    let mut sum = 0.0;
    for k in mask.occupied() {
        let v = trace.eval(mask.pixel_center_of(k));
        sum += v;
        fixed[k] = Some(v);
    }
    let mean = sum / mask.occupied_count() as f64;
    for k in border_cells(n) {
        fixed[k] = Some(mean);
    }
    let domain: Vec<bool> = fixed.iter().map(Option::is_none).collect();
    harmonic_solve_from(mask.bbox, mask.level, &domain, &fixed, None)
}

/// The closed neighbourhood `{d <= delta}` of the set, as grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Collar {
    pub delta: f64,
    pub nodes: Vec<bool>,
}

impl Collar {
    pub fn new(field: &DistanceField, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::param("delta", "must be positive"));
        }
        // relative slack keeps node membership identical under dilation
        let cut = delta * (1.0 + 1e-9);
        Ok(Collar {
            delta,
            nodes: field.values().iter().map(|&d| d <= cut).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Harmonic replacement of `f` inside the collar, with `f` itself as
/// boundary data just outside. Nodes outside the collar keep their values
/// bit for bit.
pub fn smooth_in_collar(f: &HarmonicField, collar: &Collar) -> Result<HarmonicField> {
    let n = f.n();
    if collar.nodes.len() != n * n {
        return Err(Error::param("collar", "grid size does not match the field"));
    }
    let border = border_cells(n);
    if border
        .iter()
        .any(|&k| collar.nodes[k] || neighbours(n, k).any(|q| collar.nodes[q]))
    {
        return Err(Error::Geometry(format!(
            "collar of width {} reaches the box boundary",
            collar.delta
        )));
    }
    let mut fixed = vec![None; n * n];
    for k in 0..n * n {
        if !collar.nodes[k] && neighbours(n, k).any(|q| collar.nodes[q]) {
            fixed[k] = Some(f.values[k]);
        }
    }
    let inner = harmonic_solve_from(f.bbox, f.level, &collar.nodes, &fixed, Some(&f.values))?;
    let mut values = f.values.clone();
    for k in 0..n * n {
        if collar.nodes[k] {
            values[k] = inner.values[k];
        }
    }
    let harmonic_region: Vec<bool> = (0..n * n)
        .map(|k| f.harmonic_region[k] || collar.nodes[k])
        .collect();
    let boundary_region: Vec<bool> = (0..n * n)
        .map(|k| f.boundary_region[k] && !collar.nodes[k])
        .collect();
    Ok(HarmonicField {
        bbox: f.bbox,
        level: f.level,
        values,
        harmonic_region,
        boundary_region,
        residual: f.residual.max(inner.residual),
        tolerance: f.tolerance.max(inner.tolerance),
        iterations: inner.iterations,
    })
}

/// Sum of squared differences over the grid edges selected by `keep`.
fn edge_energy(n: usize, values: &[f64], keep: impl Fn(usize, usize) -> bool) -> f64 {
    let mut e = 0.0;
    for k in 0..n * n {
        let (i, j) = (k % n, k / n);
        if i + 1 < n && keep(k, k + 1) {
            let d = values[k + 1] - values[k];
            e += d * d;
        }
        if j + 1 < n && keep(k, k + n) {
            let d = values[k + n] - values[k];
            e += d * d;
        }
    }
    e
}

/// Grid Dirichlet energy of `f` over edges with at least one endpoint off
/// the set.
pub fn offk_energy(f: &HarmonicField, mask: &CompactSetMask) -> f64 {
    edge_energy(f.n(), &f.values, |a, b| {
        !(mask.get_index(a) && mask.get_index(b))
    })
}

/// Per-node energy density: half the squared differences over the node's
/// grid edges, so the densities sum to the total edge energy.
pub fn energy_density(f: &HarmonicField) -> Vec<f64> {
    let n = f.n();
    let mut rho = vec![0.0; n * n];
    for k in 0..n * n {
        for q in neighbours(n, k) {
            let d = f.values[q] - f.values[k];
            rho[k] += 0.5 * d * d;
        }
    }
    rho
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovabilityRow {
    pub n: usize,
    pub delta: f64,
    pub collar_nodes: usize,
    /// Energy of the smoothed function on edges touching the collar.
    pub collar_energy_smooth: f64,
    /// Energy of the original function on the same edges, off-set part only.
    pub collar_energy_original_offk: f64,
    /// Energy of the original function off the set within the wider collar
    /// `{d <= 4 delta}`.
    pub collar_energy_original: f64,
    pub global_energy_smooth: f64,
    pub verdict_gap: f64,
    /// `collar_energy_smooth / collar_energy_original`.
    pub collar_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovabilityReport {
    pub trace: TraceSpec,
    pub seed: u64,
    pub unit: f64,
    pub offk_energy: f64,
    pub rows: Vec<RemovabilityRow>,
    /// Largest measured `collar_ratio`.
    pub measured_constant: f64,
}

impl RemovabilityReport {
    pub fn deltas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.delta).collect()
    }

    pub fn verdict_gaps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.verdict_gap).collect()
    }
}

/// Widening factor of the comparison window for the original energy.
pub const WINDOW_FACTOR: f64 = 4.0;

/// Builds the test function, smooths it in the collars `delta = unit / n`
/// and tabulates the energies.
pub fn removability_report(
    mask: &CompactSetMask,
    trace: &TraceSpec,
    n_list: &[usize],
    unit: f64,
    seed: u64,
) -> Result<RemovabilityReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::param(
            "n_list",
            "must be a nonempty increasing list of positive integers",
        ));
    }
    if !(unit > 0.0) {
        return Err(Error::param("unit", "must be positive"));
    }
    let h = mask.pixel_size();
    let finest = unit / *n_list.last().unwrap() as f64;
    if finest < 4.0 * h * (1.0 - 1e-9) {
        return Err(Error::param(
            "n_list",
            format!(
                "finest collar {finest} is narrower than 4 pixels ({})",
                4.0 * h
            ),
        ));
    }
    let f = build_test_function(mask, trace, seed)?;
    let df = distance_transform(mask);
    let n = mask.n();
    let in_k: Vec<bool> = (0..n * n).map(|k| mask.get_index(k)).collect();
    let off_k = |a: usize, b: usize| !(in_k[a] && in_k[b]);
    let offk_energy = edge_energy(n, &f.values, off_k);

    let mut rows = Vec::new();
    for &m in n_list {
        let delta = unit / m as f64;
        let collar = Collar::new(&df, delta)?;
        let smooth = smooth_in_collar(&f, &collar)?;
        let touches = |a: usize, b: usize| collar.nodes[a] || collar.nodes[b];
        let collar_energy_smooth = edge_energy(n, &smooth.values, touches);
        let collar_energy_original_offk =
            edge_energy(n, &f.values, |a, b| touches(a, b) && off_k(a, b));
        let wide = Collar::new(&df, WINDOW_FACTOR * delta)?;
        let collar_energy_original = edge_energy(n, &f.values, |a, b| {
            (wide.nodes[a] || wide.nodes[b]) && off_k(a, b)
        });
        let global_energy_smooth = edge_energy(n, &smooth.values, |_, _| true);
        let verdict_gap = if offk_energy > 0.0 {
            (global_energy_smooth - offk_energy).abs() / offk_energy
        } else {
            0.0
        };
        rows.push(RemovabilityRow {
            n: m,
            delta,
            collar_nodes: collar.len(),
            collar_energy_smooth,
            collar_energy_original_offk,
            collar_energy_original,
            global_energy_smooth,
            verdict_gap,
            collar_ratio: if collar_energy_original > 0.0 {
                collar_energy_smooth / collar_energy_original
            } else {
                0.0
            },
        });
    }
    let measured_constant = rows.iter().map(|r| r.collar_ratio).fold(0.0, f64::max);
    Ok(RemovabilityReport {
        trace: trace.clone(),
        seed,
        unit,
        offk_energy,
        rows,
        measured_constant,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub n: usize,
    pub sup_norm: f64,
    pub offk_gradient_energy: f64,
    pub dbar_energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub area: f64,
    pub rows: Vec<WitnessRow>,
    /// Sup norms and off-set energies strictly decrease along the list while
    /// the dbar energy stays equal to the area.
    pub valid: bool,
}

impl WitnessReport {
    pub fn sup_norms(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.sup_norm).collect()
    }

    pub fn offk_gradient_energies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.offk_gradient_energy).collect()
    }

    pub fn dbar_energies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.dbar_energy).collect()
    }
}

/// Smallest area, as a fraction of the box, for which the witness applies.
pub const WITNESS_MIN_AREA_FRACTION: f64 = 0.05;

/// `F_n = (1 / pi z) * (e^{i n (x + y)} 1_K)` for each `n`: bounded
/// functions holomorphic off `K` whose dbar-derivative keeps the area of `K`
/// as its squared L2 norm while sup norms and off-set energies vanish.
pub fn nonremovability_witness(mask: &CompactSetMask, n_list: &[usize]) -> Result<WitnessReport> {
    let box_area = mask.bbox.side() * mask.bbox.side();
    if mask.area() < WITNESS_MIN_AREA_FRACTION * box_area {
        return Err(Error::WitnessInapplicable(format!(
            "area {} is below {} of the box",
            mask.area(),
            WITNESS_MIN_AREA_FRACTION
        )));
    }
    if n_list.is_empty() || n_list.iter().any(|&m| !(4..=64).contains(&m)) {
        return Err(Error::param("n_list", "frequencies must lie in [4, 64]"));
    }
    let n = mask.n();
    let in_k: Vec<bool> = (0..n * n).map(|k| mask.get_index(k)).collect();
    let mut rows = Vec::new();
    for &m in n_list {
        let density = ComplexField::from_fn(mask.bbox, mask.level, |p| {
            let (i, j) = mask.bbox.pixel_of(mask.level, p).expect("pixel center");
            if mask.get(i, j) {
                Complex64::from_polar(1.0, m as f64 * (p.x + p.y))
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let f = cauchy_transform(&density);
        let mut energy = 0.0;
        for k in 0..n * n {
            let (i, j) = (k % n, k / n);
            if in_k[k] {
                continue;
            }
            if i + 1 < n && !in_k[k + 1] {
                energy += (f.values[k + 1] - f.values[k]).norm_sqr();
            }
            if j + 1 < n && !in_k[k + n] {
                energy += (f.values[k + n] - f.values[k]).norm_sqr();
            }
        }
        rows.push(WitnessRow {
            n: m,
            sup_norm: f.sup_norm(),
            offk_gradient_energy: energy,
            dbar_energy: density.l2_squared(),
        });
    }
    let area = mask.area();
    let valid = rows.windows(2).all(|w| {
        w[1].sup_norm < w[0].sup_norm && w[1].offk_gradient_energy < w[0].offk_gradient_energy
    }) && rows
        .iter()
        .all(|r| (r.dbar_energy - area).abs() <= 1e-12 * area);
    Ok(WitnessReport { area, rows, valid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, BoundingBox, ShapeSpec};
    use crate::potential::{dirichlet_energy, harmonic_solve};

    fn circle(r: f64, half: f64, level: u32) -> CompactSetMask {
        let bbox = BoundingBox::new(Point::ORIGIN, half).unwrap();
        rasterize(&ShapeSpec::circle(r), bbox, level).unwrap()
    }

    #[test]
    fn constant_trace_is_constant() {
        let m = circle(0.5, 1.0, 7);
        let f = build_test_function(&m, &TraceSpec::Constant { value: 3.0 }, 0).unwrap();
        assert!(f.values.iter().all(|&v| v == 3.0));
        let all = vec![true; f.values.len()];
        assert_eq!(dirichlet_energy(&f, &all), 0.0);
        let c = Collar::new(&distance_transform(&m), 0.1).unwrap();
        let s = smooth_in_collar(&f, &c).unwrap();
        assert!(s.values.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn smoothing_is_local_and_energy_decreasing() {
        let m = circle(0.5, 1.0, 8);
        let f = build_test_function(&m, &TraceSpec::Coordinate { scale: 0.5 }, 0).unwrap();
        assert!(f.maximum_principle_holds());
        let c = Collar::new(&distance_transform(&m), 0.1).unwrap();
        let s = smooth_in_collar(&f, &c).unwrap();
        let n = f.n();
        for k in 0..n * n {
            if !c.nodes[k] {
                assert_eq!(s.values[k].to_bits(), f.values[k].to_bits());
            }
        }
        let touches = |a: usize, b: usize| c.nodes[a] || c.nodes[b];
        let es = edge_energy(n, &s.values, touches);
        let ef = edge_energy(n, &f.values, touches);
        assert!(es <= ef);
        // random perturbations supported in the collar only add energy
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let mut p = s.values.clone();
            for k in 0..n * n {
                if c.nodes[k] {
                    p[k] += rng.gen_range(-1e-3..1e-3);
                }
            }
            assert!(edge_energy(n, &p, touches) >= es);
        }
    }

    #[test]
    fn harmonic_function_is_fixed_by_smoothing() {
        // Re z solved on the whole box is harmonic across any collar
        let m = circle(0.5, 1.0, 7);
        let n = m.n();
        let mut fixed = vec![None; n * n];
        for k in border_cells(n) {
            fixed[k] = Some(m.pixel_center_of(k).x);
        }
        let dom: Vec<bool> = fixed.iter().map(Option::is_none).collect();
        let f = harmonic_solve(m.bbox, m.level, &dom, &fixed).unwrap();
        let c = Collar::new(&distance_transform(&m), 0.1).unwrap();
        let s = smooth_in_collar(&f, &c).unwrap();
        for k in 0..n * n {
            assert!((s.values[k] - f.values[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn energy_accounting_identity() {
        let m = circle(0.5, 1.0, 8);
        let r = removability_report(&m, &TraceSpec::RandomFourier { terms: 6 }, &[4, 8], 0.5, 2)
            .unwrap();
        for row in &r.rows {
            let lhs = row.global_energy_smooth - r.offk_energy;
            let rhs = row.collar_energy_smooth - row.collar_energy_original_offk;
            assert!((lhs - rhs).abs() <= 1e-10 * r.offk_energy, "{lhs} {rhs}");
        }
    }

    #[test]
    fn rejects_too_thin_collar_and_box_contact() {
        let m = circle(0.5, 1.0, 6);
        let t = TraceSpec::RandomFourier { terms: 4 };
        assert!(removability_report(&m, &t, &[64], 1.0, 0).is_err());
        assert!(matches!(
            removability_report(&m, &t, &[1], 1.0, 0),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn witness_identity_and_inapplicability() {
        let spec = ShapeSpec::FatCantor {
            area: 0.1,
            side: 1.0,
        };
        let bbox = BoundingBox::new(Point::ORIGIN, 0.7).unwrap();
        let m = rasterize(&spec, bbox, 8).unwrap();
        let w = nonremovability_witness(&m, &[4, 8]).unwrap();
        for r in &w.rows {
            assert!((r.dbar_energy - w.area).abs() <= 1e-12 * w.area);
        }
        let thin = circle(0.5, 1.0, 7);
        assert!(matches!(
            nonremovability_witness(&thin, &[4]),
            Err(Error::WitnessInapplicable(_))
        ));
    }

    #[test]
    fn parses_traces() {
        assert_eq!(
            "random:5".parse::<TraceSpec>().unwrap(),
            TraceSpec::RandomFourier { terms: 5 }
        );
        assert_eq!(
            "constant".parse::<TraceSpec>().unwrap(),
            TraceSpec::Constant { value: 1.0 }
        );
        assert!("wave".parse::<TraceSpec>().is_err());
    }
}
