use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{CompactSetMask, Point};
use crate::{Error, Result};

/// Capacity of a square of unit side.
pub const UNIT_SQUARE_CAPACITY: f64 = 0.590_170_299_508_048_7;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityMethod {
    /// Greedy Leja points and their transfinite-diameter product.
    Fekete,
    /// Minimal discrete logarithmic energy over probability weights.
    Energy,
}

impl std::str::FromStr for CapacityMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fekete" => Ok(CapacityMethod::Fekete),
            "energy" => Ok(CapacityMethod::Energy),
            other => Err(Error::param("method", format!("unknown method `{other}`"))),
        }
    }
}

impl std::fmt::Display for CapacityMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CapacityMethod::Fekete => "fekete",
            CapacityMethod::Energy => "energy",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub value: f64,
    pub method: CapacityMethod,
    pub n_points: usize,
    /// Logarithmic energy of the optimal weights (energy method only).
    pub energy: Option<f64>,
    pub iterations: usize,
    /// Set when the input collapses to a single pixel or point.
    pub degenerate: bool,
}

impl CapacityEstimate {
    fn zero(method: CapacityMethod) -> Self {
        CapacityEstimate {
            value: 0.0,
            method,
            n_points: 0,
            energy: None,
            iterations: 0,
            degenerate: false,
        }
    }

    fn single(method: CapacityMethod, size: f64) -> Self {
        CapacityEstimate {
            value: UNIT_SQUARE_CAPACITY * size,
            method,
            n_points: 1,
            energy: None,
            iterations: 0,
            degenerate: true,
        }
    }
}

/// Discrete probability measure minimizing the logarithmic energy
/// `sum_{i != j} w_i w_j log(1/|z_i - z_j|) + sum_i w_i^2 log(1/r_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumMeasure {
    pub support: Vec<Point>,
    pub weights: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
}

impl EquilibriumMeasure {
    pub fn capacity(&self) -> f64 {
        (-self.energy).exp()
    }
}

/// Capacity of the boundary pixels of `mask`, self-terms regularized at one
/// pixel. `n_points` caps the number of sites used.
pub fn capacity_estimate(
    mask: &CompactSetMask,
    method: CapacityMethod,
    n_points: usize,
    seed: u64,
) -> Result<CapacityEstimate> {
    if !(8..=4096).contains(&n_points) {
        return Err(Error::param(
            "n_points",
            format!("{n_points} outside [8, 4096]"),
        ));
    }
    let h = mask.pixel_size();
    let sites: Vec<Point> = mask
        .boundary_pixels()
        .into_iter()
        .map(|k| mask.pixel_center_of(k))
        .collect();
    if sites.len() == 1 {
        return Ok(CapacityEstimate::single(method, h));
    }
    Ok(match method {
        CapacityMethod::Fekete => fekete(&sites, n_points, seed),
        CapacityMethod::Energy => grid_energy_capacity(&sites, h, n_points, seed),
    })
}

/// Energy-method capacity of pixel centers, self-terms regularized at the
/// pixel size `h`.
pub(crate) fn grid_energy_capacity(
    sites: &[Point],
    h: f64,
    n_points: usize,
    seed: u64,
) -> CapacityEstimate {
    match sites.len() {
        0 => return CapacityEstimate::zero(CapacityMethod::Energy),
        1 => return CapacityEstimate::single(CapacityMethod::Energy, h),
        _ => {}
    }
    let support = farthest_points(sites, n_points, seed);
    let reg = vec![h; support.len()];
    let mu = equilibrium_measure(support, &reg);
    CapacityEstimate {
        value: mu.capacity(),
        method: CapacityMethod::Energy,
        n_points: mu.support.len(),
        energy: Some(mu.energy),
        iterations: mu.iterations,
        degenerate: false,
    }
}

/// Capacity of a finite set of points sampling a compact set. Each point's
/// self-term is regularized by `exp(-3/2)` times its local spacing, the
/// effective radius of a uniformly charged segment of that length.
pub fn point_set_capacity(
    points: &[Point],
    method: CapacityMethod,
    n_points: usize,
    seed: u64,
) -> CapacityEstimate {
    let points = dedup(points);
    match points.len() {
        0 => CapacityEstimate::zero(method),
        1 => CapacityEstimate::single(method, 0.0),
        _ => match method {
            CapacityMethod::Fekete => fekete(&points, n_points, seed),
            CapacityMethod::Energy => {
                let support = farthest_points(&points, n_points.max(2), seed);
                let reg = local_spacing(&support)
                    .into_iter()
                    .map(|s| s * (-1.5f64).exp())
                    .collect::<Vec<_>>();
                let mu = equilibrium_measure(support, &reg);
                CapacityEstimate {
                    value: mu.capacity(),
                    method,
                    n_points: mu.support.len(),
                    energy: Some(mu.energy),
                    iterations: mu.iterations,
                    degenerate: false,
                }
            }
        },
    }
}

fn dedup(points: &[Point]) -> Vec<Point> {
    let scale = points
        .iter()
        .fold(0.0f64, |a, p| a.max(p.x.abs()).max(p.y.abs()))
        .max(1e-300);
    let key = |p: &Point| {
        let q = 1e-10 * scale;
        ((p.x / q).round() as i64, (p.y / q).round() as i64)
    };
    let mut seen = std::collections::HashSet::new();
    points
        .iter()
        .filter(|p| seen.insert(key(p)))
        .copied()
        .collect()
}

/// Mean distance to the two nearest other points.
fn local_spacing(points: &[Point]) -> Vec<f64> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let (mut a, mut b) = (f64::INFINITY, f64::INFINITY);
            for (j, q) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = p.dist(*q);
                if d < a {
                    b = a;
                    a = d;
                } else if d < b {
                    b = d;
                }
            }
            if b.is_finite() {
                0.5 * (a + b)
            } else {
                a
            }
        })
        .collect()
}

/// Greedy Leja sequence over `sites`, started at a seeded site. At most half
/// of the sites are used: a sequence that exhausts the candidates is just the
/// whole (nearly equispaced) site set, whose product undershoots badly.
fn fekete(sites: &[Point], n_points: usize, seed: u64) -> CapacityEstimate {
    let n = n_points.min((sites.len() / 2).max(2)).min(sites.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.gen_range(0..sites.len());
    let mut logsum = vec![0.0f64; sites.len()];
    let mut taken = vec![false; sites.len()];
    let mut chosen = Vec::with_capacity(n);
    let mut next = first;
    let mut pair_sum = 0.0;
    for _ in 0..n {
        taken[next] = true;
        pair_sum += logsum[next];
        chosen.push(sites[next]);
        let z = sites[next];
        logsum
            .par_iter_mut()
            .zip(sites.par_iter())
            .for_each(|(s, p)| *s += p.dist(z).ln());
        let mut best = f64::NEG_INFINITY;
        for (k, &s) in logsum.iter().enumerate() {
            if !taken[k] && s > best {
                best = s;
                next = k;
            }
        }
    }
    let value = if n < 2 {
        0.0
    } else {
        (2.0 * pair_sum / (n as f64 * (n as f64 - 1.0))).exp()
    };
    CapacityEstimate {
        value,
        method: CapacityMethod::Fekete,
        n_points: n,
        energy: None,
        iterations: n,
        degenerate: false,
    }
}

/// Farthest-point subsample of `sites`, seeded start; all sites when they
/// fit in the budget.
fn farthest_points(sites: &[Point], n_points: usize, seed: u64) -> Vec<Point> {
    if sites.len() <= n_points {
        return sites.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next = rng.gen_range(0..sites.len());
    let mut gap = vec![f64::INFINITY; sites.len()];
    let mut out = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let z = sites[next];
        out.push(z);
        gap.par_iter_mut()
            .zip(sites.par_iter())
            .for_each(|(g, p)| *g = g.min(p.dist(z)));
        next = (0..sites.len())
            .max_by(|&a, &b| gap[a].total_cmp(&gap[b]).then(b.cmp(&a)))
            .unwrap();
    }
    out
}

fn matvec(m: &[f64], n: usize, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut().enumerate().for_each(|(i, yi)| {
        let row = &m[i * n..(i + 1) * n];
        *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
    });
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k as f64 + 1.0);
        if x - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Minimizes the discrete logarithmic energy over probability weights by
/// accelerated projected gradient from the uniform measure. `radius[i]` is
/// the self-interaction radius of site `i`.
pub fn equilibrium_measure(support: Vec<Point>, radius: &[f64]) -> EquilibriumMeasure {
    let n = support.len();
    let mut m = vec![0.0; n * n];
    m.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j {
                -radius[i].ln()
            } else {
                -support[i].dist(support[j]).ln()
            };
        }
    });

    // Lipschitz constant of the gradient on the simplex's tangent space:
    // power iteration on the centered kernel.
    let center = |v: &mut [f64]| {
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    };
    let mut v: Vec<f64> = (0..n)
        .map(|i| ((i * 7919) % 104_729) as f64 - 52_364.0)
        .collect();
    center(&mut v);
    let mut mv = vec![0.0; n];
    let mut lambda = 1.0;
    for _ in 0..60 {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        matvec(&m, n, &v, &mut mv);
        center(&mut mv);
        lambda = mv.iter().map(|x| x * x).sum::<f64>().sqrt();
        std::mem::swap(&mut v, &mut mv);
    }
    let step = 1.0 / (2.0 * lambda.max(1e-12) * 1.05);

    let energy_of = |w: &[f64], mw: &mut [f64]| {
        matvec(&m, n, w, mw);
        w.iter().zip(mw.iter()).map(|(a, b)| a * b).sum::<f64>()
    };
    let mut w = vec![1.0 / n as f64; n];
    let mut mw = vec![0.0; n];
    let mut energy = energy_of(&w, &mut mw);
    let mut best = (energy, w.clone());
    let mut y = w.clone();
    let mut my = vec![0.0; n];
    let mut t = 1.0f64;
    let mut iterations = 0;
    let mut stall = 0;
    while iterations < 4000 {
        iterations += 1;
        matvec(&m, n, &y, &mut my);
        let mut next: Vec<f64> = y.iter().zip(&my).map(|(a, g)| a - step * 2.0 * g).collect();
        project_simplex(&mut next);
        let e = energy_of(&next, &mut mw);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if e > energy {
            // adaptive restart
            t = 1.0;
            y.clone_from(&w);
            continue;
        }
        let change = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).sum::<f64>();
        y = next
            .iter()
            .zip(&w)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        t = t_next;
        w = next;
        let improvement = energy - e;
        energy = e;
        if energy < best.0 {
            best = (energy, w.clone());
        }
        if change < 1e-13 || improvement.abs() < 1e-15 * (1.0 + energy.abs()) {
            stall += 1;
            if stall >= 5 {
                break;
            }
        } else {
            stall = 0;
        }
    }
    EquilibriumMeasure {
        support,
        weights: best.1,
        energy: best.0,
        iterations,
    }
}
