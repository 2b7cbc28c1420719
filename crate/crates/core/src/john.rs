//! John-constant estimation on the Whitney-center graph.
//!
//! For a boundary point `z1` the best arc to the center is the path whose
//! smallest clearance ratio `d(z) / |z - z1|` is largest. That is a bottleneck
//! path problem, solved exactly by inserting vertices in decreasing ratio
//! order into a union-find until some start square joins the target.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{flood_fill, DistanceField, Point, WhitneyDecomposition, N4, NONE};
use crate::{Error, Result};

/// Where John arcs end: a point of the domain, or the far field.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JohnCenter {
    Point(Point),
    Infinity(Infinity),
}

/// Serialized as the string `"infinity"`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Infinity {
    Infinity,
}

impl JohnCenter {
    pub const INFINITY: JohnCenter = JohnCenter::Infinity(Infinity::Infinity);

    pub fn is_infinite(&self) -> bool {
        matches!(self, JohnCenter::Infinity(_))
    }
}

impl std::str::FromStr for JohnCenter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(JohnCenter::INFINITY);
        }
        let parts: Vec<&str> = s.split(',').collect();
        let coords: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse().ok()).collect();
        match coords.as_deref() {
            Some([x, y]) => Ok(JohnCenter::Point(Point::new(*x, *y))),
            _ => Err(Error::param(
                "center",
                format!("expected `x,y` or `inf`, got `{s}`"),
            )),
        }
    }
}

/// A polyline from a boundary point `z1` to the center together with the
/// clearance ratio it certifies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JohnArcCertificate {
    pub z1: Point,
    pub epsilon: f64,
    /// Starts at `z1`, then Whitney centers, then the center point itself
    /// (omitted when the center is the far field).
    pub polyline: Vec<Point>,
}

impl JohnArcCertificate {
    /// Minimum of `d(z) / |z - z1|` over the polyline vertices after `z1`.
    pub fn recompute(&self, field: &DistanceField) -> f64 {
        self.polyline[1..]
            .iter()
            .map(|&p| field.at(p) / p.dist(self.z1))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JohnEstimate {
    pub center: JohnCenter,
    pub epsilon_lower: f64,
    /// Number of boundary pixels facing the center's component.
    pub boundary_candidates: usize,
    pub samples: Vec<JohnArcCertificate>,
}

impl JohnEstimate {
    pub fn worst(&self) -> Option<&JohnArcCertificate> {
        self.samples
            .iter()
            .min_by(|a, b| a.epsilon.total_cmp(&b.epsilon))
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Graph shared by all samples: squares `0..len`, plus one target vertex.
struct CenterGraph<'a> {
    w: &'a WhitneyDecomposition,
    target: usize,
    target_point: Option<Point>,
    target_links: Vec<usize>,
}

impl CenterGraph<'_> {
    fn neighbors(&self, v: usize) -> Vec<usize> {
        if v == self.target {
            return self.target_links.clone();
        }
        let mut out = self.w.edge_neighbors(v).to_vec();
        if self.target_links.binary_search(&v).is_ok() {
            out.push(self.target);
        }
        out
    }

    fn ratio(&self, v: usize, z1: Point) -> f64 {
        if v == self.target {
            match self.target_point {
                Some(p) => self.w.distance_field.at(p) / p.dist(z1),
                // the far field never limits an arc
                None => 1.0,
            }
        } else {
            self.w.center_distance[v] / self.w.center(v).dist(z1)
        }
    }
}

/// Estimates the John constant of the complementary component containing
/// `center`, certifying one bottleneck-optimal arc per sampled boundary point.
pub fn estimate_john_constant(
    w: &WhitneyDecomposition,
    center: JohnCenter,
    n_samples: usize,
    seed: u64,
) -> Result<JohnEstimate> {
    if w.is_empty() {
        return Err(Error::Geometry(
            "Whitney decomposition has no squares".into(),
        ));
    }
    if n_samples == 0 {
        return Err(Error::param("n_samples", "must be positive"));
    }
    let n = 1usize << w.mask_level;
    let df = &w.distance_field;
    let free: Vec<bool> = df.values().iter().map(|&d| d > 0.0).collect();

    let (seeds, target_point, mut target_links) = match center {
        JohnCenter::Point(p) => {
            let (i, j) = w
                .bbox
                .pixel_of(w.mask_level, p)
                .ok_or_else(|| Error::param("center", "outside the box"))?;
            let k = j * n + i;
            if !free[k] || df.at(p) <= 0.0 {
                return Err(Error::param("center", "lies on the compact set"));
            }
            let sq = w
                .containing(p)
                .ok_or_else(|| Error::param("center", "not covered by a Whitney square"))?;
            (vec![k], Some(p), vec![sq])
        }
        JohnCenter::Infinity(_) => {
            let links: Vec<usize> = (0..w.len())
                .filter(|&k| w.touches_box_boundary(k))
                .collect();
            (crate::geometry::border_cells(n), None, links)
        }
    };
    target_links.sort_unstable();
    let component = flood_fill(n, &free, &seeds, false);

    // boundary pixels of K facing the component, with the squares they face
    let mut candidates: Vec<(usize, Vec<usize>)> = Vec::new();
    for k in 0..n * n {
        if free[k] {
            continue;
        }
        let (i, j) = ((k % n) as i64, (k / n) as i64);
        let mut starts = Vec::new();
        let mut faces = false;
        for (di, dj) in N4 {
            let (a, b) = (i + di, j + dj);
            if a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                continue;
            }
            let q = b as usize * n + a as usize;
            if component[q] {
                faces = true;
                if w.labels[q] != NONE {
                    starts.push(w.labels[q] as usize);
                }
            }
        }
        if faces {
            starts.sort_unstable();
            starts.dedup();
            candidates.push((k, starts));
        }
    }
    if candidates.is_empty() {
        return Err(Error::Connectivity(
            "no boundary pixel of the compact set faces the center's component".into(),
        ));
    }
    let picked: Vec<usize> = if n_samples >= candidates.len() {
        (0..candidates.len()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = sample(&mut rng, candidates.len(), n_samples).into_vec();
        v.sort_unstable();
        v
    };

    let graph = CenterGraph {
        w,
        target: w.len(),
        target_point,
        target_links,
    };
    let samples: Vec<JohnArcCertificate> = picked
        .par_iter()
        .map(|&c| {
            let (k, starts) = &candidates[c];
            let z1 = w.bbox.pixel_center(w.mask_level, k % n, k / n);
            best_arc(&graph, z1, starts)
        })
        .collect::<Result<_>>()?;
    let epsilon_lower = samples
        .iter()
        .map(|s| s.epsilon)
        .fold(f64::INFINITY, f64::min);
    Ok(JohnEstimate {
        center,
        epsilon_lower,
        boundary_candidates: candidates.len(),
        samples,
    })
}

fn best_arc(g: &CenterGraph, z1: Point, starts: &[usize]) -> Result<JohnArcCertificate> {
    let total = g.target + 1;
    let ratio: Vec<f64> = (0..total).map(|v| g.ratio(v, z1)).collect();
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_unstable_by(|&a, &b| ratio[b].total_cmp(&ratio[a]).then(a.cmp(&b)));

    let mut uf = UnionFind::new(total + 1);
    let source = total; // joins all start squares
    let mut active = vec![false; total];
    let mut is_start = vec![false; total];
    for &s in starts {
        is_start[s] = true;
    }
    let mut threshold = None;
    for &v in &order {
        active[v] = true;
        if is_start[v] {
            uf.union(v, source);
        }
        for u in g.neighbors(v) {
            if active[u] {
                uf.union(u, v);
            }
        }
        if active[g.target] && uf.find(g.target) == uf.find(source) {
            threshold = Some(ratio[v]);
            break;
        }
    }
    let Some(threshold) = threshold else {
        return Err(Error::Connectivity(format!(
            "boundary point ({:.6}, {:.6}) cannot reach the center through Whitney squares",
            z1.x, z1.y
        )));
    };

    // shortest path in hops inside the admissible subgraph
    let mut prev = vec![usize::MAX; total];
    let mut queue = std::collections::VecDeque::new();
    for &s in starts {
        if ratio[s] >= threshold && prev[s] == usize::MAX {
            prev[s] = s;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if v == g.target {
            break;
        }
        for u in g.neighbors(v) {
            if prev[u] == usize::MAX && ratio[u] >= threshold {
                prev[u] = v;
                queue.push_back(u);
            }
        }
    }
    let mut path = vec![g.target];
    let mut v = g.target;
    while prev[v] != v {
        v = prev[v];
        path.push(v);
    }
    path.reverse();

    let epsilon = path.iter().map(|&v| ratio[v]).fold(f64::INFINITY, f64::min);
    let mut polyline = vec![z1];
    for &v in &path {
        if v == g.target {
            if let Some(p) = g.target_point {
                polyline.push(p);
            }
        } else {
            polyline.push(g.w.center(v));
        }
    }
    Ok(JohnArcCertificate {
        z1,
        epsilon,
        polyline,
    })
}
