use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::geometry::{border_cells, flood_fill, Point, WhitneyDecomposition, NONE};
use crate::{Error, Result};

/// Children allowed per vertex, so every square carries at most three gates
/// (one toward its parent, two toward children; the root spends its third
/// gate on the exit square).
pub const MAX_CHILDREN: usize = 2;

/// Whitney centers whose distance lies in `[lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerFamily {
    pub n: u32,
    pub lower: f64,
    pub upper: f64,
    pub members: Vec<usize>,
}

impl LayerFamily {
    pub fn contains(&self, d: f64) -> bool {
        self.lower <= d && d <= self.upper
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphVertex {
    pub square: usize,
    /// Head of the unique outgoing edge; `None` only for the root.
    pub parent: Option<usize>,
    /// Graph distance to the root.
    pub rho: usize,
    /// First layer whose graph contains the vertex.
    pub layer: u32,
}

/// Results of the structural checks run on every built graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphCertificate {
    pub connected: bool,
    pub acyclic: bool,
    pub unique_outgoing: bool,
    pub rho_consistent: bool,
    pub edges_touch: bool,
    /// Vertices of each layer's graph stay admissible for that layer.
    pub admissible: bool,
    pub nested: bool,
    pub covers_layers: bool,
    /// Squares at distance `>= unit` left out of the first layer lie in the
    /// unbounded complementary component of the first family.
    pub enclosure: bool,
    /// Per layer, the largest graph distance from a vertex to the family.
    pub proximity: Vec<usize>,
    pub root_extreme: bool,
    /// Every square outside the graph is joined to the box border through
    /// squares outside the graph.
    pub open_far_field: bool,
    pub passed: bool,
}

/// Rooted spanning tree of Whitney squares built layer by layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JohnGraph {
    /// Layer constant.
    pub a: f64,
    /// Length unit of the layer thresholds.
    pub unit: f64,
    pub n_max: u32,
    /// Square index of the root.
    pub root: usize,
    pub vertices: Vec<GraphVertex>,
    pub layers: Vec<LayerFamily>,
    pub certificate: GraphCertificate,
}

impl JohnGraph {
    /// Directed edges `(tail, head)` as square indices.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.vertices
            .iter()
            .filter_map(|v| v.parent.map(|p| (v.square, p)))
            .collect()
    }

    /// Lookup table from square index to vertex position.
    pub fn index(&self, squares: usize) -> Vec<Option<usize>> {
        let mut idx = vec![None; squares];
        for (k, v) in self.vertices.iter().enumerate() {
            idx[v.square] = Some(k);
        }
        idx
    }

    /// Tree edges incident to each vertex, in vertex order.
    pub fn incident(&self, squares: usize) -> Vec<Vec<usize>> {
        let idx = self.index(squares);
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for v in &self.vertices {
            if let Some(p) = v.parent {
                inc[idx[v.square].unwrap()].push(p);
                inc[idx[p].unwrap()].push(v.square);
            }
        }
        inc
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = std::collections::HashMap::new();
        for v in &self.vertices {
            if let Some(p) = v.parent {
                *deg.entry(v.square).or_insert(0usize) += 1;
                *deg.entry(p).or_insert(0usize) += 1;
            }
        }
        deg.values().copied().max().unwrap_or(0)
    }
}

/// Squares of the complementary component that reaches the box border.
pub(crate) fn outer_squares(w: &WhitneyDecomposition) -> Result<Vec<bool>> {
    let n = 1usize << w.mask_level;
    let free: Vec<bool> = w.distance_field.values().iter().map(|&d| d > 0.0).collect();
    let outer = flood_fill(n, &free, &border_cells(n), false);
    let mut first = None;
    for &c in &border_cells(n) {
        if free[c] {
            match first {
                None => first = Some(c),
                Some(f) => {
                    let comp = flood_fill(n, &free, &[f], false);
                    if !comp[c] {
                        return Err(Error::Geometry(
                            "the set splits the box border into several components; enlarge the box".into(),
                        ));
                    }
                    break;
                }
            }
        }
    }
    let mut in_outer = vec![false; w.len()];
    for k in 0..w.len() {
        let (i0, j0, _) = w.pixel_block(k);
        in_outer[k] = outer[j0 * n + i0];
    }
    Ok(in_outer)
}

/// Unit-weight search from the current tree, visiting in order of `rho` and
/// attaching each new square to the first reached neighbour with spare
/// capacity. Sweeps run first through `targets`, then through `allowed`;
/// each is repeated uncapped for squares only reachable through full
/// vertices.
fn grow(
    w: &WhitneyDecomposition,
    targets: &[bool],
    allowed: &[bool],
    parent: &mut [Option<usize>],
    rho: &mut [usize],
    in_tree: &mut [bool],
    children: &mut [usize],
) -> Vec<usize> {
    let done = |in_tree: &[bool]| targets.iter().zip(in_tree).all(|(&p, &t)| !p || t);
    let mut added = Vec::new();
    for pass in [targets, allowed] {
        if done(in_tree) {
            return added;
        }
        attach_pass(w, pass, true, parent, rho, in_tree, children, &mut added);
    }
    // free capacity next to stranded targets by moving children elsewhere
    let mut fresh = vec![false; w.len()];
    for &k in &added {
        fresh[k] = true;
    }
    let mut moves = 0;
    while moves < w.len()
        && !done(in_tree)
        && rehome(w, targets, allowed, &fresh, parent, rho, in_tree, children)
    {
        moves += 1;
        let before = added.len();
        attach_pass(w, allowed, true, parent, rho, in_tree, children, &mut added);
        for &k in &added[before..] {
            fresh[k] = true;
        }
    }
    for pass in [targets, allowed] {
        if done(in_tree) {
            break;
        }
        attach_pass(w, pass, false, parent, rho, in_tree, children, &mut added);
    }
    added
}

/// Attaches squares flagged by `pass`, largest center distance first, each to
/// its largest tree neighbour with room, so that parents sit no closer to the
/// set than their children wherever the geometry allows it.
#[allow(clippy::too_many_arguments)]
fn attach_pass(
    w: &WhitneyDecomposition,
    pass: &[bool],
    capped: bool,
    parent: &mut [Option<usize>],
    rho: &mut [usize],
    in_tree: &mut [bool],
    children: &mut [usize],
    added: &mut Vec<usize>,
) {
    let d = &w.center_distance;
    let key = |k: usize| (OrderedDist(d[k]), Reverse(k));
    let mut heap = BinaryHeap::new();
    for v in (0..w.len()).filter(|&v| in_tree[v]) {
        for &u in w.edge_neighbors(v) {
            if !in_tree[u] && pass[u] {
                heap.push(key(u));
            }
        }
    }
    while let Some((_, Reverse(u))) = heap.pop() {
        if in_tree[u] {
            continue;
        }
        let best = w
            .edge_neighbors(u)
            .iter()
            .copied()
            .filter(|&p| in_tree[p] && (!capped || children[p] < MAX_CHILDREN))
            .max_by(|&p, &q| {
                d[p].total_cmp(&d[q])
                    .then(rho[q].cmp(&rho[p]))
                    .then(q.cmp(&p))
            });
        let Some(p) = best else { continue };
        in_tree[u] = true;
        parent[u] = Some(p);
        rho[u] = rho[p] + 1;
        children[p] += 1;
        added.push(u);
        for &x in w.edge_neighbors(u) {
            if !in_tree[x] && pass[x] {
                heap.push(key(x));
            }
        }
    }
}

#[derive(Copy, Clone, PartialEq)]
struct OrderedDist(f64);

impl Eq for OrderedDist {}

impl PartialOrd for OrderedDist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedDist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Finds a saturated tree square next to the region of stranded targets and
/// moves one of its newly added children to another tree neighbour with room.
#[allow(clippy::too_many_arguments)]
fn rehome(
    w: &WhitneyDecomposition,
    targets: &[bool],
    allowed: &[bool],
    fresh: &[bool],
    parent: &mut [Option<usize>],
    rho: &mut [usize],
    in_tree: &[bool],
    children: &mut [usize],
) -> bool {
    let total = w.len();
    let mut region = vec![false; total];
    let mut queue: VecDeque<usize> = (0..total).filter(|&k| targets[k] && !in_tree[k]).collect();
    for &k in &queue {
        region[k] = true;
    }
    let mut frontier = Vec::new();
    while let Some(v) = queue.pop_front() {
        for &u in w.edge_neighbors(v) {
            if in_tree[u] {
                if children[u] >= MAX_CHILDREN {
                    frontier.push(u);
                }
            } else if allowed[u] && !region[u] {
                region[u] = true;
                queue.push_back(u);
            }
        }
    }
    frontier.sort_unstable();
    frontier.dedup();
    for v in frontier {
        for c in (0..total).filter(|&c| parent[c] == Some(v) && fresh[c]) {
            for &p in w.edge_neighbors(c) {
                if p == v
                    || !in_tree[p]
                    || children[p] >= MAX_CHILDREN
                    || descends_from(parent, p, c)
                {
                    continue;
                }
                parent[c] = Some(p);
                children[v] -= 1;
                children[p] += 1;
                relabel_depths(parent, rho, in_tree, c);
                return true;
            }
        }
    }
    false
}

fn descends_from(parent: &[Option<usize>], mut v: usize, ancestor: usize) -> bool {
    loop {
        if v == ancestor {
            return true;
        }
        match parent[v] {
            Some(p) => v = p,
            None => return false,
        }
    }
}

/// Resets tree distances in the subtree hanging from `top`.
fn relabel_depths(parent: &[Option<usize>], rho: &mut [usize], in_tree: &[bool], top: usize) {
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); parent.len()];
    for (k, p) in parent.iter().enumerate() {
        if let (Some(p), true) = (p, in_tree[k]) {
            kids[*p].push(k);
        }
    }
    rho[top] = parent[top].map_or(0, |p| rho[p] + 1);
    let mut stack = vec![top];
    while let Some(v) = stack.pop() {
        for &c in &kids[v] {
            rho[c] = rho[v] + 1;
            stack.push(c);
        }
    }
}

/// Removes squares of `added` that are neither targets nor ancestors of one.
fn prune(
    added: &[usize],
    targets: &[bool],
    parent: &mut [Option<usize>],
    in_tree: &mut [bool],
    children: &mut [usize],
) {
    let mut keep = vec![false; parent.len()];
    for &k in added {
        if targets[k] {
            let mut v = k;
            while !keep[v] {
                keep[v] = true;
                match parent[v] {
                    Some(p) => v = p,
                    None => break,
                }
            }
        }
    }
    for &k in added {
        if !keep[k] {
            in_tree[k] = false;
            if let Some(p) = parent[k].take() {
                children[p] -= 1;
            }
        }
    }
}

fn lex_less(a: Point, b: Point) -> bool {
    a.x < b.x || (a.x == b.x && a.y < b.y)
}

/// Whether `p` is a vertex of the convex hull of `pts` (strictly extreme).
pub(crate) fn is_hull_vertex(pts: &[Point], p: Point) -> bool {
    let mut v: Vec<Point> = pts.to_vec();
    v.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    v.dedup();
    if v.len() < 3 {
        return v.contains(&p);
    }
    let cross =
        |o: Point, a: Point, b: Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(v.iter())
        } else {
            Box::new(v.iter().rev())
        };
        for &q in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0
            {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull.contains(&p)
}

/// Builds the layered spanning tree on the Whitney squares of the complementary
/// component that reaches the box border.
///
/// The layer unit is `D / A^2`, where `D` is the largest center distance among
/// those squares, so the admissible band of the first layer spans the box.
/// Layer `n` has family `{unit A^-n <= d <= unit A}`. First-layer vertices lie
/// in `[unit / A, unit A^2]`; later connectors reach down to the next family's
/// lower bound. When `n_max` is `None`
/// the layers continue until the family reaches the smallest square.
pub fn build_graph(w: &WhitneyDecomposition, a: f64, n_max: Option<u32>) -> Result<JohnGraph> {
    if !(a >= 2.0 && a.is_finite()) {
        return Err(Error::param("A", "layer constant must be at least 2"));
    }
    let outer = outer_squares(w)?;
    let d = &w.center_distance;
    let outer_list: Vec<usize> = (0..w.len()).filter(|&k| outer[k]).collect();
    if outer_list.is_empty() {
        return Err(Error::Geometry(
            "no Whitney square reaches the box border".into(),
        ));
    }
    let d_max = outer_list.iter().map(|&k| d[k]).fold(0.0, f64::max);
    let d_min = outer_list
        .iter()
        .map(|&k| d[k])
        .fold(f64::INFINITY, f64::min);
    let unit = d_max / (a * a);
    let n_max = match n_max {
        Some(m) => m,
        None => {
            let mut m = 0u32;
            while unit * a.powi(-(m as i32)) > d_min {
                m += 1;
            }
            m
        }
    };
    let family = |n: u32| -> LayerFamily {
        let lower = unit * a.powi(-(n as i32));
        let upper = unit * a;
        LayerFamily {
            n,
            lower,
            upper,
            members: outer_list
                .iter()
                .copied()
                .filter(|&k| lower <= d[k] && d[k] <= upper)
                .collect(),
        }
    };
    let layers: Vec<LayerFamily> = (0..=n_max).map(family).collect();

    let total = w.len();
    let n = 1usize << w.mask_level;

    // first layer: the family, plus squares with d >= unit enclosed by it
    let mut f0 = vec![false; total];
    for &k in &layers[0].members {
        f0[k] = true;
    }
    let outside_f0 = unbounded_complement(w, &f0);
    let mut targets = f0.clone();
    for &k in &outer_list {
        let (i0, j0, _) = w.pixel_block(k);
        if !f0[k] && d[k] >= unit && !outside_f0[j0 * n + i0] {
            targets[k] = true;
        }
    }
    if !targets.iter().any(|&t| t) {
        return Err(Error::Construction {
            layer: 0,
            reason: "first family is empty".into(),
        });
    }
    let allowed0: Vec<bool> = (0..total)
        .map(|k| outer[k] && d[k] >= unit / a && d[k] <= unit * a * a)
        .collect();

    // root: lexicographically smallest center of the first layer; connectors
    // never pass to its left, so it stays a hull vertex
    let root = lex_min(w, (0..total).filter(|&k| targets[k]));
    let zr = w.center(root);
    let right_of_root = |k: usize| !lex_less(w.center(k), zr);
    let allowed0: Vec<bool> = (0..total)
        .map(|k| allowed0[k] && (targets[k] || (right_of_root(k) && !w.touches_box_boundary(k))))
        .collect();
    let mut parent = vec![None; total];
    let mut rho = vec![0usize; total];
    let mut in_tree = vec![false; total];
    let mut children = vec![0usize; total];
    in_tree[root] = true;
    let added = grow(
        w,
        &targets,
        &allowed0,
        &mut parent,
        &mut rho,
        &mut in_tree,
        &mut children,
    );
    prune(&added, &targets, &mut parent, &mut in_tree, &mut children);
    if let Some(k) = (0..total).find(|&k| targets[k] && !in_tree[k]) {
        return Err(Error::Construction {
            layer: 0,
            reason: format!(
                "square {k} at ({:.6}, {:.6}) is not connected to the root",
                w.center(k).x,
                w.center(k).y
            ),
        });
    }

    // squares the later layers will not claim must not be sealed off from the
    // box border by graph squares; pockets join the first layer
    let lowest = layers[n_max as usize].lower;
    let claimed: Vec<bool> = (0..total)
        .map(|k| outer[k] && d[k] >= lowest && d[k] <= unit * a)
        .collect();
    loop {
        let blocked: Vec<bool> = (0..total).map(|k| in_tree[k] || claimed[k]).collect();
        let reach = far_field(w, &blocked);
        let pockets: Vec<bool> = (0..total)
            .map(|k| {
                let (i0, j0, _) = w.pixel_block(k);
                outer[k] && !blocked[k] && !reach[j0 * n + i0]
            })
            .collect();
        if !pockets.iter().any(|&p| p) {
            break;
        }
        for k in 0..total {
            targets[k] |= pockets[k];
        }
        let added = grow(
            w,
            &pockets,
            &allowed0,
            &mut parent,
            &mut rho,
            &mut in_tree,
            &mut children,
        );
        prune(&added, &targets, &mut parent, &mut in_tree, &mut children);
        if let Some(k) = (0..total).find(|&k| pockets[k] && !in_tree[k]) {
            return Err(Error::Construction {
                layer: 0,
                reason: format!("enclosed square {k} cannot be attached to the graph"),
            });
        }
    }
    let mut layer_of = vec![u32::MAX; total];
    for k in 0..total {
        if in_tree[k] {
            layer_of[k] = 0;
        }
    }
    let v0 = in_tree.clone();

    for layer in 1..=n_max {
        let lower_next = unit * a.powi(-(layer as i32 + 1));
        let mut tgt = vec![false; total];
        for &k in &layers[layer as usize].members {
            tgt[k] = true;
        }
        let allowed: Vec<bool> = (0..total)
            .map(|k| {
                outer[k]
                    && (v0[k] || (d[k] >= lower_next && d[k] <= unit * a))
                    && (tgt[k] || (right_of_root(k) && !w.touches_box_boundary(k)))
            })
            .collect();
        let added = grow(
            w,
            &tgt,
            &allowed,
            &mut parent,
            &mut rho,
            &mut in_tree,
            &mut children,
        );
        prune(&added, &tgt, &mut parent, &mut in_tree, &mut children);
        if let Some(&k) = layers[layer as usize]
            .members
            .iter()
            .find(|&&k| !in_tree[k])
        {
            return Err(Error::Construction {
                layer: layer as usize,
                reason: format!(
                    "square {k} at ({:.6}, {:.6}) is not connected to the previous layer",
                    w.center(k).x,
                    w.center(k).y
                ),
            });
        }
        for k in 0..total {
            if in_tree[k] && layer_of[k] == u32::MAX {
                layer_of[k] = layer;
            }
        }
    }

    let vertices: Vec<GraphVertex> = (0..total)
        .filter(|&k| in_tree[k])
        .map(|k| GraphVertex {
            square: k,
            parent: parent[k],
            rho: rho[k],
            layer: layer_of[k],
        })
        .collect();
    let mut g = JohnGraph {
        a,
        unit,
        n_max,
        root,
        vertices,
        layers,
        certificate: GraphCertificate {
            connected: false,
            acyclic: false,
            unique_outgoing: false,
            rho_consistent: false,
            edges_touch: false,
            admissible: false,
            nested: false,
            covers_layers: false,
            enclosure: false,
            proximity: Vec::new(),
            root_extreme: false,
            open_far_field: false,
            passed: false,
        },
    };
    g.certificate = certify(w, &g)?;
    Ok(g)
}

fn lex_min(w: &WhitneyDecomposition, it: impl Iterator<Item = usize>) -> usize {
    it.fold(None, |best: Option<usize>, k| match best {
        Some(b) if !lex_less(w.center(k), w.center(b)) => Some(b),
        _ => Some(k),
    })
    .expect("nonempty candidate set")
}

/// Pixels in the component of the box border of the complement of the union
/// of the flagged closed squares.
fn unbounded_complement(w: &WhitneyDecomposition, flagged: &[bool]) -> Vec<bool> {
    let n = 1usize << w.mask_level;
    let passable: Vec<bool> = w
        .labels
        .iter()
        .map(|&l| l == NONE || !flagged[l as usize])
        .collect();
    flood_fill(n, &passable, &border_cells(n), false)
}

/// Pixels joined to the box border through pixels of unflagged squares.
fn far_field(w: &WhitneyDecomposition, flagged: &[bool]) -> Vec<bool> {
    let n = 1usize << w.mask_level;
    let passable: Vec<bool> = w
        .labels
        .iter()
        .map(|&l| l != NONE && !flagged[l as usize])
        .collect();
    flood_fill(n, &passable, &border_cells(n), false)
}

/// Recomputes every structural property of `g` from scratch.
pub fn certify(w: &WhitneyDecomposition, g: &JohnGraph) -> Result<GraphCertificate> {
    let total = w.len();
    let idx = g.index(total);
    let nv = g.vertices.len();
    let d = &w.center_distance;

    let root_ok = g.vertices.iter().filter(|v| v.parent.is_none()).count() == 1
        && idx
            .get(g.root)
            .copied()
            .flatten()
            .map(|k| g.vertices[k].parent.is_none())
            == Some(true);
    let unique_outgoing = root_ok
        && g.vertices
            .iter()
            .all(|v| v.parent.is_none_or(|p| p != v.square && idx[p].is_some()));

    // acyclic and connected: following heads from any vertex ends at the root
    let mut state = vec![0u8; nv];
    let mut acyclic = unique_outgoing;
    if acyclic {
        for s in 0..nv {
            let mut path = Vec::new();
            let mut v = s;
            loop {
                if state[v] == 2 {
                    break;
                }
                if state[v] == 1 {
                    acyclic = false;
                    break;
                }
                state[v] = 1;
                path.push(v);
                match g.vertices[v].parent {
                    Some(p) => v = idx[p].unwrap(),
                    None => break,
                }
            }
            for p in path {
                state[p] = 2;
            }
            if !acyclic {
                break;
            }
        }
    }
    let connected = acyclic && nv > 0;

    let rho_consistent = unique_outgoing
        && g.vertices.iter().all(|v| match v.parent {
            Some(p) => g.vertices[idx[p].unwrap()].rho + 1 == v.rho,
            None => v.rho == 0,
        });
    let edges_touch = g.edges().iter().all(|&(a, b)| {
        w.edge_adjacency
            .binary_search(&(a.min(b), a.max(b)))
            .is_ok()
    });

    // nested graphs: every head enters no later than its tail
    let nested = unique_outgoing
        && g.vertices.iter().all(|v| match v.parent {
            Some(p) => g.vertices[idx[p].unwrap()].layer <= v.layer,
            None => v.layer == 0,
        });
    let covers_layers = g.layers.iter().all(|f| {
        f.members
            .iter()
            .all(|&k| idx[k].is_some_and(|i| g.vertices[i].layer <= f.n))
    });
    let top = g.unit * g.a;
    let admissible = g.vertices.iter().all(|v| {
        let dk = d[v.square];
        if v.layer == 0 {
            dk >= g.unit / g.a && dk <= g.unit * g.a * g.a
        } else {
            let lower_next = g.unit * g.a.powi(-(v.layer as i32 + 1));
            dk >= lower_next && dk <= top
        }
    });

    let mut f0 = vec![false; total];
    for &k in &g.layers[0].members {
        f0[k] = true;
    }
    let outside = unbounded_complement(w, &f0);
    let n = 1usize << w.mask_level;
    let outer = outer_squares(w)?;
    let enclosure = (0..total).all(|k| {
        let in_v0 = idx[k].is_some_and(|i| g.vertices[i].layer == 0);
        if !outer[k] || in_v0 || d[k] < g.unit {
            return true;
        }
        let (i0, j0, _) = w.pixel_block(k);
        outside[j0 * n + i0]
    });

    let proximity = if connected {
        (0..g.layers.len())
            .map(|l| layer_proximity(g, &idx, l as u32))
            .collect()
    } else {
        Vec::new()
    };

    let centers: Vec<Point> = g
        .vertices
        .iter()
        .filter(|v| v.layer == 0)
        .map(|v| w.center(v.square))
        .collect();
    let root_extreme = root_ok && is_hull_vertex(&centers, w.center(g.root));

    let in_graph: Vec<bool> = (0..total).map(|k| idx[k].is_some()).collect();
    let reach = far_field(w, &in_graph);
    let open_far_field = (0..total).all(|k| {
        let (i0, j0, _) = w.pixel_block(k);
        !outer[k] || in_graph[k] || reach[j0 * n + i0]
    });

    let passed = connected
        && acyclic
        && unique_outgoing
        && rho_consistent
        && edges_touch
        && admissible
        && nested
        && covers_layers
        && enclosure
        && root_extreme
        && open_far_field;
    Ok(GraphCertificate {
        connected,
        acyclic,
        unique_outgoing,
        rho_consistent,
        edges_touch,
        admissible,
        nested,
        covers_layers,
        enclosure,
        proximity,
        root_extreme,
        open_far_field,
        passed,
    })
}

/// Largest tree distance from a vertex of layer graph `l` to the family.
fn layer_proximity(g: &JohnGraph, idx: &[Option<usize>], l: u32) -> usize {
    let nv = g.vertices.len();
    let mut adj = vec![Vec::new(); nv];
    for (k, v) in g.vertices.iter().enumerate() {
        if v.layer > l {
            continue;
        }
        if let Some(p) = v.parent {
            let q = idx[p].unwrap();
            adj[k].push(q);
            adj[q].push(k);
        }
    }
    let mut dist = vec![usize::MAX; nv];
    let mut queue = std::collections::VecDeque::new();
    for &s in &g.layers[l as usize].members {
        if let Some(k) = idx[s] {
            dist[k] = 0;
            queue.push_back(k);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    g.vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| v.layer <= l)
        .map(|(k, _)| dist[k])
        .max()
        .unwrap_or(0)
}
