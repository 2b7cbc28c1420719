//! Conjugate gradients for the 5-point graph Laplacian on a masked square
//! grid, preconditioned by an aggregation multigrid V-cycle.

/// Symmetric grid operator `(A x)_k = diag_k x_k - sum_{free nbr} w x_nbr`
/// acting on the free nodes of an `n x n` grid.
#[derive(Clone, Debug)]
struct Level {
    n: usize,
    free: Vec<bool>,
    diag: Vec<f64>,
    /// Coupling between node `k` and its east neighbour `k + 1`.
    east: Vec<f64>,
    /// Coupling between node `k` and its north neighbour `k + n`.
    north: Vec<f64>,
}

impl Level {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        for k in 0..n * n {
            if !self.free[k] {
                y[k] = 0.0;
                continue;
            }
            let (i, j) = (k % n, k / n);
            let mut s = self.diag[k] * x[k];
            if i + 1 < n {
                s -= self.east[k] * x[k + 1];
            }
            if i > 0 {
                s -= self.east[k - 1] * x[k - 1];
            }
            if j + 1 < n {
                s -= self.north[k] * x[k + n];
            }
            if j > 0 {
                s -= self.north[k - n] * x[k - n];
            }
            y[k] = s;
        }
    }

    fn off_sum(&self, x: &[f64], k: usize) -> f64 {
        let n = self.n;
        let (i, j) = (k % n, k / n);
        let mut s = 0.0;
        if i + 1 < n {
            s += self.east[k] * x[k + 1];
        }
        if i > 0 {
            s += self.east[k - 1] * x[k - 1];
        }
        if j + 1 < n {
            s += self.north[k] * x[k + n];
        }
        if j > 0 {
            s += self.north[k - n] * x[k - n];
        }
        s
    }

    fn gauss_seidel(&self, b: &[f64], x: &mut [f64], forward: bool) {
        let m = self.n * self.n;
        let mut step = |k: usize| {
            if self.free[k] && self.diag[k] > 0.0 {
                x[k] = (b[k] + self.off_sum(x, k)) / self.diag[k];
            }
        };
        if forward {
            (0..m).for_each(&mut step);
        } else {
            (0..m).rev().for_each(&mut step);
        }
    }

    /// Galerkin coarsening with 2 x 2 piecewise-constant aggregates.
    fn coarsen(&self) -> Level {
        let (n, m) = (self.n, self.n / 2);
        let mut free = vec![false; m * m];
        let mut diag = vec![0.0; m * m];
        let mut east = vec![0.0; m * m];
        let mut north = vec![0.0; m * m];
        for k in 0..n * n {
            if !self.free[k] {
                continue;
            }
            let (i, j) = (k % n, k / n);
            let c = (j / 2) * m + i / 2;
            free[c] = true;
            diag[c] += self.diag[k];
            if i + 1 < n && self.free[k + 1] && self.east[k] != 0.0 {
                if i % 2 == 0 {
                    diag[c] -= 2.0 * self.east[k];
                } else {
                    east[c] += self.east[k];
                }
            }
            if j + 1 < n && self.free[k + n] && self.north[k] != 0.0 {
                if j % 2 == 0 {
                    diag[c] -= 2.0 * self.north[k];
                } else {
                    north[c] += self.north[k];
                }
            }
        }
        Level {
            n: m,
            free,
            diag,
            east,
            north,
        }
    }
}

/// Multigrid hierarchy used as a symmetric preconditioner.
struct Hierarchy {
    levels: Vec<Level>,
}

/// Scaling of the coarse correction; compensates for the energy of
/// piecewise-constant interpolation being too large.
const COARSE_WEIGHT: f64 = 1.8;

impl Hierarchy {
    fn new(fine: Level) -> Self {
        let mut levels = vec![fine];
        loop {
            let last = levels.last().unwrap();
            if last.n <= 4 || last.free.iter().filter(|&&f| f).count() <= 16 {
                break;
            }
            let next = last.coarsen();
            levels.push(next);
        }
        Hierarchy { levels }
    }

    fn vcycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let lev = &self.levels[l];
        let m = lev.n * lev.n;
        x.fill(0.0);
        if l + 1 == self.levels.len() {
            for _ in 0..40 {
                lev.gauss_seidel(b, x, true);
                lev.gauss_seidel(b, x, false);
            }
            return;
        }
        lev.gauss_seidel(b, x, true);
        let mut ax = vec![0.0; m];
        lev.apply(x, &mut ax);
        let coarse = &self.levels[l + 1];
        let mut rc = vec![0.0; coarse.n * coarse.n];
        let n = lev.n;
        for k in 0..m {
            if lev.free[k] {
                rc[(k / n / 2) * coarse.n + (k % n) / 2] += b[k] - ax[k];
            }
        }
        let mut ec = vec![0.0; coarse.n * coarse.n];
        self.vcycle(l + 1, &rc, &mut ec);
        for k in 0..m {
            if lev.free[k] {
                x[k] += COARSE_WEIGHT * ec[(k / n / 2) * coarse.n + (k % n) / 2];
            }
        }
        lev.gauss_seidel(b, x, false);
    }
}

/// Outcome of a linear solve.
#[derive(Clone, Debug)]
pub(crate) struct SolveStats {
    pub iterations: usize,
    /// Max-norm of the final residual.
    pub residual: f64,
}

/// Solves the discrete Dirichlet problem on an `n x n` grid.
///
/// `fixed[k]` holds the prescribed value of a boundary node, `free[k]` marks
/// unknowns; all other nodes are inactive (their edges are dropped, which is
/// a zero-flux condition). `x` is updated in place on the free nodes, starting
/// from its current values. Returns once the max-norm residual is below `tol`.
pub(crate) fn solve_dirichlet(
    n: usize,
    free: &[bool],
    fixed: &[Option<f64>],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> SolveStats {
    let m = n * n;
    let mut diag = vec![0.0; m];
    let mut east = vec![0.0; m];
    let mut north = vec![0.0; m];
    let mut b = vec![0.0; m];
    let active = |k: usize| free[k] || fixed[k].is_some();
    for k in 0..m {
        let (i, j) = (k % n, k / n);
        let link = |q: usize, diag: &mut [f64], b: &mut [f64]| {
            // edge k - q with unit weight
            if free[k] && active(q) {
                diag[k] += 1.0;
                if let Some(v) = fixed[q] {
                    b[k] += v;
                }
            }
        };
        if i + 1 < n {
            link(k + 1, &mut diag, &mut b);
            if free[k] && free[k + 1] {
                east[k] = 1.0;
            }
        }
        if i > 0 {
            link(k - 1, &mut diag, &mut b);
        }
        if j + 1 < n {
            link(k + n, &mut diag, &mut b);
            if free[k] && free[k + n] {
                north[k] = 1.0;
            }
        }
        if j > 0 {
            link(k - n, &mut diag, &mut b);
        }
    }
    let fine = Level {
        n,
        free: free.to_vec(),
        diag,
        east,
        north,
    };

    let max_norm = |v: &[f64]| v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let mut ax = vec![0.0; m];
    fine.apply(x, &mut ax);
    let mut r: Vec<f64> = (0..m)
        .map(|k| if free[k] { b[k] - ax[k] } else { 0.0 })
        .collect();
    if max_norm(&r) <= tol {
        return SolveStats {
            iterations: 0,
            residual: max_norm(&r),
        };
    }
    let hierarchy = Hierarchy::new(fine);
    let fine = &hierarchy.levels[0];
    let mut z = vec![0.0; m];
    hierarchy.vcycle(0, &r, &mut z);
    let mut p = z.clone();
    let mut rz: f64 = dot(&r, &z);
    let mut ap = vec![0.0; m];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        fine.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for k in 0..m {
            if free[k] {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
        }
        if max_norm(&r) <= tol {
            // recompute the true residual to guard against drift
            fine.apply(x, &mut ax);
            for k in 0..m {
                r[k] = if free[k] { b[k] - ax[k] } else { 0.0 };
            }
            if max_norm(&r) <= tol {
                break;
            }
        }
        hierarchy.vcycle(0, &r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..m {
            p[k] = z[k] + beta * p[k];
        }
    }
    SolveStats {
        iterations,
        residual: max_norm(&r),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense Gaussian elimination on the free nodes, as an oracle.
    fn dense(n: usize, free: &[bool], fixed: &[Option<f64>]) -> Vec<f64> {
        let idx: Vec<usize> = (0..n * n).filter(|&k| free[k]).collect();
        let pos = |k: usize| idx.iter().position(|&q| q == k);
        let m = idx.len();
        let mut a = vec![vec![0.0; m + 1]; m];
        for (r, &k) in idx.iter().enumerate() {
            let (i, j) = ((k % n) as i64, (k / n) as i64);
            for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (x, y) = (i + di, j + dj);
                if x < 0 || y < 0 || x >= n as i64 || y >= n as i64 {
                    continue;
                }
                let q = (y * n as i64 + x) as usize;
                if free[q] {
                    a[r][r] += 1.0;
                    a[r][pos(q).unwrap()] -= 1.0;
                } else if let Some(v) = fixed[q] {
                    a[r][r] += 1.0;
                    a[r][m] += v;
                }
            }
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
                .unwrap();
            a.swap(c, p);
            for r in 0..m {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for cc in c..=m {
                        a[r][cc] -= f * a[c][cc];
                    }
                }
            }
        }
        let mut out = vec![f64::NAN; n * n];
        for (r, &k) in idx.iter().enumerate() {
            out[k] = a[r][m] / a[r][r];
        }
        out
    }

    #[test]
    fn matches_dense_solve_on_irregular_domain() {
        let n = 16;
        let mut free = vec![false; n * n];
        let mut fixed = vec![None; n * n];
        for k in 0..n * n {
            let (i, j) = (k % n, k / n);
            let on_edge = i == 0 || j == 0 || i == n - 1 || j == n - 1;
            if on_edge {
                fixed[k] = Some((i as f64 * 0.3).sin() + j as f64 * 0.1);
            } else if (i * 7 + j * 3) % 11 == 0 {
                // holes: inactive nodes
            } else if i == 8 && j == 8 {
                fixed[k] = Some(5.0);
            } else {
                free[k] = true;
            }
        }
        let mut x = vec![0.0; n * n];
        let stats = solve_dirichlet(n, &free, &fixed, &mut x, 1e-12, 500);
        assert!(stats.residual <= 1e-12);
        let oracle = dense(n, &free, &fixed);
        for k in 0..n * n {
            if free[k] {
                assert!(
                    (x[k] - oracle[k]).abs() < 1e-9,
                    "{k}: {} vs {}",
                    x[k],
                    oracle[k]
                );
            }
        }
    }

    #[test]
    fn converges_quickly_on_large_grid() {
        let n = 256;
        let mut free = vec![false; n * n];
        let mut fixed = vec![None; n * n];
        for k in 0..n * n {
            let (i, j) = (k % n, k / n);
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                fixed[k] = Some(if i == 0 { 1.0 } else { 0.0 });
            } else {
                free[k] = true;
            }
        }
        let mut x = vec![0.0; n * n];
        let stats = solve_dirichlet(n, &free, &fixed, &mut x, 1e-8, 1000);
        assert!(stats.residual <= 1e-8);
        assert!(stats.iterations < 100, "{} iterations", stats.iterations);
    }
}
