//! Linear solvers for the SIPG system and extremal generalized Rayleigh quotients.
//!
//! The direct solver is an envelope (skyline) `LDLᵀ` factorization on a reverse
//! Cuthill–McKee ordering. Rows with a zero diagonal, such as the border of the
//! zero-mean system, are moved to the second-to-last position so every leading
//! minor stays nonsingular even when the unbordered operator has a kernel.

use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, SparseSymmetricMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Direct,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub method: SolverMethod,
    /// Relative residual target of CG.
    pub tolerance: f64,
    /// CG iteration cap; `None` means `20 N`.
    pub max_iterations: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { method: SolverMethod::Direct, tolerance: 1e-12, max_iterations: None, preconditioner: Preconditioner::Diagonal }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::Config(format!("solver tolerance must lie in (0, 1), got {}", self.tolerance)));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::Config("solver needs at least one iteration".into()));
        }
        Ok(())
    }
}

/// Reverse Cuthill–McKee ordering of the matrix graph; `order[new] = old`.
pub fn rcm_ordering(a: &SparseSymmetricMatrix) -> Vec<usize> {
    rcm_ordering_excluding(a, &vec![false; a.dim()])
}

/// RCM ordering of the nodes not marked in `skip`.
fn rcm_ordering_excluding(a: &SparseSymmetricMatrix, skip: &[bool]) -> Vec<usize> {
    let n = a.dim();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let (cols, _) = a.row(i);
        for &j in cols {
            if j != i && !skip[i] && !skip[j] {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = skip.to_vec();
    let target = skip.iter().filter(|s| !**s).count();
    let mut order = Vec::with_capacity(target);
    while order.len() < target {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]).expect("unvisited node");
        let start = peripheral_node(&adj, seed);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    (level, last)
}

fn peripheral_node(adj: &[Vec<usize>], seed: usize) -> usize {
    let mut node = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let (level, far) = bfs_levels(adj, node);
        let e = level[far];
        if e <= ecc {
            break;
        }
        ecc = e;
        node = far;
    }
    node
}

/// Envelope `LDLᵀ` factorization with a fixed symmetric permutation.
#[derive(Debug, Clone)]
pub struct LdltFactorization {
    /// `order[new] = old`.
    order: Vec<usize>,
    /// First column of each row's envelope (in permuted numbering).
    first: Vec<usize>,
    /// Start of each row in `lower`.
    start: Vec<usize>,
    /// Strictly lower envelope entries of `L`, row by row.
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl LdltFactorization {
    pub fn new(a: &SparseSymmetricMatrix) -> Result<Self> {
        let n = a.dim();
        let diag_a = a.diagonal();
        let skip: Vec<bool> = diag_a.iter().map(|d| *d == 0.0).collect();
        let mut order = rcm_ordering_excluding(a, &skip);
        let zero_diag: Vec<usize> = (0..n).filter(|&i| skip[i]).collect();
        if !zero_diag.is_empty() {
            if order.is_empty() {
                return Err(Error::Solver("matrix has an empty diagonal".into()));
            }
            let last = order.pop().expect("nonempty");
            order.extend(zero_diag);
            order.push(last);
        }
        let mut inverse = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }

        // envelope structure in the permuted numbering
        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            let (cols, _) = a.row(i);
            for &j in cols {
                let (r, c) = (inverse[i].max(inverse[j]), inverse[i].min(inverse[j]));
                first[r] = first[r].min(c);
            }
        }
        let mut start = vec![0usize; n + 1];
        for r in 0..n {
            start[r + 1] = start[r] + (r - first[r]);
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (r, c) = (inverse[i].max(inverse[j]), inverse[i].min(inverse[j]));
                if r == c {
                    diag[r] += v;
                } else {
                    lower[start[r] + c - first[r]] += v;
                }
            }
        }

        let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs())).max(a.max_abs());
        for i in 0..n {
            let fi = first[i];
            // t_j = l_ij d_j, computed in place
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = lower[start[i] + j - fi];
                let row_i = &lower[start[i] + lo - fi..start[i] + j - fi];
                let row_j = &lower[start[j] + lo - fj..start[j] + j - fj];
                s -= row_i.iter().zip(row_j).map(|(a, b)| a * b).sum::<f64>();
                lower[start[i] + j - fi] = s;
            }
            let mut d = diag[i];
            for j in fi..i {
                let t = lower[start[i] + j - fi];
                let l = t / diag[j];
                d -= t * l;
                lower[start[i] + j - fi] = l;
            }
            if !d.is_finite() || d.abs() <= 1e-14 * scale {
                return Err(Error::Solver(format!("LDLᵀ breakdown at pivot {i} of {n} (d = {d:.3e})")));
            }
            diag[i] = d;
        }
        Ok(Self { order, first, start, lower, diag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Whether all pivots are positive, i.e. the matrix is positive definite.
    pub fn is_positive_definite(&self) -> bool {
        self.diag.iter().all(|d| *d > 0.0)
    }

    /// Number of stored envelope entries below the diagonal.
    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.order.iter().map(|&i| rhs[i]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            y[i] -= row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum::<f64>();
        }
        for i in 0..n {
            y[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            for (l, v) in row.iter().zip(&mut y[fi..i]) {
                *v -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.order.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

fn residual(a: &SparseSymmetricMatrix, x: &[f64], rhs: &[f64]) -> Vec<f64> {
    a.mul_vec(x).iter().zip(rhs).map(|(ax, b)| b - ax).collect()
}

/// Direct solve with one step of iterative refinement.
pub fn solve_direct(a: &SparseSymmetricMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let f = LdltFactorization::new(a)?;
    let mut x = f.solve(rhs);
    let r = residual(a, &x, rhs);
    let dx = f.solve(&r);
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    Ok(x)
}

/// Preconditioned conjugate gradients; rejects matrices with non-positive diagonal.
pub fn solve_cg(a: &SparseSymmetricMatrix, rhs: &[f64], settings: &SolverSettings) -> Result<Vec<f64>> {
    let n = a.dim();
    let diag = a.diagonal();
    if diag.iter().any(|d| *d <= 0.0) {
        return Err(Error::Solver("conjugate gradients need a positive definite system; use the direct method".into()));
    }
    let inv_diag: Vec<f64> = match settings.preconditioner {
        Preconditioner::Diagonal => diag.iter().map(|d| 1.0 / d).collect(),
        Preconditioner::None => vec![1.0; n],
    };
    let max_iter = settings.max_iterations.unwrap_or(20 * n.max(1));
    let b_norm = norm2(rhs);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Solver(format!("conjugate gradients hit non-positive curvature at iteration {it}")));
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        if norm2(&r) <= settings.tolerance * b_norm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver(format!(
        "conjugate gradients did not converge in {max_iter} iterations (relative residual {:.3e})",
        norm2(&r) / b_norm
    )))
}

/// Solves `A x = rhs` with the configured method.
pub fn solve(a: &SparseSymmetricMatrix, rhs: &[f64], settings: &SolverSettings) -> Result<Vec<f64>> {
    settings.validate()?;
    if rhs.len() != a.dim() {
        return Err(Error::Solver(format!("right-hand side has length {}, matrix has {}", rhs.len(), a.dim())));
    }
    match settings.method {
        SolverMethod::Direct => solve_direct(a, rhs),
        SolverMethod::Cg => solve_cg(a, rhs, settings),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Min,
    Max,
}

const RAYLEIGH_TOL: f64 = 1e-6;

/// Extreme eigenvalue of the pencil `A v = λ M v` with `M` positive definite.
///
/// Lanczos in the `M` inner product with full reorthogonalization. The largest
/// value is taken from `M⁻¹A`; the smallest from `A⁻¹M` when `A` is positive
/// definite, otherwise from the low end of `M⁻¹A`.
pub fn extremal_rayleigh(a: &SparseSymmetricMatrix, m: &SparseSymmetricMatrix, which: Extreme) -> Result<f64> {
    if a.dim() != m.dim() {
        return Err(Error::Estimation(format!("dimension mismatch {} vs {}", a.dim(), m.dim())));
    }
    let n = a.dim();
    if n == 0 {
        return Err(Error::Estimation("empty pencil".into()));
    }
    let mf = LdltFactorization::new(m)?;
    if !mf.is_positive_definite() {
        return Err(Error::Estimation("second matrix of the pencil is not positive definite".into()));
    }
    let start: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).sin()).collect();
    match which {
        Extreme::Max => {
            let (theta, _) = lanczos(n, &start, m, |v| mf.solve(&a.mul_vec(v)), true)?;
            Ok(theta)
        }
        Extreme::Min => {
            let af = LdltFactorization::new(a).ok().filter(|f| f.is_positive_definite());
            match af {
                Some(af) => {
                    let (mu, _) = lanczos(n, &start, m, |v| af.solve(&m.mul_vec(v)), true)?;
                    Ok(1.0 / mu)
                }
                None => {
                    let (theta, _) = lanczos(n, &start, m, |v| mf.solve(&a.mul_vec(v)), false)?;
                    Ok(theta)
                }
            }
        }
    }
}

/// Lanczos for an `M`-self-adjoint operator; returns the largest (or smallest)
/// Ritz value and the Krylov dimension used.
fn lanczos(
    n: usize,
    start: &[f64],
    m: &SparseSymmetricMatrix,
    op: impl Fn(&[f64]) -> Vec<f64>,
    largest: bool,
) -> Result<(f64, usize)> {
    let m_dot = |x: &[f64], y: &[f64]| dot(x, &m.mul_vec(y));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut m_basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let norm = m_dot(start, start).sqrt();
    let mut v: Vec<f64> = start.iter().map(|x| x / norm).collect();
    let max_dim = n.min(600);
    let mut previous = f64::NAN;
    loop {
        let mv = m.mul_vec(&v);
        let mut w = op(&v);
        let alpha = dot(&w, &mv);
        basis.push(v);
        m_basis.push(mv);
        alphas.push(alpha);
        // full reorthogonalization, twice for stability
        for _ in 0..2 {
            for (b, mb) in basis.iter().zip(&m_basis) {
                let c = dot(&w, mb);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let beta = m_dot(&w, &w).sqrt();
        let k = alphas.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let idx = (0..k)
            .max_by(|&i, &j| {
                let (a, b) = (eig.eigenvalues[i], eig.eigenvalues[j]);
                if largest {
                    a.total_cmp(&b)
                } else {
                    b.total_cmp(&a)
                }
            })
            .expect("nonempty");
        let theta = eig.eigenvalues[idx];
        let residual = beta * eig.eigenvectors[(k - 1, idx)].abs();
        let settled = (theta - previous).abs() <= 1e-3 * RAYLEIGH_TOL * theta.abs();
        if residual <= 1e-2 * RAYLEIGH_TOL * theta.abs()
            || (settled && residual <= 1e3 * RAYLEIGH_TOL * theta.abs())
            || k == n
            || beta <= 1e-300
        {
            return Ok((theta, k));
        }
        if k >= max_dim {
            return Err(Error::Estimation(format!(
                "Lanczos stagnated after {k} steps (residual {residual:.3e}, estimate {theta:.6e})"
            )));
        }
        previous = theta;
        betas.push(beta);
        v = w.iter().map(|x| x / beta).collect();
    }
}
