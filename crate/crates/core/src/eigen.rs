//! Smallest eigenpairs of symmetric operators.
//!
//! Small problems go through a dense symmetric eigendecomposition. Larger
//! ones use Lanczos with full reorthogonalization, locking one converged
//! eigenpair per run and deflating it from the next run; this finds repeated
//! eigenvalues that a single Krylov sequence would only see once.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::operator::{dot, norm, SymmetricOperator, DENSE_CAP};
use crate::rng::{domain, random_vector, Seed};

pub const DEFAULT_DENSE_TOL: f64 = 1e-8;
pub const DEFAULT_ITERATIVE_TOL: f64 = 1e-6;

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenMethod {
    Dense,
    Iterative,
}

/// Which path [`smallest_eigenpairs`] takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverChoice {
    /// Dense up to the dense cap, iterative above.
    #[default]
    Auto,
    Dense,
    Iterative,
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Residual tolerance; `None` picks the per-method default.
    pub tol: Option<f64>,
    pub dense_cap: usize,
    pub solver: SolverChoice,
    /// Total Lanczos steps; `None` means `50 k sqrt(n)`.
    pub max_iterations: Option<usize>,
    /// Seeds the random Lanczos start vectors.
    pub seed: Seed,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: None,
            dense_cap: DENSE_CAP,
            solver: SolverChoice::Auto,
            max_iterations: None,
            seed: Seed::default(),
        }
    }
}

impl EigenOptions {
    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn with_solver(mut self, solver: SolverChoice) -> Self {
        self.solver = solver;
        self
    }
}

/// Ascending eigenpairs with per-pair residuals `‖M u − λ u‖₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub method: EigenMethod,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Recomputes `‖M u_i − λ_i u_i‖₂` for every stored pair.
    pub fn recompute_residuals(&self, op: &dyn SymmetricOperator) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(&l, u)| residual(op, l, u))
            .collect()
    }
}

pub fn residual(op: &dyn SymmetricOperator, lambda: f64, u: &[f64]) -> f64 {
    let mu = op.apply_vec(u);
    mu.iter()
        .zip(u)
        .map(|(m, x)| (m - lambda * x).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Flips `v` so its largest-magnitude entry is positive. Entries within a
/// relative 1e-9 of the maximum count as ties; the lowest index wins.
pub fn canonicalize_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let cutoff = max * (1.0 - 1e-9);
    if let Some(&lead) = v.iter().find(|x| x.abs() >= cutoff) {
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// The `k` smallest eigenpairs of `op`.
///
/// Degenerate clusters get the basis described in [`align_clusters`] with
/// the all-ones vector as target.
pub fn smallest_eigenpairs(
    op: &dyn SymmetricOperator,
    k: usize,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    solve(op, k, opts, None)
}

/// Like [`smallest_eigenpairs`], for an operator whose smallest eigenvector
/// `known` is available exactly (the null vector of a Laplacian). The
/// iterative path deflates it up front; both paths return it as the first
/// vector of its eigenvalue cluster.
pub fn smallest_eigenpairs_with_known(
    op: &dyn SymmetricOperator,
    k: usize,
    known: &[f64],
    opts: &EigenOptions,
) -> Result<EigenResult> {
    if known.len() != op.dim() {
        return Err(Error::LengthMismatch {
            expected: op.dim(),
            actual: known.len(),
        });
    }
    solve(op, k, opts, Some(known))
}

fn solve(
    op: &dyn SymmetricOperator,
    k: usize,
    opts: &EigenOptions,
    known: Option<&[f64]>,
) -> Result<EigenResult> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must be in 1..={n}")));
    }
    let use_dense = match opts.solver {
        SolverChoice::Auto => n <= opts.dense_cap,
        SolverChoice::Dense => true,
        SolverChoice::Iterative => false,
    };
    let align = |r: &mut EigenResult| {
        align_clusters(r, &ones(n));
        if let Some(t) = known {
            align_clusters(r, t);
        }
    };
    if use_dense {
        let tol = opts.tol.unwrap_or(DEFAULT_DENSE_TOL);
        let mut full = dense_eigen(op, opts.dense_cap)?;
        align(&mut full);
        let mut out = truncate(full, k);
        out.residuals = out.recompute_residuals(op);
        let worst = out.residuals.iter().copied().fold(0.0, f64::max);
        if worst > tol {
            return Err(Error::NonConvergence {
                iterations: 0,
                best_residual: worst,
            });
        }
        Ok(out)
    } else {
        let tol = opts.tol.unwrap_or(DEFAULT_ITERATIVE_TOL);
        if tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tol = {tol} must be positive")));
        }
        let cap = opts
            .max_iterations
            .unwrap_or_else(|| (50.0 * k as f64 * (n as f64).sqrt()).ceil() as usize);
        let prelocked: Vec<Vec<f64>> = known
            .map(|t| {
                let tn = norm(t);
                t.iter().map(|x| x / tn).collect()
            })
            .into_iter()
            .collect();
        let mut out = lanczos_locked(op, k, tol, cap, opts.seed, &prelocked)?;
        align(&mut out);
        out.residuals = out.recompute_residuals(op);
        Ok(out)
    }
}

fn ones(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

/// Gives every degenerate cluster of `r` a deterministic basis: the first
/// vector is the normalized projection of `target` onto the cluster span,
/// the rest complete it by Gram-Schmidt over the original vectors.
/// Clusters that `target` barely touches are left alone.
pub fn align_clusters(r: &mut EigenResult, target: &[f64]) {
    let tn = norm(target);
    if tn == 0.0 {
        return;
    }
    let mut start = 0;
    while start < r.len() {
        let mut end = start + 1;
        while end < r.len() && r.values[end] - r.values[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start >= 2 {
            align_one(&mut r.vectors[start..end], target, tn);
        }
        start = end;
    }
}

fn align_one(cluster: &mut [Vec<f64>], target: &[f64], tn: f64) {
    let coeffs: Vec<f64> = cluster.iter().map(|u| dot(u, target) / tn).collect();
    let cn = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    if cn < 1e-6 {
        return;
    }
    let n = target.len();
    let mut first = vec![0.0; n];
    for (c, u) in coeffs.iter().zip(cluster.iter()) {
        axpy(c / cn, u, &mut first);
    }
    let fnorm = norm(&first);
    first.iter_mut().for_each(|x| *x /= fnorm);
    // Residual norms of each original vector after removing `first`; the
    // one with the smallest residual is the dependent direction to drop.
    let mut rest: Vec<Vec<f64>> = cluster
        .iter()
        .map(|u| {
            let mut w = u.clone();
            let c = dot(&w, &first);
            axpy(-c, &first, &mut w);
            w
        })
        .collect();
    let drop = rest
        .iter()
        .enumerate()
        .min_by(|a, b| norm(a.1).total_cmp(&norm(b.1)))
        .map(|(i, _)| i)
        .unwrap();
    rest.remove(drop);
    let mut basis = vec![first];
    for mut w in rest {
        orthogonalize(&mut w, basis.iter());
        let wn = norm(&w);
        w.iter_mut().for_each(|x| *x /= wn);
        basis.push(w);
    }
    for (slot, mut v) in cluster.iter_mut().zip(basis) {
        canonicalize_sign(&mut v);
        *slot = v;
    }
}

/// Full spectrum by dense decomposition; residuals are recomputed through `op`.
pub fn dense_oracle(op: &dyn SymmetricOperator) -> Result<EigenResult> {
    let mut out = dense_eigen(op, DENSE_CAP)?;
    out.residuals = out.recompute_residuals(op);
    Ok(out)
}

/// Dense symmetric decomposition of a materialized matrix, ascending and
/// sign-canonical, residuals left empty.
pub fn dense_eigen_matrix(m: DMatrix<f64>) -> EigenResult {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            canonicalize_sign(&mut v);
            v
        })
        .collect();
    EigenResult {
        values,
        vectors,
        residuals: Vec::new(),
        method: EigenMethod::Dense,
    }
}

fn dense_eigen(op: &dyn SymmetricOperator, cap: usize) -> Result<EigenResult> {
    Ok(dense_eigen_matrix(op.dense(cap)?))
}

fn truncate(mut r: EigenResult, k: usize) -> EigenResult {
    r.values.truncate(k);
    r.vectors.truncate(k);
    r.residuals.truncate(k);
    r
}

fn lanczos_locked(
    op: &dyn SymmetricOperator,
    k: usize,
    tol: f64,
    cap: usize,
    seed: Seed,
    prelocked: &[Vec<f64>],
) -> Result<EigenResult> {
    let mut rng = seed.rng(domain::EIGEN_START);
    let mut budget = cap;
    let mut locked: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for u in prelocked.iter().take(k) {
        let mu = op.apply_vec(u);
        let lambda = dot(u, &mu);
        values.push(lambda);
        residuals.push(residual(op, lambda, u));
        let mut u = u.clone();
        canonicalize_sign(&mut u);
        locked.push(u);
    }
    while locked.len() < k {
        let (lambda, u, r) = lanczos_smallest(op, &locked, tol, &mut budget, cap, &mut rng)?;
        values.push(lambda);
        residuals.push(r);
        locked.push(u);
    }
    // Locking returns ascending values up to rounding; make it exact.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok(EigenResult {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: order.iter().map(|&i| locked[i].clone()).collect(),
        residuals: order.iter().map(|&i| residuals[i]).collect(),
        method: EigenMethod::Iterative,
    })
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Two passes of classical Gram-Schmidt against every vector in `against`.
fn orthogonalize<'a, I>(w: &mut [f64], against: I)
where
    I: Iterator<Item = &'a Vec<f64>> + Clone,
{
    for _ in 0..2 {
        for q in against.clone() {
            let c = dot(w, q);
            axpy(-c, q, w);
        }
    }
}

/// Random unit vector orthogonal to `locked` and `basis`, if one is left.
fn fresh_vector<R: rand::Rng>(
    rng: &mut R,
    n: usize,
    locked: &[Vec<f64>],
    basis: &[Vec<f64>],
) -> Option<Vec<f64>> {
    for _ in 0..4 {
        let mut v = random_vector(rng, n);
        let before = norm(&v);
        orthogonalize(&mut v, locked.iter().chain(basis.iter()));
        let after = norm(&v);
        if after > 1e-8 * before {
            v.iter_mut().for_each(|x| *x /= after);
            return Some(v);
        }
    }
    None
}

/// Smallest eigenpair of `op` restricted to the complement of `locked`.
fn lanczos_smallest<R: rand::Rng>(
    op: &dyn SymmetricOperator,
    locked: &[Vec<f64>],
    tol: f64,
    budget: &mut usize,
    cap: usize,
    rng: &mut R,
) -> Result<(f64, Vec<f64>, f64)> {
    let n = op.dim();
    let max_dim = n - locked.len();
    let mut best = f64::INFINITY;
    let exhausted = |best: f64| Error::NonConvergence {
        iterations: cap,
        best_residual: best,
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = fresh_vector(rng, n, locked, &basis).ok_or_else(|| exhausted(best))?;
    let mut w = vec![0.0; n];
    let mut scale = 0.0f64;
    let mut next_check = 8.min(max_dim);
    loop {
        if *budget == 0 {
            return Err(exhausted(best));
        }
        *budget -= 1;
        op.apply(&v, &mut w);
        let a = dot(&w, &v);
        basis.push(std::mem::take(&mut v));
        orthogonalize(&mut w, locked.iter().chain(basis.iter()));
        alpha.push(a);
        let b = norm(&w);
        scale = scale.max(a.abs() + b + beta.last().copied().unwrap_or(0.0));
        let j = basis.len();
        let full = j >= max_dim;
        let breakdown = b <= 1e-12 * scale.max(1e-300);

        if j >= next_check || full || breakdown {
            let (theta, s) = smallest_ritz(&alpha, &beta);
            let estimate = if full || breakdown { 0.0 } else { b * s[j - 1].abs() };
            if estimate <= 0.5 * tol {
                let mut u = vec![0.0; n];
                for (si, q) in s.iter().zip(&basis) {
                    axpy(*si, q, &mut u);
                }
                orthogonalize(&mut u, locked.iter());
                let un = norm(&u);
                u.iter_mut().for_each(|x| *x /= un);
                let mu = op.apply_vec(&u);
                let rayleigh = dot(&u, &mu);
                let lambda = if rayleigh.is_finite() { rayleigh } else { theta };
                let r = mu
                    .iter()
                    .zip(&u)
                    .map(|(m, x)| (m - lambda * x).powi(2))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(r);
                if r <= tol {
                    canonicalize_sign(&mut u);
                    return Ok((lambda, u, r));
                }
            }
            if full {
                return Err(exhausted(best));
            }
            next_check = j + (j / 8).max(4);
        }

        if breakdown {
            match fresh_vector(rng, n, locked, &basis) {
                Some(fresh) => {
                    beta.push(0.0);
                    v = fresh;
                }
                None => return Err(exhausted(best)),
            }
        } else {
            beta.push(b);
            v = w.iter().map(|x| x / b).collect();
        }
    }
}

/// Smallest eigenpair of the symmetric tridiagonal matrix `(alpha, beta)`.
fn smallest_ritz(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let j = alpha.len();
    let mut t = DMatrix::zeros(j, j);
    for i in 0..j {
        t[(i, i)] = alpha[i];
        if i + 1 < j {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (imin, theta) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty tridiagonal");
    (theta, eig.eigenvectors.column(imin).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, MatrixKind};
    use crate::operator::{matrix, DenseOperator};

    fn k4() -> Graph {
        Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn two_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]).unwrap()
    }

    #[test]
    fn complete_graph_pairs() {
        let g = k4();
        let l = matrix(&g, MatrixKind::UnnormalizedLaplacian).unwrap();
        for solver in [SolverChoice::Dense, SolverChoice::Iterative] {
            let opts = EigenOptions::default().with_solver(solver).with_tol(1e-9);
            let r = smallest_eigenpairs(&l, 2, &opts).unwrap();
            assert!(r.values[0].abs() < 1e-9);
            assert!((r.values[1] - 4.0).abs() < 1e-9);
            for x in &r.vectors[0] {
                assert!((x - 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn disconnected_components_give_indicator() {
        let g = two_triangles();
        let l = matrix(&g, MatrixKind::UnnormalizedLaplacian).unwrap();
        let r = smallest_eigenpairs(&l, 2, &EigenOptions::default()).unwrap();
        assert!(r.values[1].abs() < 1e-9);
        // λ1 = λ2 = 0: the pair spans the component indicators; the dense
        // path returns some basis of that plane, which we check spans it.
        let ind = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0].map(|x: f64| x / 6f64.sqrt());
        let proj: f64 = r.vectors.iter().map(|u| dot(u, &ind).powi(2)).sum();
        assert!((proj - 1.0).abs() < 1e-9);
    }

    #[test]
    fn path_spectrum() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let l = matrix(&g, MatrixKind::UnnormalizedLaplacian).unwrap();
        for solver in [SolverChoice::Dense, SolverChoice::Iterative] {
            let opts = EigenOptions::default().with_solver(solver).with_tol(1e-9);
            let r = smallest_eigenpairs(&l, 3, &opts).unwrap();
            for (got, want) in r.values.iter().zip([0.0, 1.0, 3.0]) {
                assert!((got - want).abs() < 1e-9, "{solver:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn dense_oracle_small_cases() {
        let one = DenseOperator(DMatrix::from_element(1, 1, 3.5));
        let r = dense_oracle(&one).unwrap();
        assert_eq!(r.values, vec![3.5]);
        assert_eq!(r.vectors, vec![vec![1.0]]);

        let swap = DenseOperator(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let r = dense_oracle(&swap).unwrap();
        assert!((r.values[0] + 1.0).abs() < 1e-12 && (r.values[1] - 1.0).abs() < 1e-12);

        let c4 = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let l = matrix(&c4, MatrixKind::UnnormalizedLaplacian).unwrap();
        let r = dense_oracle(&l).unwrap();
        // Cycle eigenvalues 2 - 2cos(2πj/4), sorted.
        for (got, want) in r.values.iter().zip([0.0, 2.0, 2.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(r.residuals.iter().all(|&x| x <= 1e-9));
    }

    #[test]
    fn dense_over_cap_rejected() {
        let g = Graph::from_edges(DENSE_CAP + 2, [(0, 1)]).unwrap();
        let l = matrix(&g, MatrixKind::UnnormalizedLaplacian).unwrap();
        assert!(matches!(
            dense_oracle(&l),
            Err(Error::DimensionOverCap { .. })
        ));
    }

    #[test]
    fn canonical_sign_rules() {
        let mut v = vec![0.1, -0.9, 0.3];
        canonicalize_sign(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
        let mut tie = vec![-0.5, 0.5, 0.1];
        canonicalize_sign(&mut tie);
        assert_eq!(tie, vec![0.5, -0.5, -0.1]);
        let again = {
            let mut t = tie.clone();
            canonicalize_sign(&mut t);
            t
        };
        assert_eq!(again, tie);
    }

    #[test]
    fn iterative_reports_honest_residuals() {
        let edges: Vec<_> = (0..40).map(|i| (i, (i + 1) % 40)).chain((0..40).map(|i| (i, (i + 7) % 40))).collect();
        let g = Graph::from_edges(40, edges).unwrap();
        let l = matrix(&g, MatrixKind::UnnormalizedLaplacian).unwrap();
        let opts = EigenOptions::default().with_solver(SolverChoice::Iterative);
        let r = smallest_eigenpairs(&l, 3, &opts).unwrap();
        let again = r.recompute_residuals(&l);
        for (a, b) in r.residuals.iter().zip(&again) {
            assert!((a - b).abs() <= 1e-12);
            assert!(*a <= DEFAULT_ITERATIVE_TOL);
        }
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let edges: Vec<_> = (0..60).map(|i| (i, (i + 1) % 60)).collect();
        let g = Graph::from_edges(60, edges).unwrap();
        let l = matrix(&g, MatrixKind::UnnormalizedLaplacian).unwrap();
        let opts = EigenOptions {
            max_iterations: Some(3),
            solver: SolverChoice::Iterative,
            ..EigenOptions::default()
        };
        assert!(matches!(
            smallest_eigenpairs(&l, 2, &opts),
            Err(Error::NonConvergence { .. })
        ));
    }
}
