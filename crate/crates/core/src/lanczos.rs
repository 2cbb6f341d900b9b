//! Lanczos tridiagonalization and Gauss quadrature.
//!
//! [`lanczos_tridiagonalize`] reduces a symmetric operator to a small
//! tridiagonal matrix `T` from a unit start vector `q0`. The eigenvalues of
//! `T` and the squared first components of its eigenvectors form the Gauss
//! rule for the spectral measure of `q0`:
//!
//! ```text
//! q0ᵀ f(M) q0 ≈ Σ_k τ_k² f(θ_k)
//! ```
//!
//! which is exact for polynomials of degree `≤ 2s' - 1`.
//!
//! The module also provides an extremal-eigenvalue solver built on the same
//! recurrence, and a dense eigensolver used as the exact reference for
//! small graphs.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph_io::Graph;
use crate::numeric::{axpy, dot, norm2};
use crate::operators::{degrees, LinearOperator, OperatorKind};

/// Relative breakdown threshold on `β`, scaled by the spectral radius bound.
pub const BREAKDOWN_TOL: f64 = 1e-12;

/// Default vertex cap for [`dense_spectrum`].
pub const DENSE_CAP: usize = 20_000;

/// Symmetric tridiagonal matrix produced by Lanczos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tridiagonal {
    pub alpha: Vec<f64>,
    /// Off-diagonal, one shorter than `alpha`.
    pub beta: Vec<f64>,
}

impl Tridiagonal {
    /// Achieved number of steps `s'`.
    pub fn steps(&self) -> usize {
        self.alpha.len()
    }
}

/// Gauss quadrature rule: ascending nodes and nonnegative weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// `Σ_k w_k f(θ_k)`, accumulated in ascending node order.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix together with selected rows
/// of its eigenvector matrix.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `rows[r][k]` is component `tracked[r]` of the eigenvector for `values[k]`.
    pub rows: Vec<Vec<f64>>,
}

/// Implicit-shift QL on a symmetric tridiagonal matrix.
///
/// Only the requested rows of the orthogonal eigenvector matrix are
/// accumulated, so the cost is `O(s²)` for a fixed number of rows.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], tracked: &[usize]) -> Result<TridiagonalEigen> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut z: Vec<Vec<f64>> = tracked
        .iter()
        .map(|&r| {
            let mut row = vec![0.0; n];
            row[r] = 1.0;
            row
        })
        .collect();

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let fail = || Error::EigenNonConvergence {
        alpha: diag.to_vec(),
        beta: off.to_vec(),
    };
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(fail());
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in z.iter_mut() {
                        let h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(e[l].abs() > eps * tst1) {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(fail());
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok(TridiagonalEigen {
        values: order.iter().map(|&k| d[k]).collect(),
        rows: z
            .iter()
            .map(|row| order.iter().map(|&k| row[k]).collect())
            .collect(),
    })
}

/// Result of a Lanczos run that retained its basis.
#[derive(Debug, Clone)]
pub struct LanczosDecomposition {
    pub tridiagonal: Tridiagonal,
    /// Orthonormal Lanczos vectors `q_0 … q_{s'-1}`.
    pub basis: Vec<Vec<f64>>,
    /// Unnormalized residual after the last step (`β_{s'} q_{s'}`).
    pub residual: Vec<f64>,
}

fn check_start<O: LinearOperator + ?Sized>(op: &O, q0: &[f64], s: usize) -> Result<()> {
    let n = op.dim();
    if q0.len() != n {
        return Err(Error::InvalidArgument(format!(
            "start vector has length {}, operator dimension is {n}",
            q0.len()
        )));
    }
    if s < 1 || s > n {
        return Err(Error::InvalidArgument(format!("step budget {s} outside [1, {n}]")));
    }
    let norm = norm2(q0);
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("start vector norm {norm} is not 1")));
    }
    Ok(())
}

/// Entries per block when sweeping the basis, sized to stay in L1.
const SWEEP_BLOCK: usize = 1024;

/// One classical Gram-Schmidt pass, sweeping `w` block by block so it stays
/// in cache while the basis streams past.
fn gram_schmidt_pass(basis: &[Vec<f64>], w: &mut [f64], coeffs: &mut [f64]) {
    coeffs.iter_mut().for_each(|c| *c = 0.0);
    for start in (0..w.len()).step_by(SWEEP_BLOCK) {
        let end = (start + SWEEP_BLOCK).min(w.len());
        for (c, b) in coeffs.iter_mut().zip(basis) {
            *c += dot(&b[start..end], &w[start..end]);
        }
    }
    for start in (0..w.len()).step_by(SWEEP_BLOCK) {
        let end = (start + SWEEP_BLOCK).min(w.len());
        for (c, b) in coeffs.iter().zip(basis) {
            axpy(-c, &b[start..end], &mut w[start..end]);
        }
    }
}

/// Classical Gram-Schmidt with the DGKS test: a second pass runs only when
/// the first removed more than `1 - 1/√2` of the norm.
fn reorthogonalize(basis: &[Vec<f64>], w: &mut [f64]) {
    if basis.is_empty() {
        return;
    }
    let mut coeffs = vec![0.0; basis.len()];
    let before = norm2(w);
    gram_schmidt_pass(basis, w, &mut coeffs);
    if norm2(w) < std::f64::consts::FRAC_1_SQRT_2 * before {
        gram_schmidt_pass(basis, w, &mut coeffs);
    }
}

fn run_lanczos<O: LinearOperator + ?Sized>(
    op: &O,
    q0: &[f64],
    s: usize,
    reorth: bool,
) -> (Tridiagonal, Vec<Vec<f64>>, Vec<f64>) {
    let n = op.dim();
    let tol = BREAKDOWN_TOL * op.spectral_radius_bound();
    let mut alpha = Vec::with_capacity(s);
    let mut beta: Vec<f64> = Vec::with_capacity(s.saturating_sub(1));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut q = q0.to_vec();
    let mut q_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    if reorth {
        basis.push(q.clone());
    }
    for j in 0..s {
        op.apply(&q, &mut w);
        if let Some(&b) = beta.last() {
            axpy(-b, &q_prev, &mut w);
        }
        let a = dot(&q, &w);
        axpy(-a, &q, &mut w);
        alpha.push(a);
        if reorth {
            reorthogonalize(&basis, &mut w);
        }
        if j + 1 == s {
            break;
        }
        let b = norm2(&w);
        if b <= tol {
            break;
        }
        beta.push(b);
        std::mem::swap(&mut q_prev, &mut q);
        for (qi, wi) in q.iter_mut().zip(&w) {
            *qi = wi / b;
        }
        if reorth {
            basis.push(q.clone());
        }
    }
    (Tridiagonal { alpha, beta }, basis, w)
}

/// Runs up to `s` Lanczos steps from the unit vector `q0`.
///
/// Stops early when `β` falls below `1e-12` times the operator's spectral
/// radius bound; the returned `T` is then shorter than `s`. With `reorth`
/// every new vector is orthogonalized against all previous ones.
pub fn lanczos_tridiagonalize<O: LinearOperator + ?Sized>(
    op: &O,
    q0: &[f64],
    s: usize,
    reorth: bool,
) -> Result<Tridiagonal> {
    check_start(op, q0, s)?;
    Ok(run_lanczos(op, q0, s, reorth).0)
}

/// Same as [`lanczos_tridiagonalize`] with full reorthogonalization, also
/// returning the basis.
pub fn lanczos_decomposition<O: LinearOperator + ?Sized>(
    op: &O,
    q0: &[f64],
    s: usize,
) -> Result<LanczosDecomposition> {
    check_start(op, q0, s)?;
    let (tridiagonal, basis, residual) = run_lanczos(op, q0, s, true);
    Ok(LanczosDecomposition {
        tridiagonal,
        basis,
        residual,
    })
}

/// Gauss rule from `T`: nodes are its eigenvalues, weights the squared first
/// components of its unit eigenvectors.
pub fn quadrature_rule(t: &Tridiagonal) -> Result<QuadratureRule> {
    let eig = tridiagonal_eigen(&t.alpha, &t.beta, &[0])?;
    let weights = eig.rows[0].iter().map(|u| u * u).collect();
    Ok(QuadratureRule {
        nodes: eig.values,
        weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumEnd {
    Smallest,
    Largest,
}

#[derive(Debug, Clone)]
pub struct ExtremalOptions {
    /// Seed of the random start (and restart) vectors.
    pub seed: u64,
    /// Step cap; `None` means `20k + 400`.
    pub max_steps: Option<usize>,
    /// Ritz values must move less than this between checks.
    pub change_tol: f64,
    /// Residual bound `|β u_last|` each returned Ritz value must meet.
    pub residual_tol: f64,
    /// Steps between convergence checks.
    pub check_every: usize,
}

impl Default for ExtremalOptions {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            max_steps: None,
            change_tol: 1e-8,
            residual_tol: 1e-7,
            check_every: 5,
        }
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng, against: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let before = norm2(&v);
        reorthogonalize(against, &mut v);
        let norm = norm2(&v);
        if norm > 1e-8 * before {
            v.iter_mut().for_each(|x| *x /= norm);
            return Some(v);
        }
    }
    None
}

/// The `k` eigenvalues at one end of the spectrum, ascending.
pub fn extremal_eigenvalues<O: LinearOperator + ?Sized>(
    op: &O,
    k: usize,
    end: SpectrumEnd,
) -> Result<Vec<f64>> {
    extremal_eigenvalues_with(op, k, end, &ExtremalOptions::default())
}

/// Lanczos with full reorthogonalization, grown until the `k` requested Ritz
/// values stop moving and have small residuals.
///
/// A single Krylov space sees each distinct eigenvalue once, so after
/// convergence (or when the space becomes invariant) iteration restarts from
/// a fresh random vector orthogonal to the whole basis. The result is
/// accepted once a restarted block has converged at the requested end
/// without changing the `k` values; repeated eigenvalues are thus found with
/// their multiplicity. Once the basis spans the whole space the Ritz values
/// are the exact spectrum.
pub fn extremal_eigenvalues_with<O: LinearOperator + ?Sized>(
    op: &O,
    k: usize,
    end: SpectrumEnd,
    opts: &ExtremalOptions,
) -> Result<Vec<f64>> {
    let n = op.dim();
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside [1, {n}]")));
    }
    let cap = opts.max_steps.unwrap_or(20 * k + 400);
    let tol = BREAKDOWN_TOL * op.spectral_radius_bound();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let pick = |values: &[f64], count: usize| -> Vec<usize> {
        let len = values.len();
        match end {
            SpectrumEnd::Smallest => (0..count.min(len)).collect(),
            SpectrumEnd::Largest => (len - count.min(len)..len).collect(),
        }
    };
    let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < opts.change_tol);

    let mut q = random_unit(n, &mut rng, &[]).expect("nonzero random vector");
    let mut basis = vec![q.clone()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut q_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    // First step of the current Krylov block.
    let mut block_start = 0;
    let mut previous: Option<Vec<f64>> = None;
    let mut previous_edge: Option<f64> = None;
    // Values accepted by an earlier block, awaiting confirmation.
    let mut confirmed: Option<Vec<f64>> = None;
    let mut best = Vec::new();

    loop {
        op.apply(&q, &mut w);
        if let Some(&b) = beta.last() {
            axpy(-b, &q_prev, &mut w);
        }
        let a = dot(&q, &w);
        axpy(-a, &q, &mut w);
        reorthogonalize(&basis, &mut w);
        alpha.push(a);
        let steps = alpha.len();
        let block_steps = steps - block_start;
        let complete = basis.len() == n;
        let b = if complete { 0.0 } else { norm2(&w) };
        let mut restart = b <= tol;

        let due = complete || restart || steps == cap || (steps >= k && block_steps % opts.check_every == 0);
        if due {
            let eig = tridiagonal_eigen(&alpha, &beta, &[steps - 1])?;
            let idx = pick(&eig.values, k);
            let ritz: Vec<f64> = idx.iter().map(|&i| eig.values[i]).collect();
            if complete {
                return Ok(ritz);
            }
            // The block's own extreme Ritz value bounds what it can still find.
            let local = tridiagonal_eigen(&alpha[block_start..], &beta[block_start..], &[block_steps - 1])?;
            let e = pick(&local.values, 1)[0];
            let edge = local.values[e];
            let edge_done = restart
                || ((b * local.rows[0][e]).abs() <= opts.residual_tol
                    && previous_edge.is_some_and(|p| (p - edge).abs() < opts.change_tol));
            previous_edge = Some(edge);

            if ritz.len() == k {
                let residual_ok = idx.iter().all(|&i| (b * eig.rows[0][i]).abs() <= opts.residual_tol);
                let stable = previous.as_ref().is_some_and(|p| close(p, &ritz));
                if (residual_ok && stable && edge_done) || (restart && residual_ok) {
                    if confirmed.as_ref().is_some_and(|c| close(c, &ritz)) {
                        return Ok(ritz);
                    }
                    confirmed = Some(ritz.clone());
                    restart = true;
                }
                previous = Some(ritz.clone());
            }
            best = ritz;
        }
        if steps >= cap {
            return Err(Error::ExtremalNonConvergence { steps, best });
        }

        std::mem::swap(&mut q_prev, &mut q);
        if restart {
            match random_unit(n, &mut rng, &basis) {
                Some(v) => q = v,
                None => {
                    let eig = tridiagonal_eigen(&alpha, &beta, &[])?;
                    return Ok(pick(&eig.values, k).iter().map(|&i| eig.values[i]).collect());
                }
            }
            beta.push(0.0);
            block_start = steps;
            previous_edge = None;
        } else {
            for (qi, wi) in q.iter_mut().zip(&w) {
                *qi = wi / b;
            }
            beta.push(b);
        }
        basis.push(q.clone());
    }
}

/// Dense row-major matrix of a graph operator.
pub fn dense_matrix(g: &Graph, kind: OperatorKind) -> Result<DMatrix<f64>> {
    let n = g.n();
    let deg = degrees(g);
    let mut m = DMatrix::<f64>::zeros(n, n);
    match kind {
        OperatorKind::Laplacian | OperatorKind::Density => {
            let scale = if kind == OperatorKind::Density {
                if g.m() == 0 {
                    return Err(Error::EdgelessGraph);
                }
                1.0 / deg.iter().sum::<f64>()
            } else {
                1.0
            };
            for i in 0..n {
                m[(i, i)] = scale * deg[i];
                for (j, w) in g.neighbors(i) {
                    m[(i, j)] = -scale * w;
                }
            }
        }
        OperatorKind::NormalizedLaplacian => {
            for i in 0..n {
                if deg[i] > 0.0 {
                    m[(i, i)] = 1.0;
                }
                for (j, w) in g.neighbors(i) {
                    m[(i, j)] = -w / (deg[i] * deg[j]).sqrt();
                }
            }
        }
    }
    Ok(m)
}

/// All eigenvalues of the densified operator, ascending. Refuses graphs above
/// [`DENSE_CAP`] vertices.
pub fn dense_spectrum(g: &Graph, kind: OperatorKind) -> Result<Vec<f64>> {
    dense_spectrum_with_cap(g, kind, DENSE_CAP)
}

pub fn dense_spectrum_with_cap(g: &Graph, kind: OperatorKind, cap: usize) -> Result<Vec<f64>> {
    if g.n() > cap {
        return Err(Error::DenseCapExceeded { n: g.n(), cap });
    }
    Ok(sorted_eigenvalues(dense_matrix(g, kind)?))
}

/// Spectrum of an arbitrary operator, densified column by column.
pub fn dense_operator_spectrum<O: LinearOperator + ?Sized>(op: &O) -> Vec<f64> {
    let n = op.dim();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    // Symmetrize away rounding asymmetry.
    let m = (&m + m.transpose()) * 0.5;
    sorted_eigenvalues(m)
}

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Upper bound on the Lanczos error for `exp(-t x)` after `s` steps.
///
/// Returns `20 exp(-s²/(2.5 t))` when `√(2t) ≤ s ≤ t`,
/// `40/t · exp(-t/2) · (e t / (2s))^s` when `s > t`, and `+∞` when
/// `s < √(2t)`. The bound is nonincreasing in `s` within each branch but can
/// jump upward where the branches meet for `t ≳ 15`.
pub fn lanczos_error_bound(t: f64, s: usize) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidArgument(format!("heat time {t} must be positive")));
    }
    if s < 1 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let s = s as f64;
    if s < (2.0 * t).sqrt() {
        return Ok(f64::INFINITY);
    }
    if s <= t {
        Ok(20.0 * (-s * s / (2.5 * t)).exp())
    } else {
        // In log space: (e t / 2s)^s underflows long before the product does.
        let log = (40.0 / t).ln() - 0.5 * t + s * (0.5 * std::f64::consts::E * t / s).ln();
        Ok(log.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{make_operator, DenseOperator, DiagonalOperator};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn eigenvector_start_breaks_down_immediately() {
        let k2 = Graph::complete(2).unwrap();
        let p = make_operator(&k2, OperatorKind::Density).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let t = lanczos_tridiagonalize(&p, &[h, -h], 2, true).unwrap();
        assert_eq!(t.steps(), 1);
        assert_close(t.alpha[0], 1.0, 1e-15);
        assert!(t.beta.is_empty());
    }

    #[test]
    fn diag_two_by_two_hand_recurrence() {
        // q0 = [1,1]/√2: α0 = 1.5, r = [-0.5, 0.5]/√2, β0 = 0.5, q1 = [-1,1]/√2, α1 = 1.5
        let op = DiagonalOperator::new(vec![1.0, 2.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let dec = lanczos_decomposition(&op, &[h, h], 2).unwrap();
        let t = &dec.tridiagonal;
        assert_close(t.alpha[0], 1.5, 1e-15);
        assert_close(t.alpha[1], 1.5, 1e-15);
        assert_close(t.beta[0], 0.5, 1e-15);
        // QᵀMQ = T
        for i in 0..2 {
            for j in 0..2 {
                let mq = op.apply_vec(&dec.basis[j]);
                let expected = if i == j { t.alpha[i] } else { t.beta[0] };
                assert_close(dot(&dec.basis[i], &mq), expected, 1e-14);
            }
        }
    }

    #[test]
    fn single_step_is_rayleigh_quotient() {
        let op = DenseOperator::new(3, vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]).unwrap();
        let q0: Vec<f64> = [1.0, 2.0, 2.0].iter().map(|x| x / 3.0).collect();
        let t = lanczos_tridiagonalize(&op, &q0, 1, false).unwrap();
        assert_eq!(t.steps(), 1);
        assert_close(t.alpha[0], dot(&q0, &op.apply_vec(&q0)), 1e-14);
    }

    #[test]
    fn rejects_bad_arguments() {
        let op = DiagonalOperator::new(vec![1.0, 2.0]);
        assert!(lanczos_tridiagonalize(&op, &[1.0, 0.0], 0, false).is_err());
        assert!(lanczos_tridiagonalize(&op, &[1.0, 0.0], 3, false).is_err());
        assert!(lanczos_tridiagonalize(&op, &[1.0, 1.0], 1, false).is_err());
        assert!(lanczos_tridiagonalize(&op, &[1.0], 1, false).is_err());
    }

    #[test]
    fn quadrature_examples() {
        let r = quadrature_rule(&Tridiagonal { alpha: vec![0.7], beta: vec![] }).unwrap();
        assert_eq!(r.nodes, vec![0.7]);
        assert_eq!(r.weights, vec![1.0]);

        let r = quadrature_rule(&Tridiagonal { alpha: vec![1.5, 1.5], beta: vec![0.5] }).unwrap();
        assert_close(r.nodes[0], 1.0, 1e-14);
        assert_close(r.nodes[1], 2.0, 1e-14);
        assert_close(r.weights[0], 0.5, 1e-14);
        assert_close(r.weights[1], 0.5, 1e-14);
    }

    #[test]
    fn tridiagonal_eigen_matches_dense() {
        let alpha = [4.0, -1.0, 2.5, 0.3, 7.0, 1.0];
        let beta = [1.0, 0.2, 3.0, 1e-9, 0.5];
        let n = alpha.len();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = alpha[i];
            if i + 1 < n {
                m[(i, i + 1)] = beta[i];
                m[(i + 1, i)] = beta[i];
            }
        }
        let eig = nalgebra::SymmetricEigen::new(m);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ours = tridiagonal_eigen(&alpha, &beta, &[0]).unwrap();
        for (k, (v, w)) in pairs.iter().enumerate() {
            assert_close(ours.values[k], *v, 1e-12);
            assert_close(ours.rows[0][k].powi(2), *w, 1e-12);
        }
        let total: f64 = ours.rows[0].iter().map(|u| u * u).sum();
        assert_close(total, 1.0, 1e-14);
    }

    #[test]
    fn extremal_examples() {
        let k3 = Graph::complete(3).unwrap();
        let op = make_operator(&k3, OperatorKind::NormalizedLaplacian).unwrap();
        let v = extremal_eigenvalues(&op, 1, SpectrumEnd::Smallest).unwrap();
        assert_close(v[0], 0.0, 1e-6);
        // Repeated eigenvalue 1.5 is found twice.
        let v = extremal_eigenvalues(&op, 2, SpectrumEnd::Largest).unwrap();
        assert_close(v[0], 1.5, 1e-6);
        assert_close(v[1], 1.5, 1e-6);

        let k2 = Graph::complete(2).unwrap();
        let op = make_operator(&k2, OperatorKind::NormalizedLaplacian).unwrap();
        let v = extremal_eigenvalues(&op, 2, SpectrumEnd::Largest).unwrap();
        assert_close(v[0], 0.0, 1e-6);
        assert_close(v[1], 2.0, 1e-6);

        let p3 = Graph::path(3).unwrap();
        let op = make_operator(&p3, OperatorKind::Laplacian).unwrap();
        let v = extremal_eigenvalues(&op, 1, SpectrumEnd::Largest).unwrap();
        assert_close(v[0], 3.0, 1e-6);
        assert!(extremal_eigenvalues(&op, 0, SpectrumEnd::Largest).is_err());
        assert!(extremal_eigenvalues(&op, 4, SpectrumEnd::Largest).is_err());
    }

    #[test]
    fn extremal_reports_best_estimates_on_cap() {
        let op = DiagonalOperator::new((0..400).map(|i| i as f64 / 400.0).collect());
        let opts = ExtremalOptions {
            max_steps: Some(6),
            ..Default::default()
        };
        match extremal_eigenvalues_with(&op, 3, SpectrumEnd::Largest, &opts) {
            Err(Error::ExtremalNonConvergence { steps, best }) => {
                assert_eq!(steps, 6);
                assert_eq!(best.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dense_spectrum_examples() {
        let k2 = Graph::complete(2).unwrap();
        let s = dense_spectrum(&k2, OperatorKind::NormalizedLaplacian).unwrap();
        assert_close(s[0], 0.0, 1e-14);
        assert_close(s[1], 2.0, 1e-14);
        let p3 = Graph::path(3).unwrap();
        let s = dense_spectrum(&p3, OperatorKind::Laplacian).unwrap();
        for (a, b) in s.iter().zip([0.0, 1.0, 3.0]) {
            assert_close(*a, b, 1e-12);
        }
        let empty = Graph::empty(5).unwrap();
        for kind in [OperatorKind::Laplacian, OperatorKind::NormalizedLaplacian] {
            assert_eq!(dense_spectrum(&empty, kind).unwrap(), vec![0.0; 5]);
        }
        assert!(dense_spectrum(&empty, OperatorKind::Density).is_err());
        assert!(matches!(
            dense_spectrum_with_cap(&p3, OperatorKind::Laplacian, 2),
            Err(Error::DenseCapExceeded { n: 3, cap: 2 })
        ));
    }

    #[test]
    fn error_bound_examples() {
        assert_close(lanczos_error_bound(100.0, 20).unwrap(), 20.0 * (-1.6f64).exp(), 1e-12);
        assert_close(lanczos_error_bound(100.0, 20).unwrap(), 4.038, 1e-3);
        let direct = 40.0 * (-0.5f64).exp() * (0.05 * std::f64::consts::E).powi(10);
        let b = lanczos_error_bound(1.0, 10).unwrap();
        assert!((b - direct).abs() <= 1e-12 * direct);
        assert!((b - 5.2e-8).abs() < 0.05e-8, "{b}");
        assert_eq!(lanczos_error_bound(100.0, 10).unwrap(), f64::INFINITY);
        assert!(lanczos_error_bound(0.0, 10).is_err());
        assert!(lanczos_error_bound(-1.0, 10).is_err());
        assert!(lanczos_error_bound(1.0, 0).is_err());
    }

    #[test]
    fn error_bound_nonincreasing_within_branches() {
        for &t in &[0.5f64, 1.0, 3.0, 10.0, 40.0, 100.0, 1000.0] {
            let start = (2.0 * t).sqrt().ceil() as usize;
            let mut prev = f64::INFINITY;
            for s in start.max(1)..start + 400 {
                let b = lanczos_error_bound(t, s).unwrap();
                let crossing = (s as f64) > t && ((s - 1) as f64) <= t;
                if !crossing {
                    assert!(b <= prev, "t={t} s={s}: {b} > {prev}");
                }
                prev = b;
            }
        }
        // Small t: monotone across the branch switch too.
        for &t in &[1.0f64, 5.0, 10.0] {
            let start = (2.0 * t).sqrt().ceil() as usize;
            let bounds: Vec<f64> = (start..start + 50).map(|s| lanczos_error_bound(t, s).unwrap()).collect();
            assert!(bounds.windows(2).all(|w| w[1] <= w[0]), "t={t}");
        }
    }

    #[test]
    fn error_bound_branch_jump_for_large_t() {
        let before = lanczos_error_bound(100.0, 100).unwrap();
        let after = lanczos_error_bound(100.0, 101).unwrap();
        assert!(after > before);
    }
}
