//! Matrix functions of a triangular Schur factor via the block Parlett
//! recurrence: eigenvalues are grouped into well-separated clusters, each
//! cluster block is evaluated by a Taylor series about its mean eigenvalue,
//! and off-diagonal blocks are filled in by solving Sylvester equations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;

use super::schur::SchurForm;

/// Relative separation below which two eigenvalues share a cluster.
const CLUSTER_REL_TOL: f64 = 1e-6;
/// Eigenvalues of modulus below this are treated as a common zero cluster.
const CLUSTER_ZERO_TOL: f64 = 1e-12;
/// Hard cap on Taylor terms for one atomic block.
const TAYLOR_MAX_TERMS: usize = 100;

/// Scalar functions the triangular evaluator understands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarFunction {
    /// Principal branch of `z ↦ z^alpha`.
    Power(f64),
    /// `z ↦ exp(z)`.
    Exp,
}

impl ScalarFunction {
    /// Evaluates the function at a point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            ScalarFunction::Power(alpha) => z.powf(*alpha),
            ScalarFunction::Exp => z.exp(),
        }
    }

    /// `f(mu)`, the zeroth Taylor coefficient about `mu`.
    fn coeff0(&self, mu: Complex64) -> Complex64 {
        self.eval(mu)
    }

    /// Advances `f^(k-1)(mu)/(k-1)!` to `f^(k)(mu)/k!`.
    fn next_coeff(&self, mu: Complex64, prev: Complex64, k: usize) -> Result<Complex64> {
        match self {
            ScalarFunction::Power(alpha) => {
                if mu.norm() == 0.0 {
                    return Err(Error::OracleFailure {
                        detail: "Taylor expansion of a power about zero".into(),
                    });
                }
                Ok(prev * Complex64::new((alpha - (k as f64 - 1.0)) / k as f64, 0.0) / mu)
            }
            ScalarFunction::Exp => Ok(prev / k as f64),
        }
    }
}

/// Evaluates `f(A) = Q·f(T)·Qᴴ` from a Schur form.
pub fn funm_schur(form: &SchurForm, func: ScalarFunction) -> Result<OperatorMatrix> {
    let n = form.t.dim();
    let mut t = form.t.clone();
    let mut q = form.q.clone();

    // Group eigenvalues into clusters and make each cluster contiguous on the
    // diagonal by unitary adjacent swaps.
    let diag: Vec<Complex64> = (0..n).map(|i| t.at(i, i)).collect();
    let mut labels = cluster_labels(&diag);
    loop {
        let mut swapped = false;
        for k in 0..n.saturating_sub(1) {
            if labels[k] > labels[k + 1] {
                swap_adjacent(&mut t, &mut q, k);
                labels.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }

    // Contiguous block ranges [start, end) per cluster, in diagonal order.
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || labels[i] != labels[i - 1] {
            blocks.push((start, i));
            start = i;
        }
    }

    // Diagonal blocks by Taylor series about the cluster mean.
    let mut f = OperatorMatrix::zeros(n);
    for &(lo, hi) in &blocks {
        atomic_block(&t, lo, hi, func, &mut f)?;
    }

    // Off-diagonal blocks by the Parlett recurrence, one superdiagonal of
    // blocks at a time so every term on the right-hand side is available.
    let nb = blocks.len();
    for sep in 1..nb {
        for bi in 0..nb - sep {
            let bj = bi + sep;
            parlett_block(&t, &blocks, bi, bj, &mut f)?;
        }
    }

    let qf = &q * &f;
    Ok(&qf * &q.adjoint())
}

/// Smallest relative gap between distinct eigenvalue clusters of a
/// triangular factor, or `None` when everything falls in one cluster.
pub fn cluster_relative_gap(t: &OperatorMatrix) -> Option<f64> {
    let n = t.dim();
    let diag: Vec<Complex64> = (0..n).map(|i| t.at(i, i)).collect();
    let labels = cluster_labels(&diag);
    let mut gap: Option<f64> = None;
    for i in 0..n {
        for j in i + 1..n {
            if labels[i] == labels[j] {
                continue;
            }
            let scale = diag[i].norm().max(diag[j].norm()).max(CLUSTER_ZERO_TOL);
            let rel = (diag[i] - diag[j]).norm() / scale;
            gap = Some(gap.map_or(rel, |g: f64| g.min(rel)));
        }
    }
    gap
}

/// Eigenvalues and (right) eigenvectors recovered from a Schur form by
/// triangular back-substitution. Columns of the returned matrix are the
/// unit-norm eigenvectors, ordered like the diagonal of `T`.
pub fn eig_from_schur(form: &SchurForm) -> (Vec<Complex64>, OperatorMatrix) {
    let n = form.t.dim();
    let t = &form.t;
    let eigs: Vec<Complex64> = (0..n).map(|i| t.at(i, i)).collect();
    let guard = f64::EPSILON * t.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut v = OperatorMatrix::zeros(n);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        for z in col.iter_mut() {
            *z = Complex64::new(0.0, 0.0);
        }
        col[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                s += t.at(i, j) * col[j];
            }
            let mut denom = t.at(i, i) - eigs[k];
            if denom.norm() < guard {
                // Repeated eigenvalue: perturb the pivot rather than divide
                // by zero; the resulting vector spans the available subspace.
                denom = Complex64::new(guard, 0.0);
            }
            col[i] = -s / denom;
        }
        let w = form.q.mul_vec(&col);
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            v[(i, k)] = w[i] / norm;
        }
    }
    (eigs, v)
}

/// Union-find clustering of eigenvalues; labels are assigned in order of
/// first appearance along the diagonal.
fn cluster_labels(diag: &[Complex64]) -> Vec<usize> {
    let n = diag.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let close = (diag[i] - diag[j]).norm()
                <= CLUSTER_REL_TOL * diag[i].norm().max(diag[j].norm())
                || (diag[i].norm() <= CLUSTER_ZERO_TOL && diag[j].norm() <= CLUSTER_ZERO_TOL);
            if close {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        let r = find(&mut parent, i);
        if labels[r] == usize::MAX {
            labels[r] = next;
            next += 1;
        }
        labels[i] = labels[r];
    }
    labels
}

/// Swaps the eigenvalues at positions `k`, `k+1` of a triangular matrix by a
/// 2×2 unitary similarity, accumulating the rotation into `q`.
fn swap_adjacent(t: &mut OperatorMatrix, q: &mut OperatorMatrix, k: usize) {
    let n = t.dim();
    let a = t.at(k, k);
    let b = t.at(k, k + 1);
    let c = t.at(k + 1, k + 1);
    // First column of the rotation is the unit eigenvector of [[a,b],[0,c]]
    // for the eigenvalue c; the similarity then brings c to the front.
    let x0 = b;
    let x1 = c - a;
    let r = (x0.norm_sqr() + x1.norm_sqr()).sqrt();
    if r == 0.0 {
        return; // equal eigenvalues with no coupling: nothing to move
    }
    let g00 = x0 / r;
    let g10 = x1 / r;
    let g01 = -g10.conj();
    let g11 = g00.conj();
    // T ← Gᴴ·T on rows k, k+1.
    for j in 0..n {
        let u = t.at(k, j);
        let w = t.at(k + 1, j);
        t[(k, j)] = g00.conj() * u + g10.conj() * w;
        t[(k + 1, j)] = g01.conj() * u + g11.conj() * w;
    }
    // T ← T·G on columns k, k+1.
    for i in 0..n {
        let u = t.at(i, k);
        let w = t.at(i, k + 1);
        t[(i, k)] = u * g00 + w * g10;
        t[(i, k + 1)] = u * g01 + w * g11;
    }
    // Q ← Q·G.
    for i in 0..n {
        let u = q.at(i, k);
        let w = q.at(i, k + 1);
        q[(i, k)] = u * g00 + w * g10;
        q[(i, k + 1)] = u * g01 + w * g11;
    }
    // The similarity is exact up to rounding; pin the known entries.
    t[(k + 1, k)] = Complex64::new(0.0, 0.0);
    t[(k, k)] = c;
    t[(k + 1, k + 1)] = a;
}

/// Evaluates `f` on the diagonal block `[lo, hi)` of `t` by a Taylor series
/// about the mean eigenvalue, writing the result into `f_out`.
fn atomic_block(
    t: &OperatorMatrix,
    lo: usize,
    hi: usize,
    func: ScalarFunction,
    f_out: &mut OperatorMatrix,
) -> Result<()> {
    let m = hi - lo;
    if m == 1 {
        f_out[(lo, lo)] = func.eval(t.at(lo, lo));
        return Ok(());
    }
    let mut mu = Complex64::new(0.0, 0.0);
    for i in lo..hi {
        mu += t.at(i, i);
    }
    mu /= m as f64;

    // M = T_block − mu·I has tiny diagonal (cluster diameter) and a strictly
    // upper part that is nilpotent, so the series terms decay rapidly once
    // the block size is passed.
    let shifted = OperatorMatrix::from_fn(m, |i, j| {
        let mut z = t.at(lo + i, lo + j);
        if i == j {
            z -= mu;
        }
        z
    });
    let mut coeff = func.coeff0(mu);
    let mut f = OperatorMatrix::identity(m).scale(coeff);
    let mut power = OperatorMatrix::identity(m);
    let mut small_streak = 0usize;
    let mut converged = false;
    for k in 1..=TAYLOR_MAX_TERMS {
        power = &power * &shifted;
        coeff = func.next_coeff(mu, coeff, k)?;
        let term = power.clone().scale(coeff);
        f = &f + &term;
        if term.frobenius_norm() <= f64::EPSILON * f.frobenius_norm() {
            small_streak += 1;
        } else {
            small_streak = 0;
        }
        if small_streak >= 2 && k >= m {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::OracleFailure {
            detail: "Taylor series for an eigenvalue cluster did not converge".into(),
        });
    }
    for i in 0..m {
        for j in 0..m {
            f_out[(lo + i, lo + j)] = f.at(i, j);
        }
    }
    Ok(())
}

/// Fills block (bi, bj) of `f` by solving the Sylvester equation
/// `T_ii·X − X·T_jj = F_ii·T_ij − T_ij·F_jj + Σ_k (F_ik·T_kj − T_ik·F_kj)`.
fn parlett_block(
    t: &OperatorMatrix,
    blocks: &[(usize, usize)],
    bi: usize,
    bj: usize,
    f: &mut OperatorMatrix,
) -> Result<()> {
    let (ilo, ihi) = blocks[bi];
    let (jlo, jhi) = blocks[bj];
    let m = ihi - ilo;
    let p = jhi - jlo;

    // Right-hand side C.
    let mut c = vec![Complex64::new(0.0, 0.0); m * p];
    for r in 0..m {
        for s in 0..p {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..m {
                acc += f.at(ilo + r, ilo + k) * t.at(ilo + k, jlo + s);
            }
            for k in 0..p {
                acc -= t.at(ilo + r, jlo + k) * f.at(jlo + k, jlo + s);
            }
            for kb in bi + 1..bj {
                let (klo, khi) = blocks[kb];
                for k in klo..khi {
                    acc += f.at(ilo + r, k) * t.at(k, jlo + s);
                    acc -= t.at(ilo + r, k) * f.at(k, jlo + s);
                }
            }
            c[r * p + s] = acc;
        }
    }

    // Solve entrywise: rows bottom-up, columns left-to-right, using the
    // triangularity of both diagonal blocks.
    let mut x = vec![Complex64::new(0.0, 0.0); m * p];
    for r in (0..m).rev() {
        for s in 0..p {
            let mut acc = c[r * p + s];
            for k in r + 1..m {
                acc -= t.at(ilo + r, ilo + k) * x[k * p + s];
            }
            for k in 0..s {
                acc += x[r * p + k] * t.at(jlo + k, jlo + s);
            }
            let denom = t.at(ilo + r, ilo + r) - t.at(jlo + s, jlo + s);
            if denom.norm() < f64::MIN_POSITIVE.max(1e-300) {
                return Err(Error::OracleFailure {
                    detail: "eigenvalue clusters collide in the Parlett recurrence".into(),
                });
            }
            x[r * p + s] = acc / denom;
        }
    }
    for r in 0..m {
        for s in 0..p {
            f[(ilo + r, jlo + s)] = x[r * p + s];
        }
    }
    Ok(())
}
