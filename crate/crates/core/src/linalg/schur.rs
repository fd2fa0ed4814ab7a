//! Complex Schur decomposition: Householder reduction to Hessenberg form
//! followed by a single-shift QR iteration with Wilkinson shifts, deflation,
//! and occasional exceptional shifts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;

/// `A = Q·T·Qᴴ` with `T` upper triangular and `Q` unitary.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub t: OperatorMatrix,
    pub q: OperatorMatrix,
}

const MAX_ITERS_PER_EIG: usize = 50;
const EXCEPTIONAL_EVERY: usize = 10;

/// Computes the complex Schur form of `a`.
pub fn schur(a: &OperatorMatrix) -> Result<SchurForm> {
    let n = a.dim();
    let (mut h, mut q) = hessenberg(a);
    if n > 1 {
        qr_iterate(&mut h, &mut q)?;
    }
    // The iteration leaves sub-eps noise below the diagonal; make T exactly
    // triangular for the downstream recurrences.
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok(SchurForm { t: h, q })
}

/// Householder reduction `A = Q·H·Qᴴ` with `H` upper Hessenberg.
fn hessenberg(a: &OperatorMatrix) -> (OperatorMatrix, OperatorMatrix) {
    let n = a.dim();
    let mut h = a.clone().with_label("");
    let mut q = OperatorMatrix::identity(n);
    if n < 3 {
        return (h, q);
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        // Householder vector for column k below the diagonal.
        let mut norm_x = 0.0f64;
        for i in k + 1..n {
            norm_x += h.at(i, k).norm_sqr();
        }
        norm_x = norm_x.sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = h.at(k + 1, k);
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        let m = n - k - 1;
        for i in 0..m {
            v[i] = h.at(k + 1 + i, k);
        }
        v[0] -= alpha;
        let vnorm = v[..m].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v[..m].iter_mut() {
            *z /= vnorm;
        }

        // Left update: H ← (I − 2vvᴴ)·H on rows k+1..n.
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..m {
                s += v[i].conj() * h.at(k + 1 + i, j);
            }
            s *= 2.0;
            for i in 0..m {
                let upd = s * v[i];
                h[(k + 1 + i, j)] -= upd;
            }
        }
        // Right update: H ← H·(I − 2vvᴴ) on columns k+1..n.
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..m {
                s += h.at(i, k + 1 + j) * v[j];
            }
            s *= 2.0;
            for j in 0..m {
                let upd = s * v[j].conj();
                h[(i, k + 1 + j)] -= upd;
            }
        }
        // Accumulate Q ← Q·(I − 2vvᴴ).
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..m {
                s += q.at(i, k + 1 + j) * v[j];
            }
            s *= 2.0;
            for j in 0..m {
                let upd = s * v[j].conj();
                q[(i, k + 1 + j)] -= upd;
            }
        }
        // The transform maps the column onto alpha·e1 exactly in theory.
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    (h, q)
}

/// Shifted QR iteration on an upper Hessenberg matrix, accumulating the
/// rotations into `q`.
fn qr_iterate(h: &mut OperatorMatrix, q: &mut OperatorMatrix) -> Result<()> {
    let n = h.dim();
    let hnorm_floor = f64::EPSILON * h.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut stall = 0usize;
    let mut budget = MAX_ITERS_PER_EIG * n;

    loop {
        // Deflate negligible subdiagonal entries.
        for i in 0..hi {
            let sub = h.at(i + 1, i).norm();
            if sub <= f64::EPSILON * (h.at(i, i).norm() + h.at(i + 1, i + 1).norm())
                || sub <= hnorm_floor
            {
                h[(i + 1, i)] = Complex64::new(0.0, 0.0);
            }
        }
        while hi > 0 && h.at(hi, hi - 1).norm() == 0.0 {
            hi -= 1;
            stall = 0;
        }
        if hi == 0 {
            return Ok(());
        }
        if budget == 0 {
            return Err(Error::EigenFailure);
        }
        budget -= 1;
        stall += 1;

        // Active unreduced window [lo, hi].
        let mut lo = hi;
        while lo > 0 && h.at(lo, lo - 1).norm() != 0.0 {
            lo -= 1;
        }

        let mu = if stall.is_multiple_of(EXCEPTIONAL_EVERY) {
            // Exceptional shift to break symmetric stalls.
            h.at(hi, hi) + Complex64::new(0.75 * h.at(hi, hi - 1).norm(), 0.0)
        } else {
            wilkinson_shift(
                h.at(hi - 1, hi - 1),
                h.at(hi - 1, hi),
                h.at(hi, hi - 1),
                h.at(hi, hi),
            )
        };

        // Explicit shifted QR step on the window: H − μI = G₁ᴴ…, then RQ.
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (c, s) = givens(h.at(i, i), h.at(i + 1, i));
            // Rows i, i+1 over columns i..n.
            for j in i..n {
                let a = h.at(i, j);
                let b = h.at(i + 1, j);
                h[(i, j)] = c * a + s * b;
                h[(i + 1, j)] = -s.conj() * a + c * b;
            }
            rotations.push((i, c, s));
        }
        for &(i, c, s) in &rotations {
            // Columns i, i+1 over rows 0..=min(i+1, hi)+… the full height is
            // needed: rows above the window carry entries in these columns.
            let top = (i + 2).min(n);
            for r in 0..top {
                let a = h.at(r, i);
                let b = h.at(r, i + 1);
                h[(r, i)] = c * a + s.conj() * b;
                h[(r, i + 1)] = -s * a + c * b;
            }
            for r in 0..n {
                let a = q.at(r, i);
                let b = q.at(r, i + 1);
                q[(r, i)] = c * a + s.conj() * b;
                q[(r, i + 1)] = -s * a + c * b;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let delta = (a - d) * 0.5;
    let disc = (delta * delta + b * c).sqrt();
    // Pick the branch that maximizes |delta ± disc| for stability.
    let plus = delta + disc;
    let minus = delta - disc;
    let denom = if plus.norm() >= minus.norm() {
        plus
    } else {
        minus
    };
    if denom.norm() == 0.0 {
        d
    } else {
        d - (b * c) / denom
    }
}

/// Unitary rotation `[[c, s], [−s̄, c]]` (c real) sending `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let an = a.norm();
    let r = (an * an + bn * bn).sqrt();
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}
