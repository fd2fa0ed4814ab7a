//! Dense complex linear-algebra kernels: LU with partial pivoting, one-sided
//! Jacobi SVD, Hessenberg + shifted-QR Schur decomposition, and a
//! Schur–Parlett matrix-function recurrence.
//!
//! Everything is written for modest dense sizes (n ≤ a few hundred) with
//! deterministic, fixed evaluation order; there is no parallelism and no
//! reliance on an external BLAS/LAPACK.

mod funm;
mod schur;
mod svd;

pub use funm::{cluster_relative_gap, eig_from_schur, funm_schur, ScalarFunction};
pub use schur::{schur, SchurForm};
pub use svd::singular_values;

use num_complex::Complex64;

use crate::operators::OperatorMatrix;

/// LU factorization with partial pivoting: `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    /// Packed L (unit lower, below diagonal) and U (upper including diagonal).
    lu: Vec<Complex64>,
    /// Row permutation: step `k` swapped rows `k` and `piv[k]`.
    piv: Vec<usize>,
    swaps: usize,
}

/// Factors `A`; returns `None` when a pivot column is exactly zero (the
/// matrix is structurally singular). Near-singularity is left to the caller's
/// condition/residual checks.
pub fn lu_factor(a: &OperatorMatrix) -> Option<LuFactors> {
    let n = a.dim();
    let mut lu: Vec<Complex64> = a.entries().to_vec();
    let mut piv = vec![0usize; n];
    let mut swaps = 0usize;
    for k in 0..n {
        // Pivot: largest modulus in column k at or below the diagonal.
        let mut p = k;
        let mut best = lu[k * n + k].norm_sqr();
        for i in (k + 1)..n {
            let v = lu[i * n + k].norm_sqr();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return None;
        }
        piv[k] = p;
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            swaps += 1;
        }
        let pivot = lu[k * n + k];
        for i in (k + 1)..n {
            let factor = lu[i * n + k] / pivot;
            lu[i * n + k] = factor;
            if factor.re != 0.0 || factor.im != 0.0 {
                for j in (k + 1)..n {
                    let ukj = lu[k * n + j];
                    lu[i * n + j] -= factor * ukj;
                }
            }
        }
    }
    Some(LuFactors { n, lu, piv, swaps })
}

impl LuFactors {
    /// Solves `A·x = b`.
    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n, "rhs length must match dimension");
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        // Forward: L·y = P·b (unit diagonal).
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        // Backward: U·x = y.
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A·X = B` column by column.
    pub fn solve_mat(&self, b: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(b.dim(), self.n, "rhs dimension must match");
        let n = self.n;
        let mut out = OperatorMatrix::zeros(n);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = b.at(i, j);
            }
            let x = self.solve_vec(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    /// `A⁻¹`.
    pub fn inverse(&self) -> OperatorMatrix {
        self.solve_mat(&OperatorMatrix::identity(self.n))
    }

    /// Determinant from the U diagonal and the permutation sign.
    pub fn det(&self) -> Complex64 {
        let mut d = if self.swaps.is_multiple_of(2) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        for k in 0..self.n {
            d *= self.lu[k * self.n + k];
        }
        d
    }
}

/// Euclidean norm of a complex vector.
pub fn vec_norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean distance between two complex vectors of equal length.
pub fn vec_dist2(x: &[Complex64], y: &[Complex64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Pairwise (tree) sum of matrices: deterministic and more accurate than a
/// running sum for long node lists.
pub fn pairwise_sum_matrices(mut terms: Vec<OperatorMatrix>) -> OperatorMatrix {
    assert!(!terms.is_empty(), "cannot sum zero matrices");
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut iter = terms.chunks_exact(2);
        for pair in &mut iter {
            next.push(&pair[0] + &pair[1]);
        }
        if let [last] = iter.remainder() {
            next.push(last.clone());
        }
        terms = next;
    }
    terms.pop().expect("non-empty by construction")
}

/// Pairwise (tree) sum of vectors.
pub fn pairwise_sum_vectors(mut terms: Vec<Vec<Complex64>>) -> Vec<Complex64> {
    assert!(!terms.is_empty(), "cannot sum zero vectors");
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut iter = terms.chunks_exact(2);
        for pair in &mut iter {
            let sum: Vec<Complex64> = pair[0]
                .iter()
                .zip(pair[1].iter())
                .map(|(a, b)| a + b)
                .collect();
            next.push(sum);
        }
        if let [last] = iter.remainder() {
            next.push(last.clone());
        }
        terms = next;
    }
    terms.pop().expect("non-empty by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lu_solves_a_known_system() {
        // [[2, 1], [1, 3]] · [1, 2] = [4, 7]
        let a = OperatorMatrix::from_real(2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        let lu = lu_factor(&a).unwrap();
        let x = lu.solve_vec(&[c(4.0, 0.0), c(7.0, 0.0)]);
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn lu_inverse_round_trips() {
        let a =
            OperatorMatrix::from_real(3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]).unwrap();
        let inv = lu_factor(&a).unwrap().inverse();
        let err = (&(&a * &inv) - &OperatorMatrix::identity(3)).frobenius_norm();
        assert!(err < 1e-13, "residual {err}");
    }

    #[test]
    fn lu_det_matches_hand_value() {
        // det [[1, 2], [3, 4]] = -2; complex perturbation checked too.
        let a = OperatorMatrix::from_real(2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let d = lu_factor(&a).unwrap().det();
        assert!((d - c(-2.0, 0.0)).norm() < 1e-13);

        let b = OperatorMatrix::new(2, vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)])
            .unwrap();
        let d = lu_factor(&b).unwrap().det();
        assert!((d - c(-1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn lu_detects_exact_singularity() {
        let a = OperatorMatrix::from_real(2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(lu_factor(&a).is_none());
    }

    #[test]
    fn pairwise_sum_matches_direct_sum() {
        let terms: Vec<OperatorMatrix> = (1..=7)
            .map(|k| OperatorMatrix::diag_real(&[k as f64, -(k as f64)]))
            .collect();
        let sum = pairwise_sum_matrices(terms);
        assert!((sum.at(0, 0) - c(28.0, 0.0)).norm() < 1e-14);
        assert!((sum.at(1, 1) - c(-28.0, 0.0)).norm() < 1e-14);
    }
}
