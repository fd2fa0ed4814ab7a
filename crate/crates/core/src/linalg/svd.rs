//! Singular values by the one-sided Jacobi method.
//!
//! Column pairs are orthogonalized by complex Jacobi rotations until every
//! off-diagonal Gram entry is negligible; the singular values are then the
//! column norms. Slow but simple, deterministic, and accurate down to tiny
//! singular values, which is what the condition estimates here need.

use num_complex::Complex64;

use crate::operators::OperatorMatrix;

const MAX_SWEEPS: usize = 60;
const PAIR_TOL: f64 = 1e-15;

/// All singular values of `a`, sorted descending.
pub fn singular_values(a: &OperatorMatrix) -> Vec<f64> {
    let n = a.dim();
    // Work on a column-major copy so column updates are contiguous.
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| a.at(i, j)).collect())
        .collect();

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (app, aqq, apq) = gram_entries(&cols[p], &cols[q]);
                if app == 0.0 || aqq == 0.0 {
                    continue;
                }
                let off = apq.norm();
                if off <= PAIR_TOL * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                // Phase that makes the coupling real, then a classical
                // symmetric Jacobi rotation for [[app, |apq|], [|apq|, aqq]].
                let phase = apq / off;
                let tau = (aqq - app) / (2.0 * off);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let phase_conj = phase.conj();
                for i in 0..n {
                    let vp = cols[p][i];
                    let vq = phase_conj * cols[q][i];
                    cols[p][i] = c * vp - s * vq;
                    cols[q][i] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    sigma
}

/// `(‖p‖², ‖q‖², pᴴ·q)` for two columns.
fn gram_entries(p: &[Complex64], q: &[Complex64]) -> (f64, f64, Complex64) {
    let mut app = 0.0;
    let mut aqq = 0.0;
    let mut apq = Complex64::new(0.0, 0.0);
    for (x, y) in p.iter().zip(q.iter()) {
        app += x.norm_sqr();
        aqq += y.norm_sqr();
        apq += x.conj() * y;
    }
    (app, aqq, apq)
}
