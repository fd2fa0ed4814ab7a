//! Dense matrix-function oracle: principal fractional powers (and the
//! matrix exponential) of arbitrary square matrices whose spectrum stays off
//! the closed negative real axis.
//!
//! This is the brute-force ground-truth route the quadrature and closed-form
//! routes are validated against, so it shares no machinery with them: it
//! works from a Schur triangularization, taking the eigendecomposition
//! shortcut only when the eigenvector basis is well conditioned and falling
//! back to a clustered triangular recurrence otherwise (which handles
//! defective matrices exactly where eigendecomposition cannot).

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{
    cluster_relative_gap, eig_from_schur, funm_schur, lu_factor, schur, singular_values,
    ScalarFunction,
};
use crate::operators::{spectral_norm, OperatorMatrix, BRANCH_ARG_MARGIN, BRANCH_ZERO_TOL};

/// Eigenvector-basis condition number beyond which function values computed
/// through the eigendecomposition lose too much accuracy to serve as ground
/// truth.
pub const EIG_COND_CAP: f64 = 1e8;

/// Cap on the reported condition estimate of the triangular-recurrence path.
const CONDITION_ESTIMATE_CAP: f64 = 1e16;

/// Which evaluation path produced a [`MatrixFunctionResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMethod {
    /// Diagonalization: `f(A) = V·diag(f(λ))·V⁻¹`.
    Eigen,
    /// Schur triangularization with clustered diagonal blocks and a
    /// commutator recurrence for the off-diagonal blocks.
    SchurRecurrence,
}

impl fmt::Display for PowerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PowerMethod::Eigen => write!(f, "EIGEN"),
            PowerMethod::SchurRecurrence => write!(f, "SCHUR_RECURRENCE"),
        }
    }
}

/// A computed matrix function together with how it was obtained and a rough
/// conditioning indicator (≥ 1; eigenvector condition number on the
/// diagonalization path, inverse cluster gap on the recurrence path).
#[derive(Debug, Clone)]
pub struct MatrixFunctionResult {
    pub value: OperatorMatrix,
    pub method: PowerMethod,
    pub condition_estimate: f64,
}

/// Principal power `A^z` for real `z`.
///
/// Every eigenvalue must stay at least `1e−6` radians off the negative real
/// axis and at least `1e−12` in modulus away from zero; otherwise the
/// principal branch is meaningless and [`Error::BranchCutViolation`] is
/// returned.
pub fn oracle_power(a: &OperatorMatrix, z: f64) -> Result<MatrixFunctionResult> {
    function_of_matrix(a, ScalarFunction::Power(z))
}

/// Matrix exponential `e^A`, by the same dispatch as [`oracle_power`]
/// (entire function, so no branch restriction applies).
pub fn matrix_exp(a: &OperatorMatrix) -> Result<MatrixFunctionResult> {
    function_of_matrix(a, ScalarFunction::Exp)
}

fn function_of_matrix(a: &OperatorMatrix, func: ScalarFunction) -> Result<MatrixFunctionResult> {
    let n = a.dim();
    let form = schur(a)?;
    if matches!(func, ScalarFunction::Power(_)) {
        for i in 0..n {
            let eig = form.t.at(i, i);
            if eig.norm() < BRANCH_ZERO_TOL || eig.arg().abs() > PI - BRANCH_ARG_MARGIN {
                return Err(Error::BranchCutViolation { eig });
            }
        }
    }

    // Diagonalization path: only trustworthy when the eigenvector basis is
    // well conditioned (defective inputs make it arbitrarily bad).
    let (eigs, v) = eig_from_schur(&form);
    let sv = singular_values(&v);
    let smin = sv.last().copied().unwrap_or(0.0);
    let v_cond = if smin > 0.0 {
        sv[0] / smin
    } else {
        f64::INFINITY
    };
    if v_cond <= EIG_COND_CAP {
        if let Some(lu) = lu_factor(&v) {
            let vinv = lu.inverse();
            let mut scaled = v.clone();
            for (j, &eig) in eigs.iter().enumerate() {
                let fj = func.eval(eig);
                for i in 0..n {
                    scaled[(i, j)] *= fj;
                }
            }
            return Ok(MatrixFunctionResult {
                value: &scaled * &vinv,
                method: PowerMethod::Eigen,
                condition_estimate: v_cond.max(1.0),
            });
        }
    }

    let value = funm_schur(&form, func).map_err(|err| match err {
        Error::OracleFailure { .. } if v_cond > EIG_COND_CAP => {
            Error::IllConditionedSimilarity { cond: v_cond }
        }
        other => other,
    })?;
    let condition_estimate = match cluster_relative_gap(&form.t) {
        None => 1.0,
        Some(gap) => (1.0 / gap).clamp(1.0, CONDITION_ESTIMATE_CAP),
    };
    Ok(MatrixFunctionResult {
        value,
        method: PowerMethod::SchurRecurrence,
        condition_estimate,
    })
}

/// Relative spectral-norm discrepancy `‖X−Y‖ / ‖Y‖`.
pub fn relative_error(x: &OperatorMatrix, y: &OperatorMatrix) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            detail: format!("comparing {}×{0} against {}×{1}", x.dim(), y.dim()),
        });
    }
    let ref_norm = spectral_norm(y);
    if ref_norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(spectral_norm(&(x - y)) / ref_norm)
}
