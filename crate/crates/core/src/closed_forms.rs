//! Closed-form fractional powers of the four structured 3×3 block families,
//! the resolvent-product identity, and spectral-mapping reports.
//!
//! Each family formula expresses the block power through scalar-coefficient
//! combinations of fractional powers of the single generator `A` (or the
//! three generators for the commuting-diagonal family). Those generator
//! powers are computed by the dense oracle, never by quadrature, so that
//! comparing a closed form against a quadrature route is a genuine
//! cross-check of two independent computations.
//!
//! The formulas hold for exponents in the open interval `(0, 1)`; evaluating
//! at `α = 1` (where each formula degenerates to the exact inverse) is
//! supported behind an explicit opt-in because it is the cheapest strong
//! correctness check, not part of the formulas' stated range.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::block3::{assemble, BlockOperator3, COMMUTATION_TOL_FACTOR};
use crate::error::{Error, Result};
use crate::linalg::lu_factor;
use crate::operators::{
    eigenvalues, resolvent, spectral_norm, OperatorMatrix, BRANCH_ARG_MARGIN, BRANCH_ZERO_TOL,
};
use crate::oracle::oracle_power;
use crate::quadrature::{resolvent_product_integral, QuadratureScheme};

/// Which power of the family matrix to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    /// `Λ^{+α}`.
    Positive,
    /// `Λ^{−α}`.
    Negative,
}

/// A closed-form value bundled with the norm of the discrepancy against the
/// independent check computed alongside it.
#[derive(Debug, Clone)]
pub struct CheckedValue {
    pub value: OperatorMatrix,
    pub discrepancy: f64,
}

/// Predicted-versus-observed eigenvalue comparison for a computed power.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Eigenvalues of the assembled base matrix, sorted lexicographically.
    pub base_eigs: Vec<Complex64>,
    /// Signed exponent `z` such that the compared power is `Λ^z`.
    pub alpha: f64,
    /// Principal powers `base^z`, index-aligned with `base_eigs`.
    pub predicted: Vec<Complex64>,
    /// Eigenvalues of the computed power, reordered to match `predicted`.
    pub observed: Vec<Complex64>,
    /// Largest matched distance `|predicted − observed|`.
    pub max_match_residual: f64,
}

fn check_alpha_open(alpha: f64, allow_alpha_eq_1: bool) -> Result<()> {
    let ok = (0.0 < alpha && alpha < 1.0) || (allow_alpha_eq_1 && alpha == 1.0);
    if !ok {
        let top = if allow_alpha_eq_1 { "1]" } else { "1)" };
        return Err(Error::InvalidAlpha {
            alpha,
            detail: format!("closed-form family power needs alpha in (0, {top}"),
        });
    }
    Ok(())
}

fn ensure_positive_spectrum(a: &OperatorMatrix) -> Result<()> {
    for eig in eigenvalues(a)? {
        if eig.re <= 0.0 {
            return Err(Error::NotPositive {
                reason: format!("eigenvalue {eig} has non-positive real part"),
            });
        }
    }
    Ok(())
}

/// Generator power `A^z` via the oracle, as a plain matrix.
fn power(a: &OperatorMatrix, z: f64) -> Result<OperatorMatrix> {
    Ok(oracle_power(a, z)?.value)
}

/// `Λ^{∓α}` for the lower-triangular coupling family
/// `[[A,0,0],[0,A,0],[I,0,A]]`: diagonal blocks `A^{∓α}`, coupling block
/// `∓α·A^{∓α−1}`.
pub fn lambda1_fracpow(a: &OperatorMatrix, alpha: f64, sign: Sign) -> Result<BlockOperator3> {
    lambda1_fracpow_extended(a, alpha, sign, false)
}

/// [`lambda1_fracpow`] with the `α = 1` continuity extension switchable.
pub fn lambda1_fracpow_extended(
    a: &OperatorMatrix,
    alpha: f64,
    sign: Sign,
    allow_alpha_eq_1: bool,
) -> Result<BlockOperator3> {
    check_alpha_open(alpha, allow_alpha_eq_1)?;
    ensure_positive_spectrum(a)?;
    let z = match sign {
        Sign::Positive => alpha,
        Sign::Negative => -alpha,
    };
    let diag = power(a, z)?;
    let corner = power(a, z - 1.0)?.scale_real(match sign {
        Sign::Positive => alpha,
        Sign::Negative => -alpha,
    });
    let zero = OperatorMatrix::zeros(a.dim());
    assemble([
        [diag.clone(), zero.clone(), zero.clone()],
        [zero.clone(), diag.clone(), zero.clone()],
        [corner, zero.clone(), diag],
    ])
}

/// `Λ^{∓α}` for the damped-oscillator family
/// `[[0,−I,0],[A,2A^{1/2},0],[0,0,2A^{1/2}]]`.
pub fn lambda312_fracpow(a: &OperatorMatrix, alpha: f64, sign: Sign) -> Result<BlockOperator3> {
    lambda312_fracpow_extended(a, alpha, sign, false)
}

/// [`lambda312_fracpow`] with the `α = 1` continuity extension switchable.
pub fn lambda312_fracpow_extended(
    a: &OperatorMatrix,
    alpha: f64,
    sign: Sign,
    allow_alpha_eq_1: bool,
) -> Result<BlockOperator3> {
    check_alpha_open(alpha, allow_alpha_eq_1)?;
    ensure_positive_spectrum(a)?;
    let zero = OperatorMatrix::zeros(a.dim());
    let blocks = match sign {
        Sign::Negative => {
            let b11 = power(a, -alpha / 2.0)?.scale_real(1.0 + alpha);
            let b12 = power(a, -(1.0 + alpha) / 2.0)?.scale_real(alpha);
            let b21 = power(a, (1.0 - alpha) / 2.0)?.scale_real(-alpha);
            let b22 = power(a, -alpha / 2.0)?.scale_real(1.0 - alpha);
            let b33 = power(a, -alpha / 2.0)?.scale_real(2.0f64.powf(-alpha));
            [
                [b11, b12, zero.clone()],
                [b21, b22, zero.clone()],
                [zero.clone(), zero.clone(), b33],
            ]
        }
        Sign::Positive => {
            let b11 = power(a, alpha / 2.0)?.scale_real(1.0 - alpha);
            let b12 = power(a, (alpha - 1.0) / 2.0)?.scale_real(-alpha);
            let b21 = power(a, (1.0 + alpha) / 2.0)?.scale_real(alpha);
            let b22 = power(a, alpha / 2.0)?.scale_real(1.0 + alpha);
            let b33 = power(a, alpha / 2.0)?.scale_real(2.0f64.powf(alpha));
            [
                [b11, b12, zero.clone()],
                [b21, b22, zero.clone()],
                [zero.clone(), zero.clone(), b33],
            ]
        }
    };
    assemble(blocks)
}

/// `Λ^{∓α}` for the rotation family `[[0,0,−I],[0,A,0],[A,0,0]]`: the
/// corner blocks carry `cos(πα/2)`/`sin(πα/2)` coefficients because the
/// relevant spectrum sits on the imaginary axis.
pub fn lambda4_fracpow(a: &OperatorMatrix, alpha: f64, sign: Sign) -> Result<BlockOperator3> {
    lambda4_fracpow_extended(a, alpha, sign, false)
}

/// [`lambda4_fracpow`] with the `α = 1` continuity extension switchable.
pub fn lambda4_fracpow_extended(
    a: &OperatorMatrix,
    alpha: f64,
    sign: Sign,
    allow_alpha_eq_1: bool,
) -> Result<BlockOperator3> {
    check_alpha_open(alpha, allow_alpha_eq_1)?;
    ensure_positive_spectrum(a)?;
    let cos = (PI * alpha / 2.0).cos();
    let sin = (PI * alpha / 2.0).sin();
    let zero = OperatorMatrix::zeros(a.dim());
    let blocks = match sign {
        Sign::Negative => {
            let b11 = power(a, -alpha / 2.0)?.scale_real(cos);
            let b13 = power(a, -(alpha + 1.0) / 2.0)?.scale_real(sin);
            let b22 = power(a, -alpha)?;
            let b31 = power(a, (1.0 - alpha) / 2.0)?.scale_real(-sin);
            let b33 = power(a, -alpha / 2.0)?.scale_real(cos);
            [
                [b11, zero.clone(), b13],
                [zero.clone(), b22, zero.clone()],
                [b31, zero.clone(), b33],
            ]
        }
        Sign::Positive => {
            let b11 = power(a, alpha / 2.0)?.scale_real(cos);
            let b13 = power(a, (alpha - 1.0) / 2.0)?.scale_real(-sin);
            let b22 = power(a, alpha)?;
            let b31 = power(a, (1.0 + alpha) / 2.0)?.scale_real(sin);
            let b33 = power(a, alpha / 2.0)?.scale_real(cos);
            [
                [b11, zero.clone(), b13],
                [zero.clone(), b22, zero.clone()],
                [b31, zero.clone(), b33],
            ]
        }
    };
    assemble(blocks)
}

/// `Λ^{∓α}` for the three-generator family `[[A₁,0,0],[0,A₂,0],[I,0,A₃]]`
/// with commuting generators: diagonal blocks `A_i^{∓α}`, coupling block
/// `(A₁−A₃)^{−1}(A₁^{∓α}−A₃^{∓α})`.
pub fn lambda3_fracpow(
    a1: &OperatorMatrix,
    a2: &OperatorMatrix,
    a3: &OperatorMatrix,
    alpha: f64,
    sign: Sign,
) -> Result<BlockOperator3> {
    lambda3_fracpow_extended(a1, a2, a3, alpha, sign, false)
}

/// [`lambda3_fracpow`] with the `α = 1` continuity extension switchable.
pub fn lambda3_fracpow_extended(
    a1: &OperatorMatrix,
    a2: &OperatorMatrix,
    a3: &OperatorMatrix,
    alpha: f64,
    sign: Sign,
    allow_alpha_eq_1: bool,
) -> Result<BlockOperator3> {
    check_alpha_open(alpha, allow_alpha_eq_1)?;
    for a in [a1, a2, a3] {
        ensure_positive_spectrum(a)?;
    }
    let commutation_tol = COMMUTATION_TOL_FACTOR
        * spectral_norm(a1)
            .max(spectral_norm(a2))
            .max(spectral_norm(a3));
    for (x, y) in [(a1, a2), (a1, a3), (a2, a3)] {
        let norm = spectral_norm(&(&(x * y) - &(y * x)));
        if norm > commutation_tol {
            return Err(Error::NonCommuting {
                norm,
                tol: commutation_tol,
            });
        }
    }
    let z = match sign {
        Sign::Positive => alpha,
        Sign::Negative => -alpha,
    };
    let p1 = power(a1, z)?;
    let p2 = power(a2, z)?;
    let p3 = power(a3, z)?;
    let diff_lu = lu_factor(&(a1 - a3)).ok_or(Error::SingularDifference)?;
    let corner = diff_lu.solve_mat(&(&p1 - &p3));
    let zero = OperatorMatrix::zeros(a1.dim());
    assemble([
        [p1, zero.clone(), zero.clone()],
        [zero.clone(), p2, zero.clone()],
        [corner, zero.clone(), p3],
    ])
}

/// The resolvent-difference form of the product of two resolvents:
/// `(A₁−A₂)^{−1}[(λ+A₂)^{−1} − (λ+A₁)^{−1}]`, with the discrepancy against
/// the directly multiplied `(λ+A₂)^{−1}(λ+A₁)^{−1}` attached.
pub fn second_resolvent_product(
    a1: &OperatorMatrix,
    a2: &OperatorMatrix,
    lam: f64,
) -> Result<CheckedValue> {
    if a1.dim() != a2.dim() {
        return Err(Error::DimensionMismatch {
            detail: format!("operator dimensions {} vs {}", a1.dim(), a2.dim()),
        });
    }
    let diff_lu = lu_factor(&(a1 - a2)).ok_or(Error::SingularDifference)?;
    let s = Complex64::new(lam, 0.0);
    let r1 = resolvent(a1, s)?;
    let r2 = resolvent(a2, s)?;
    let value = diff_lu.solve_mat(&(&r2 - &r1));
    let direct = &r2 * &r1;
    let discrepancy = spectral_norm(&(&value - &direct));
    Ok(CheckedValue { value, discrepancy })
}

/// Closed form `(A₁−A₂)^{−1}[A₂^{−α} − A₁^{−α}]` of the weighted
/// resolvent-product integral, with the quadrature of that integral run
/// alongside and the discrepancy attached.
pub fn resolvent_product_fracpow(
    a1: &OperatorMatrix,
    a2: &OperatorMatrix,
    alpha: f64,
) -> Result<CheckedValue> {
    resolvent_product_fracpow_with(a1, a2, alpha, &QuadratureScheme::default())
}

/// [`resolvent_product_fracpow`] with an explicit scheme for the check
/// integral.
pub fn resolvent_product_fracpow_with(
    a1: &OperatorMatrix,
    a2: &OperatorMatrix,
    alpha: f64,
    scheme: &QuadratureScheme,
) -> Result<CheckedValue> {
    if a1.dim() != a2.dim() {
        return Err(Error::DimensionMismatch {
            detail: format!("operator dimensions {} vs {}", a1.dim(), a2.dim()),
        });
    }
    let diff_lu = lu_factor(&(a1 - a2)).ok_or(Error::SingularDifference)?;
    let p1 = power(a1, -alpha)?;
    let p2 = power(a2, -alpha)?;
    let value = diff_lu.solve_mat(&(&p2 - &p1));
    let check = resolvent_product_integral(a1, a2, alpha, scheme)?;
    let discrepancy = spectral_norm(&(&value - &check));
    Ok(CheckedValue { value, discrepancy })
}

/// Principal powers `σ^z = exp(z·Log σ)` of a list of spectrum points.
pub fn spectral_map(eigs: &[Complex64], alpha: f64) -> Result<Vec<Complex64>> {
    for &eig in eigs {
        if eig.norm() < BRANCH_ZERO_TOL || eig.arg().abs() > PI - BRANCH_ARG_MARGIN {
            return Err(Error::BranchCutViolation { eig });
        }
    }
    Ok(eigs.iter().map(|&eig| eig.powf(alpha)).collect())
}

/// Compares the eigenvalues of a computed power `power ≈ Λ^z` against the
/// spectral-mapping prediction `{σ^z : σ ∈ σ(Λ)}`, pairing predicted and
/// observed values by nearest-neighbor matching after a lexicographic sort.
pub fn spectrum_report(
    b: &BlockOperator3,
    alpha: f64,
    power: &OperatorMatrix,
) -> Result<SpectrumReport> {
    let base_eigs = eigenvalues(b.assembled())?;
    let predicted = spectral_map(&base_eigs, alpha)?;
    let observed_raw = eigenvalues(power)?;
    if observed_raw.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            detail: format!(
                "{} predicted vs {} observed eigenvalues",
                predicted.len(),
                observed_raw.len()
            ),
        });
    }
    let mut used = vec![false; observed_raw.len()];
    let mut observed = Vec::with_capacity(predicted.len());
    let mut max_match_residual = 0.0f64;
    for &p in &predicted {
        let mut best = usize::MAX;
        let mut best_dist = f64::INFINITY;
        for (k, &o) in observed_raw.iter().enumerate() {
            if !used[k] {
                let dist = (p - o).norm();
                if dist < best_dist {
                    best_dist = dist;
                    best = k;
                }
            }
        }
        used[best] = true;
        observed.push(observed_raw[best]);
        max_match_residual = max_match_residual.max(best_dist);
    }
    Ok(SpectrumReport {
        base_eigs,
        alpha,
        predicted,
        observed,
        max_match_residual,
    })
}
