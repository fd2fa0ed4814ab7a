//! Quadrature of the real-axis integral representations of fractional
//! operator powers.
//!
//! Every integral here has the shape `∫₀^∞ s^w · G(s) ds` with `G` built from
//! resolvents of a positive operator: an algebraic endpoint singularity at
//! `s = 0` and algebraic decay at infinity. The engine splits at
//! `split_point`, maps both pieces onto `(0, 1]` (head `s = c·u`, tail
//! `s = c/u` with the resolvent decay folded in analytically), absorbs the
//! endpoint exponent into a Gauss–Jacobi weight `u^β`, and doubles the node
//! count until the result stops moving in spectral norm. Summation order is
//! fixed (head nodes, then tail nodes, pairwise reduction) so results are
//! bit-for-bit reproducible.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ConvergenceFailure, Error, Result};
use crate::linalg::{lu_factor, pairwise_sum_matrices, pairwise_sum_vectors, vec_dist2, vec_norm2};
use crate::operators::{ensure_spectrum_off_negative_axis, spectral_norm, OperatorMatrix};

/// Exponent-margin below which the prefactor–integral cancellation of the
/// Balakrishnan-type rules goes numerically bad; exponents this close to a
/// range endpoint (or to an excluded integer) are rejected.
pub const ALPHA_MARGIN: f64 = 1e-3;

/// Node/weight engine controls for the split singular-weight integrals.
#[derive(Debug, Clone)]
pub struct QuadratureScheme {
    /// Convergence gate: relative spectral-norm change under node doubling.
    pub rel_tol: f64,
    /// How many times the node count may be doubled.
    pub max_doublings: usize,
    /// Where `(0, ∞)` is split; head covers `(0, c]`, tail `[c, ∞)`.
    pub split_point: f64,
    /// Node count per segment at the first level.
    pub base_nodes: usize,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        QuadratureScheme {
            rel_tol: 1e-8,
            max_doublings: 8,
            split_point: 1.0,
            base_nodes: 32,
        }
    }
}

impl QuadratureScheme {
    /// Checks the field invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::params("rel_tol must lie in (0, 1)"));
        }
        if self.max_doublings < 1 {
            return Err(Error::params("max_doublings must be at least 1"));
        }
        if !(self.split_point > 0.0 && self.split_point.is_finite()) {
            return Err(Error::params("split_point must be positive and finite"));
        }
        if self.base_nodes < 8 {
            return Err(Error::params("base_nodes must be at least 8"));
        }
        Ok(())
    }
}

/// Gauss–Jacobi rule on `[0, 1]` for the weight `u^beta`, `beta > −1`:
/// `∫₀¹ u^β f(u) du ≈ Σ weights[i] · f(nodes[i])`, exact for polynomials `f`
/// up to degree `2·len − 1`.
#[derive(Debug, Clone)]
pub struct GaussJacobiRule {
    pub beta: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussJacobiRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Builds the `n`-point Gauss–Jacobi rule on `[0, 1]` with weight `u^beta`
/// by the Golub–Welsch method: eigenvalues of the symmetric tridiagonal
/// recurrence matrix give the nodes, squared first eigenvector components
/// (scaled by the weight's total mass) give the weights.
pub fn gauss_jacobi_01(n: usize, beta: f64) -> Result<GaussJacobiRule> {
    if n == 0 {
        return Err(Error::params("quadrature rule needs at least one node"));
    }
    if beta.is_nan() || beta <= -1.0 {
        return Err(Error::params(format!(
            "Jacobi weight exponent must exceed -1, got {beta}"
        )));
    }
    // Three-term recurrence coefficients for the weight (1+x)^beta on
    // [-1, 1] (the Jacobi parameters are a = 0, b = beta).
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n.saturating_sub(1)];
    d[0] = beta / (beta + 2.0);
    for k in 1..n {
        let t = 2.0 * k as f64 + beta;
        d[k] = beta * beta / (t * (t + 2.0));
        let kf = k as f64;
        let num = 4.0 * kf * kf * (kf + beta) * (kf + beta);
        let den = t * t * (t * t - 1.0);
        e[k - 1] = (num / den).sqrt();
    }
    let mu0 = 2.0f64.powf(beta + 1.0) / (beta + 1.0);

    let mut z = vec![0.0f64; n];
    z[0] = 1.0;
    imtqlx(&mut d, &e, &mut z)?;

    // Map [-1, 1] → [0, 1]: u = (1+x)/2 turns (1+x)^beta dx into
    // 2^{beta+1} u^beta du, so the mapped weights divide by that factor.
    let scale = 2.0f64.powf(beta + 1.0);
    let nodes: Vec<f64> = d.iter().map(|&x| 0.5 * (1.0 + x)).collect();
    let weights: Vec<f64> = z.iter().map(|&zi| mu0 * zi * zi / scale).collect();
    Ok(GaussJacobiRule {
        beta,
        nodes,
        weights,
    })
}

/// Implicit-QL eigensolver for a symmetric tridiagonal matrix, carrying the
/// first components of the eigenvectors in `z` (the Golub–Welsch weight
/// vector). `d` holds the diagonal on entry and the ascending eigenvalues on
/// exit; `off` holds the `n−1` off-diagonal entries.
fn imtqlx(d: &mut [f64], off: &[f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    // Working copy padded with a zero sentinel so the sweep may touch
    // index n−1 when no interior off-diagonal is negligible.
    let mut e = off.to_vec();
    e.push(0.0);
    let prec = f64::EPSILON;
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find the first negligible off-diagonal at or after l.
            let mut m = l;
            while m < n - 1 {
                if e[m].abs() <= prec * (d[m].abs() + d[m + 1].abs()) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter >= 30 {
                return Err(Error::EigenFailure);
            }
            iter += 1;

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = (g * g + 1.0).sqrt();
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                if f.abs() >= g.abs() {
                    c = g / f;
                    r = (c * c + 1.0).sqrt();
                    e[i + 1] = f * r;
                    s = 1.0 / r;
                    c *= s;
                } else {
                    s = f / g;
                    r = (s * s + 1.0).sqrt();
                    e[i + 1] = g * r;
                    c = 1.0 / r;
                    s *= c;
                }
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    // Sort eigenvalues ascending, permuting z alongside.
    for i in 1..n {
        let (di, zi) = (d[i], z[i]);
        let mut j = i;
        while j > 0 && d[j - 1] > di {
            d[j] = d[j - 1];
            z[j] = z[j - 1];
            j -= 1;
        }
        d[j] = di;
        z[j] = zi;
    }
    Ok(())
}

/// Integrates a split pair of matrix-valued segment integrands with node
/// doubling. `head(u)` and `tail(u)` return the smooth factors (everything
/// except the `u^β` weight) on their `(0, 1]` parameterizations.
pub(crate) fn integrate_split_matrix<H, T>(
    scheme: &QuadratureScheme,
    head_beta: f64,
    tail_beta: f64,
    head: H,
    tail: T,
) -> Result<OperatorMatrix>
where
    H: FnMut(f64) -> Result<OperatorMatrix>,
    T: FnMut(f64) -> Result<OperatorMatrix>,
{
    integrate_split_matrix_traced(scheme, head_beta, tail_beta, head, tail).map(|(v, _)| v)
}

/// [`integrate_split_matrix`] returning the relative-change history (one
/// entry per doubling), for convergence diagnostics.
pub(crate) fn integrate_split_matrix_traced<H, T>(
    scheme: &QuadratureScheme,
    head_beta: f64,
    tail_beta: f64,
    mut head: H,
    mut tail: T,
) -> Result<(OperatorMatrix, Vec<f64>)>
where
    H: FnMut(f64) -> Result<OperatorMatrix>,
    T: FnMut(f64) -> Result<OperatorMatrix>,
{
    let mut prev: Option<OperatorMatrix> = None;
    let mut history = Vec::new();
    for level in 0..=scheme.max_doublings {
        let nodes = scheme.base_nodes << level;
        let head_rule = gauss_jacobi_01(nodes, head_beta)?;
        let tail_rule = gauss_jacobi_01(nodes, tail_beta)?;
        let mut terms = Vec::with_capacity(2 * nodes);
        for (&u, &w) in head_rule.nodes.iter().zip(head_rule.weights.iter()) {
            terms.push(head(u)?.scale_real(w));
        }
        for (&u, &w) in tail_rule.nodes.iter().zip(tail_rule.weights.iter()) {
            terms.push(tail(u)?.scale_real(w));
        }
        let value = pairwise_sum_matrices(terms);
        if let Some(ref p) = prev {
            let dist = spectral_norm(&(&value - p));
            let rel = dist / spectral_norm(&value).max(f64::MIN_POSITIVE);
            history.push(rel);
            if rel <= scheme.rel_tol {
                return Ok((value, history));
            }
            if level == scheme.max_doublings {
                return Err(Error::NotConverged(Box::new(ConvergenceFailure {
                    rows: value.dim(),
                    cols: value.dim(),
                    last: value.entries().to_vec(),
                    previous: p.entries().to_vec(),
                    distance: rel,
                    nodes,
                })));
            }
        }
        prev = Some(value);
    }
    unreachable!("the doubling loop either returns a value or a failure")
}

/// Vector-valued counterpart of [`integrate_split_matrix`]; convergence is
/// measured in the relative 2-norm.
pub(crate) fn integrate_split_vector<H, T>(
    scheme: &QuadratureScheme,
    head_beta: f64,
    tail_beta: f64,
    mut head: H,
    mut tail: T,
) -> Result<Vec<Complex64>>
where
    H: FnMut(f64) -> Result<Vec<Complex64>>,
    T: FnMut(f64) -> Result<Vec<Complex64>>,
{
    let scale_vec = |mut v: Vec<Complex64>, w: f64| {
        for z in v.iter_mut() {
            *z *= w;
        }
        v
    };
    let mut prev: Option<Vec<Complex64>> = None;
    for level in 0..=scheme.max_doublings {
        let nodes = scheme.base_nodes << level;
        let head_rule = gauss_jacobi_01(nodes, head_beta)?;
        let tail_rule = gauss_jacobi_01(nodes, tail_beta)?;
        let mut terms = Vec::with_capacity(2 * nodes);
        for (&u, &w) in head_rule.nodes.iter().zip(head_rule.weights.iter()) {
            terms.push(scale_vec(head(u)?, w));
        }
        for (&u, &w) in tail_rule.nodes.iter().zip(tail_rule.weights.iter()) {
            terms.push(scale_vec(tail(u)?, w));
        }
        let value = pairwise_sum_vectors(terms);
        if let Some(ref p) = prev {
            let rel = vec_dist2(&value, p) / vec_norm2(&value).max(f64::MIN_POSITIVE);
            if rel <= scheme.rel_tol {
                return Ok(value);
            }
            if level == scheme.max_doublings {
                return Err(Error::NotConverged(Box::new(ConvergenceFailure {
                    rows: value.len(),
                    cols: 1,
                    last: value,
                    previous: p.clone(),
                    distance: rel,
                    nodes,
                })));
            }
        }
        prev = Some(value);
    }
    unreachable!("the doubling loop either returns a value or a failure")
}

fn check_alpha_unit_interval(alpha: f64) -> Result<()> {
    if !(ALPHA_MARGIN..=1.0 - ALPHA_MARGIN).contains(&alpha) {
        return Err(Error::InvalidAlpha {
            alpha,
            detail: format!(
                "single-resolvent rule needs alpha in ({ALPHA_MARGIN}, {})",
                1.0 - ALPHA_MARGIN
            ),
        });
    }
    Ok(())
}

/// `A^{−α}` for `0 < α < 1` from the single-resolvent representation
/// `sin(πα)/π · ∫₀^∞ s^{−α} (s+A)^{−1} ds`.
pub fn balakrishnan_e1(
    a: &OperatorMatrix,
    alpha: f64,
    scheme: &QuadratureScheme,
) -> Result<OperatorMatrix> {
    scheme.validate()?;
    check_alpha_unit_interval(alpha)?;
    ensure_spectrum_off_negative_axis(a)?;
    let c = scheme.split_point;
    let scale = c.powf(1.0 - alpha);
    // Head s = c·u: c^{1−α} ∫ u^{−α} (cu+A)^{−1} du.
    let head = |u: f64| -> Result<OperatorMatrix> {
        let s = c * u;
        let lu = lu_factor(&a.shift(Complex64::new(s, 0.0))).ok_or(Error::SingularResolvent {
            s: Complex64::new(s, 0.0),
        })?;
        Ok(lu.inverse().scale_real(scale))
    };
    // Tail s = c/u: c^{1−α} ∫ u^{α−1} (c + uA)^{−1} du.
    let tail = |u: f64| -> Result<OperatorMatrix> {
        let m = a.scale_real(u).shift(Complex64::new(c, 0.0));
        let lu = lu_factor(&m).ok_or(Error::SingularResolvent {
            s: Complex64::new(c / u, 0.0),
        })?;
        Ok(lu.inverse().scale_real(scale))
    };
    let integral = integrate_split_matrix(scheme, -alpha, alpha - 1.0, head, tail)?;
    Ok(integral.scale_real((PI * alpha).sin() / PI))
}

/// `A^{−α}` for `0 < α < m+1`, `α` non-integer, from the iterated-resolvent
/// representation with weight `s^{m−α}` and kernel `(s+A)^{−(m+1)}`.
pub fn balakrishnan_e2(
    a: &OperatorMatrix,
    alpha: f64,
    m: usize,
    scheme: &QuadratureScheme,
) -> Result<OperatorMatrix> {
    scheme.validate()?;
    if m < 1 {
        return Err(Error::params("iterated-resolvent rule needs m >= 1"));
    }
    let top = m as f64 + 1.0;
    if !(ALPHA_MARGIN..=top - ALPHA_MARGIN).contains(&alpha)
        || (alpha - alpha.round()).abs() < ALPHA_MARGIN
    {
        return Err(Error::InvalidAlpha {
            alpha,
            detail: format!(
                "iterated-resolvent rule needs alpha in (0, {top}) at least {ALPHA_MARGIN} away \
                 from every integer"
            ),
        });
    }
    ensure_spectrum_off_negative_axis(a)?;
    let c = scheme.split_point;
    let scale = c.powf(top - alpha);
    let power = m + 1;
    let id = OperatorMatrix::identity(a.dim());
    let repeated_inverse = |mat: OperatorMatrix, s: f64| -> Result<OperatorMatrix> {
        let lu = lu_factor(&mat).ok_or(Error::SingularResolvent {
            s: Complex64::new(s, 0.0),
        })?;
        // (·)^{−(m+1)} by repeated solves against one factorization.
        let mut x = id.clone();
        for _ in 0..power {
            x = lu.solve_mat(&x);
        }
        Ok(x.scale_real(scale))
    };
    // Head s = c·u: weight u^{m−α}, kernel (cu+A)^{−(m+1)}.
    let head = |u: f64| repeated_inverse(a.shift(Complex64::new(c * u, 0.0)), c * u);
    // Tail s = c/u: weight u^{α−1}, kernel (c+uA)^{−(m+1)}.
    let tail = |u: f64| repeated_inverse(a.scale_real(u).shift(Complex64::new(c, 0.0)), c / u);
    let integral = integrate_split_matrix(scheme, m as f64 - alpha, alpha - 1.0, head, tail)?;
    let mut coef = (PI * alpha).sin() / PI;
    for j in 1..=m {
        coef *= j as f64 / (j as f64 - alpha);
    }
    Ok(integral.scale_real(coef))
}

/// `A^{−α}·x` for `−1 < α < 1`, `α ≠ 0`, from the squared-resolvent
/// representation `sin(πα)/(πα) · ∫₀^∞ s^{−α} (s+A)^{−2} A·x ds`.
///
/// Negative `α` yields positive powers: the prefactor is even in `α` and the
/// weight exponent flips sign, so one formula covers the whole range.
pub fn balakrishnan_e3_apply(
    a: &OperatorMatrix,
    alpha: f64,
    x: &[Complex64],
    scheme: &QuadratureScheme,
) -> Result<Vec<Complex64>> {
    scheme.validate()?;
    if !(ALPHA_MARGIN..=1.0 - ALPHA_MARGIN).contains(&alpha.abs()) {
        return Err(Error::InvalidAlpha {
            alpha,
            detail: format!(
                "squared-resolvent rule needs |alpha| in ({ALPHA_MARGIN}, {})",
                1.0 - ALPHA_MARGIN
            ),
        });
    }
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            detail: format!(
                "vector length {} vs operator dimension {}",
                x.len(),
                a.dim()
            ),
        });
    }
    ensure_spectrum_off_negative_axis(a)?;
    let y = a.mul_vec(x);
    let c = scheme.split_point;
    let scale = Complex64::new(c.powf(1.0 - alpha), 0.0);
    let squared_solve = |mat: OperatorMatrix, s: f64| -> Result<Vec<Complex64>> {
        let lu = lu_factor(&mat).ok_or(Error::SingularResolvent {
            s: Complex64::new(s, 0.0),
        })?;
        let mut v = lu.solve_vec(&y);
        v = lu.solve_vec(&v);
        for z in v.iter_mut() {
            *z *= scale;
        }
        Ok(v)
    };
    // Head s = c·u: weight u^{−α}, kernel (cu+A)^{−2}·y.
    let head = |u: f64| squared_solve(a.shift(Complex64::new(c * u, 0.0)), c * u);
    // Tail s = c/u: weight u^{+α}, kernel (c+uA)^{−2}·y.
    let tail = |u: f64| squared_solve(a.scale_real(u).shift(Complex64::new(c, 0.0)), c / u);
    let integral = integrate_split_vector(scheme, -alpha, alpha, head, tail)?;
    let prefactor = (PI * alpha).sin() / (PI * alpha);
    Ok(integral.into_iter().map(|z| z * prefactor).collect())
}

/// `∫₀^∞ s^exponent · (s+A)^{−p} ds` for a literal weight exponent.
///
/// Divergence is checked up front: the weight must be integrable at the
/// origin (`exponent > −1`) and the kernel decay must win at infinity
/// (`exponent − p < −1`).
pub fn weighted_resolvent_integral(
    a: &OperatorMatrix,
    exponent: f64,
    p: usize,
    scheme: &QuadratureScheme,
) -> Result<OperatorMatrix> {
    scheme.validate()?;
    if p < 1 {
        return Err(Error::params("resolvent power p must be at least 1"));
    }
    if exponent <= -1.0 {
        return Err(Error::DivergentIntegral {
            detail: format!("weight s^{exponent} is not integrable at the origin"),
        });
    }
    if exponent - p as f64 >= -1.0 {
        return Err(Error::DivergentIntegral {
            detail: format!("s^{exponent}·(s+A)^{{-{p}}} decays too slowly at infinity"),
        });
    }
    ensure_spectrum_off_negative_axis(a)?;
    let c = scheme.split_point;
    let scale = c.powf(exponent + 1.0);
    let id = OperatorMatrix::identity(a.dim());
    let repeated_inverse = |mat: OperatorMatrix, s: f64| -> Result<OperatorMatrix> {
        let lu = lu_factor(&mat).ok_or(Error::SingularResolvent {
            s: Complex64::new(s, 0.0),
        })?;
        let mut x = id.clone();
        for _ in 0..p {
            x = lu.solve_mat(&x);
        }
        Ok(x.scale_real(scale))
    };
    let head = |u: f64| repeated_inverse(a.shift(Complex64::new(c * u, 0.0)), c * u);
    let tail = |u: f64| repeated_inverse(a.scale_real(u).shift(Complex64::new(c, 0.0)), c / u);
    integrate_split_matrix(scheme, exponent, p as f64 - exponent - 2.0, head, tail)
}

/// `∫₀^∞ s^{−γ} (ω·s^θ + A)^{−1} ds`, integrated directly (no analytic
/// substitution) so the predicted closed form can be tested rather than
/// assumed. The engine substitutes `s = t²` internally purely to keep the
/// integrand smooth for half-integer `θ`; that substitution is exact.
pub fn change_of_variables_integral(
    a: &OperatorMatrix,
    gamma: f64,
    omega: f64,
    theta: f64,
    scheme: &QuadratureScheme,
) -> Result<OperatorMatrix> {
    scheme.validate()?;
    validate_change_of_variables(gamma, omega, theta)?;
    ensure_spectrum_off_negative_axis(a)?;
    let c = scheme.split_point;
    let croot = c.sqrt();
    let scale = c.powf(1.0 - gamma);
    // After s = t², split at t = √c: I = 2∫₀^∞ t^{1−2γ}(ω t^{2θ} + A)^{−1} dt.
    // Head t = √c·u: 2c^{1−γ} ∫ u^{1−2γ} (ω c^θ u^{2θ} + A)^{−1} du.
    let head = |u: f64| -> Result<OperatorMatrix> {
        let s = c * u * u;
        let shift = omega * (croot * u).powf(2.0 * theta);
        let lu =
            lu_factor(&a.shift(Complex64::new(shift, 0.0))).ok_or(Error::SingularResolvent {
                s: Complex64::new(s, 0.0),
            })?;
        Ok(lu.inverse().scale_real(2.0 * scale))
    };
    // Tail t = √c/u: 2c^{1−γ} ∫ u^{2γ+2θ−3} (ω c^θ + u^{2θ} A)^{−1} du.
    let tail = |u: f64| -> Result<OperatorMatrix> {
        let s = c / (u * u);
        let m = a
            .scale_real(u.powf(2.0 * theta))
            .shift(Complex64::new(omega * c.powf(theta), 0.0));
        let lu = lu_factor(&m).ok_or(Error::SingularResolvent {
            s: Complex64::new(s, 0.0),
        })?;
        Ok(lu.inverse().scale_real(2.0 * scale))
    };
    integrate_split_matrix(
        scheme,
        1.0 - 2.0 * gamma,
        2.0 * gamma + 2.0 * theta - 3.0,
        head,
        tail,
    )
}

/// Scale and exponent of the closed form the change-of-variables integral
/// must reproduce: the integral equals `scale · A^{−exponent}` with
/// `exponent = 1 + (γ−1)/θ` and `scale = (1/θ)(1/ω)^{(1−γ)/θ}·π/sin(π·exponent)`.
pub fn change_of_variables_prediction(gamma: f64, omega: f64, theta: f64) -> Result<(f64, f64)> {
    validate_change_of_variables(gamma, omega, theta)?;
    let beta = 1.0 + (gamma - 1.0) / theta;
    let scale = (1.0 / theta) * (1.0 / omega).powf((1.0 - gamma) / theta) * PI / (PI * beta).sin();
    Ok((scale, beta))
}

fn validate_change_of_variables(gamma: f64, omega: f64, theta: f64) -> Result<()> {
    if !(omega > 0.0 && omega.is_finite()) || !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::params(
            "change of variables needs omega > 0 and theta > 0",
        ));
    }
    let beta = 1.0 + (gamma - 1.0) / theta;
    if !(ALPHA_MARGIN..=1.0 - ALPHA_MARGIN).contains(&beta) {
        return Err(Error::params(format!(
            "gamma = {gamma} leaves the admissible range (1 - theta, 1): \
             the mapped exponent {beta} must lie in ({ALPHA_MARGIN}, {})",
            1.0 - ALPHA_MARGIN
        )));
    }
    Ok(())
}

/// `sin(πα)/π · ∫₀^∞ s^{−α} (s+A₂)^{−1} (s+A₁)^{−1} ds` — the product-of-
/// resolvents integral whose closed form is
/// `(A₁−A₂)^{−1}[A₂^{−α} − A₁^{−α}]` for commuting operators.
pub fn resolvent_product_integral(
    a1: &OperatorMatrix,
    a2: &OperatorMatrix,
    alpha: f64,
    scheme: &QuadratureScheme,
) -> Result<OperatorMatrix> {
    scheme.validate()?;
    check_alpha_unit_interval(alpha)?;
    if a1.dim() != a2.dim() {
        return Err(Error::DimensionMismatch {
            detail: format!("operator dimensions {} vs {}", a1.dim(), a2.dim()),
        });
    }
    ensure_spectrum_off_negative_axis(a1)?;
    ensure_spectrum_off_negative_axis(a2)?;
    let c = scheme.split_point;
    let scale = c.powf(1.0 - alpha);
    let product = |m1: OperatorMatrix, m2: OperatorMatrix, s: f64| -> Result<OperatorMatrix> {
        let singular = || Error::SingularResolvent {
            s: Complex64::new(s, 0.0),
        };
        let r1 = lu_factor(&m1).ok_or_else(singular)?.inverse();
        let lu2 = lu_factor(&m2).ok_or_else(singular)?;
        Ok(lu2.solve_mat(&r1).scale_real(scale))
    };
    // Head s = c·u: weight u^{−α}; tail s = c/u: weight u^{+α} (one factor u
    // per resolvent is absorbed analytically).
    let head = |u: f64| {
        let s = c * u;
        product(
            a1.shift(Complex64::new(s, 0.0)),
            a2.shift(Complex64::new(s, 0.0)),
            s,
        )
    };
    let tail = |u: f64| {
        product(
            a1.scale_real(u).shift(Complex64::new(c, 0.0)),
            a2.scale_real(u).shift(Complex64::new(c, 0.0)),
            c / u,
        )
    };
    let integral = integrate_split_matrix(scheme, -alpha, alpha, head, tail)?;
    Ok(integral.scale_real((PI * alpha).sin() / PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn jacobi_rule_reproduces_moments() {
        // ∫₀¹ u^β u^k du = 1/(β+k+1); an n-point rule is exact to k = 2n−1.
        for &beta in &[-0.75, -0.5, 0.0, 0.5, 1.75] {
            let n = 8;
            let rule = gauss_jacobi_01(n, beta).unwrap();
            for k in 0..2 * n {
                let approx: f64 = rule
                    .nodes
                    .iter()
                    .zip(rule.weights.iter())
                    .map(|(&u, &w)| w * u.powi(k as i32))
                    .sum();
                let exact = 1.0 / (beta + k as f64 + 1.0);
                assert!(
                    (approx - exact).abs() <= 1e-12 * exact.abs(),
                    "beta {beta}, moment {k}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn jacobi_rule_rejects_nonintegrable_weight() {
        assert!(gauss_jacobi_01(8, -1.0).is_err());
        assert!(gauss_jacobi_01(0, 0.0).is_err());
    }

    #[test]
    fn scalar_identity_across_alpha_grid() {
        // For A = [[1]] the integral is π/sin(πα) exactly, so the rule's
        // output must be [[1.0]] to the scheme tolerance.
        let a = OperatorMatrix::from_real(1, &[1.0]).unwrap();
        let scheme = QuadratureScheme::default();
        for i in 1..=9 {
            let alpha = i as f64 / 10.0;
            let v = balakrishnan_e1(&a, alpha, &scheme).unwrap();
            assert!(
                (v.at(0, 0) - c64(1.0)).norm() <= 1e-8,
                "alpha {alpha}: {}",
                v.at(0, 0)
            );
        }
    }

    #[test]
    fn single_resolvent_rule_on_diagonals() {
        let scheme = QuadratureScheme::default();
        let a = OperatorMatrix::diag_real(&[1.0, 4.0]);
        let v = balakrishnan_e1(&a, 0.5, &scheme).unwrap();
        assert!((v.at(0, 0) - c64(1.0)).norm() < 1e-8);
        assert!((v.at(1, 1) - c64(0.5)).norm() < 1e-8);
        assert!(v.at(0, 1).norm() < 1e-12 && v.at(1, 0).norm() < 1e-12);

        let id = OperatorMatrix::identity(3);
        let v = balakrishnan_e1(&id, 0.3, &scheme).unwrap();
        for i in 0..3 {
            assert!((v.at(i, i) - c64(1.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn single_resolvent_rule_rejects_endpoint_alpha() {
        let a = OperatorMatrix::identity(2);
        let scheme = QuadratureScheme::default();
        for alpha in [0.0, 1.0, 0.9999, 1e-4, -0.5] {
            let err = balakrishnan_e1(&a, alpha, &scheme).unwrap_err();
            assert!(matches!(err, Error::InvalidAlpha { .. }), "{alpha}: {err}");
        }
    }

    #[test]
    fn iterated_resolvent_rule_matches_known_powers() {
        let scheme = QuadratureScheme::default();
        let a = OperatorMatrix::from_real(1, &[1.0]).unwrap();
        let v = balakrishnan_e2(&a, 0.5, 1, &scheme).unwrap();
        assert!((v.at(0, 0) - c64(1.0)).norm() < 1e-8, "{}", v.at(0, 0));

        // alpha > 1 exercises the extended range.
        let a = OperatorMatrix::diag_real(&[1.0, 4.0]);
        let v = balakrishnan_e2(&a, 1.5, 1, &scheme).unwrap();
        assert!((v.at(0, 0) - c64(1.0)).norm() < 1e-8);
        assert!((v.at(1, 1) - c64(0.125)).norm() < 1e-8, "{}", v.at(1, 1));

        let id = OperatorMatrix::identity(2);
        let v = balakrishnan_e2(&id, 2.5, 2, &scheme).unwrap();
        assert!((v.at(0, 0) - c64(1.0)).norm() < 1e-8);
        assert!((v.at(1, 1) - c64(1.0)).norm() < 1e-8);
    }

    #[test]
    fn iterated_resolvent_rule_rejects_integer_alpha() {
        let a = OperatorMatrix::identity(2);
        let scheme = QuadratureScheme::default();
        for alpha in [1.0, 2.0, 1.0005, 0.0] {
            let err = balakrishnan_e2(&a, alpha, 2, &scheme).unwrap_err();
            assert!(matches!(err, Error::InvalidAlpha { .. }), "{alpha}: {err}");
        }
        assert!(balakrishnan_e2(&a, 0.5, 0, &scheme).is_err());
    }

    #[test]
    fn squared_resolvent_apply_matches_scalar_powers() {
        let scheme = QuadratureScheme::default();
        let a = OperatorMatrix::from_real(1, &[2.0]).unwrap();
        let v = balakrishnan_e3_apply(&a, 0.5, &[c64(1.0)], &scheme).unwrap();
        assert!((v[0] - c64(2.0f64.powf(-0.5))).norm() < 1e-8, "{}", v[0]);

        // Negative alpha: positive power.
        let a = OperatorMatrix::diag_real(&[1.0, 4.0]);
        let v = balakrishnan_e3_apply(&a, -0.5, &[c64(0.0), c64(1.0)], &scheme).unwrap();
        assert!(v[0].norm() < 1e-10);
        assert!((v[1] - c64(2.0)).norm() < 1e-8, "{}", v[1]);

        let id = OperatorMatrix::identity(2);
        let e1 = vec![c64(1.0), c64(0.0)];
        let v = balakrishnan_e3_apply(&id, -0.5, &e1, &scheme).unwrap();
        assert!((v[0] - c64(1.0)).norm() < 1e-8);
        assert!(v[1].norm() < 1e-10);
    }

    #[test]
    fn squared_resolvent_apply_rejects_bad_alpha() {
        let a = OperatorMatrix::identity(2);
        let scheme = QuadratureScheme::default();
        let x = vec![c64(1.0), c64(0.0)];
        for alpha in [0.0, 1.0, -1.0, 5e-4] {
            let err = balakrishnan_e3_apply(&a, alpha, &x, &scheme).unwrap_err();
            assert!(matches!(err, Error::InvalidAlpha { .. }), "{alpha}: {err}");
        }
    }

    #[test]
    fn weighted_integral_reproduces_known_values() {
        let scheme = QuadratureScheme::default();
        // ∫ s^{1/2}(s+1)^{−2} ds with exponent = 1−γ, γ = 1/2 → π/2·(1−γ)… = π/2.
        let a = OperatorMatrix::from_real(1, &[1.0]).unwrap();
        let v = weighted_resolvent_integral(&a, 0.5, 2, &scheme).unwrap();
        assert!((v.at(0, 0) - c64(PI / 2.0)).norm() < 1e-8, "{}", v.at(0, 0));

        // ∫ s^{−1/2}(s+a)^{−1} ds = π·a^{−1/2} per diagonal entry.
        let a = OperatorMatrix::diag_real(&[1.0, 4.0]);
        let v = weighted_resolvent_integral(&a, -0.5, 1, &scheme).unwrap();
        assert!((v.at(0, 0) - c64(PI)).norm() < 1e-8);
        assert!((v.at(1, 1) - c64(PI / 2.0)).norm() < 1e-8);
    }

    #[test]
    fn weighted_integral_rejects_divergent_exponents() {
        let a = OperatorMatrix::from_real(1, &[1.0]).unwrap();
        let scheme = QuadratureScheme::default();
        let err = weighted_resolvent_integral(&a, 0.0, 1, &scheme).unwrap_err();
        assert!(matches!(err, Error::DivergentIntegral { .. }), "{err}");
        let err = weighted_resolvent_integral(&a, -1.0, 2, &scheme).unwrap_err();
        assert!(matches!(err, Error::DivergentIntegral { .. }), "{err}");
        let err = weighted_resolvent_integral(&a, 1.5, 2, &scheme).unwrap_err();
        assert!(matches!(err, Error::DivergentIntegral { .. }), "{err}");
    }

    #[test]
    fn change_of_variables_matches_scalar_prediction() {
        let scheme = QuadratureScheme::default();
        let a = OperatorMatrix::from_real(1, &[1.0]).unwrap();
        // γ = 1/2, ω = 1, θ = 2 → β = 3/4, value π/(2·sin(3π/4)) = π/√2.
        let v = change_of_variables_integral(&a, 0.5, 1.0, 2.0, &scheme).unwrap();
        let expected = PI / (2.0 * (PI * 0.75).sin());
        assert!(
            (v.at(0, 0) - c64(expected)).norm() < 1e-8,
            "{} vs {expected}",
            v.at(0, 0)
        );
        let (scale, beta) = change_of_variables_prediction(0.5, 1.0, 2.0).unwrap();
        assert!((beta - 0.75).abs() < 1e-15);
        assert!((scale - expected).abs() < 1e-12);
    }

    #[test]
    fn change_of_variables_rejects_boundary_gamma() {
        let a = OperatorMatrix::from_real(1, &[1.0]).unwrap();
        let scheme = QuadratureScheme::default();
        // γ = 0, θ = 1 puts the mapped exponent at the boundary value 0.
        let err = change_of_variables_integral(&a, 0.0, 1.0, 1.0, &scheme).unwrap_err();
        assert!(matches!(err, Error::InvalidParams { .. }), "{err}");
        let err = change_of_variables_integral(&a, 0.5, -1.0, 2.0, &scheme).unwrap_err();
        assert!(matches!(err, Error::InvalidParams { .. }), "{err}");
    }

    #[test]
    fn resolvent_product_integral_scalar_case() {
        let scheme = QuadratureScheme::default();
        let a1 = OperatorMatrix::from_real(1, &[2.0]).unwrap();
        let a2 = OperatorMatrix::from_real(1, &[1.0]).unwrap();
        let v = resolvent_product_integral(&a1, &a2, 0.5, &scheme).unwrap();
        // (A₁−A₂)^{−1}(A₂^{−α} − A₁^{−α}) = 1 − 2^{−1/2}.
        let expected = 1.0 - 2.0f64.powf(-0.5);
        assert!(
            (v.at(0, 0) - c64(expected)).norm() < 1e-8,
            "{} vs {expected}",
            v.at(0, 0)
        );
    }

    #[test]
    fn doubling_distances_shrink() {
        // Weak monotonicity of the node-doubling history: the last recorded
        // relative change is no larger than the first.
        let lap = OperatorMatrix::from_fn(4, |i, j| {
            let v = if i == j {
                2.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            };
            Complex64::new(v * 25.0, 0.0)
        });
        let scheme = QuadratureScheme {
            rel_tol: 1e-12,
            ..QuadratureScheme::default()
        };
        let alpha = 0.5;
        let c = scheme.split_point;
        let scale = c.powf(1.0 - alpha);
        let head = |u: f64| -> Result<OperatorMatrix> {
            Ok(lu_factor(&lap.shift(c64(c * u)))
                .unwrap()
                .inverse()
                .scale_real(scale))
        };
        let tail = |u: f64| -> Result<OperatorMatrix> {
            Ok(lu_factor(&lap.scale_real(u).shift(c64(c)))
                .unwrap()
                .inverse()
                .scale_real(scale))
        };
        let (_, history) =
            integrate_split_matrix_traced(&scheme, -alpha, alpha - 1.0, head, tail).unwrap();
        assert!(history.len() >= 2, "need at least two doublings to compare");
        assert!(
            history.last().unwrap() <= history.first().unwrap(),
            "history {history:?}"
        );
    }

    #[test]
    fn starved_scheme_reports_nonconvergence() {
        let a = OperatorMatrix::diag_real(&[1.0, 2.5e6]);
        let scheme = QuadratureScheme {
            rel_tol: 1e-12,
            max_doublings: 1,
            split_point: 1.0,
            base_nodes: 8,
        };
        let err = balakrishnan_e1(&a, 0.5, &scheme).unwrap_err();
        match err {
            Error::NotConverged(fail) => {
                assert_eq!(fail.rows, 2);
                assert_eq!(fail.cols, 2);
                assert_eq!(fail.nodes, 16);
                assert!(fail.distance > 1e-12);
                assert_eq!(fail.last.len(), 4);
                assert_eq!(fail.previous.len(), 4);
            }
            other => panic!("expected NotConverged, got {other}"),
        }
    }
}
