//! Discretized evolution systems: 1-D Dirichlet Laplacians, the block
//! systems built over them, classical time stepping, and fractional-power
//! evolution `u′ + Λᵅu = 0`.
//!
//! Two propagators are provided. Implicit Euler factors `I + dt·Λ` once and
//! reuses it every step; the exact propagator evaluates `e^{−dt·Λ}` through
//! the same Schur-based machinery as the matrix oracle (the heat system's
//! matrix is defective, so an eigendecomposition would not be enough) and
//! serves as the reference the first-order method is measured against.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::block3::{assemble, BlockOperator3};
use crate::closed_forms::{
    lambda1_fracpow, lambda312_fracpow, lambda3_fracpow, lambda4_fracpow, Sign,
};
use crate::error::{Error, Result};
use crate::linalg::lu_factor;
use crate::operators::OperatorMatrix;
use crate::oracle::{matrix_exp, oracle_power};

/// Second-difference Dirichlet Laplacian on `(0, L)` with `n` interior
/// points: `tridiag(−1, 2, −1)·(n+1)²/L²`, together with its analytic
/// eigenvalues `μ_k = 2(n+1)²/L²·(1 − cos(kπ/(n+1)))`.
#[derive(Debug, Clone)]
pub struct DirichletLaplacian {
    pub n: usize,
    pub length: f64,
    pub matrix: OperatorMatrix,
    /// Analytic eigenvalues, strictly increasing, all positive.
    pub analytic_eigs: Vec<f64>,
}

impl DirichletLaplacian {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::params(
                "the Laplacian needs at least one interior point",
            ));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::params("interval length must be positive and finite"));
        }
        let scale = ((n + 1) as f64 / length).powi(2);
        let matrix = OperatorMatrix::from_fn(n, |i, j| {
            let v = if i == j {
                2.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            };
            Complex64::new(v * scale, 0.0)
        });
        let analytic_eigs = (1..=n)
            .map(|k| 2.0 * scale * (1.0 - (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos()))
            .collect();
        Ok(DirichletLaplacian {
            n,
            length,
            matrix,
            analytic_eigs,
        })
    }

    /// Unit-norm first eigenmode `sin(πj/(n+1))` embedded as the first
    /// component block of a `3n` state vector.
    pub fn first_mode_state(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut mode: Vec<f64> = (1..=n)
            .map(|j| (j as f64 * std::f64::consts::PI / (n + 1) as f64).sin())
            .collect();
        let norm = mode.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in mode.iter_mut() {
            *v /= norm;
        }
        let mut state = vec![Complex64::new(0.0, 0.0); 3 * n];
        for (j, v) in mode.into_iter().enumerate() {
            state[j] = Complex64::new(v, 0.0);
        }
        state
    }
}

/// Which block system to build over the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// Diffusion with identity coupling into a third component:
    /// `[[A,0,0],[0,A,0],[I,0,A]]`.
    Heat,
    /// Damped-oscillator order reduction:
    /// `[[0,−I,0],[A,2A^{1/2},0],[0,0,2A^{1/2}]]`.
    Oscillator,
    /// Three commuting diffusion operators with identity coupling:
    /// `[[a₁A,0,0],[0,a₂A,0],[I,0,a₃A]]`.
    TripleDiffusion,
    /// Rotation-type system with spectrum on the imaginary axis:
    /// `[[0,0,−I],[0,A,0],[A,0,0]]`.
    Wave,
}

impl SystemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SystemKind::Heat => "heat",
            SystemKind::Oscillator => "oscillator",
            SystemKind::TripleDiffusion => "triple-diffusion",
            SystemKind::Wave => "wave",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat" => Ok(SystemKind::Heat),
            "oscillator" => Ok(SystemKind::Oscillator),
            "triple-diffusion" => Ok(SystemKind::TripleDiffusion),
            "wave" => Ok(SystemKind::Wave),
            other => Err(Error::params(format!(
                "unknown system kind {other:?}; expected heat, oscillator, \
                 triple-diffusion, or wave"
            ))),
        }
    }
}

/// Assembles the chosen block system. `coefficients` is required by (and
/// only by) the triple-diffusion system, which needs three strictly
/// positive, pairwise distinct diffusion coefficients.
pub fn build_system(
    kind: SystemKind,
    lap: &DirichletLaplacian,
    coefficients: Option<[f64; 3]>,
) -> Result<BlockOperator3> {
    if kind != SystemKind::TripleDiffusion && coefficients.is_some() {
        return Err(Error::params(format!(
            "diffusion coefficients only apply to the triple-diffusion system, not {kind}"
        )));
    }
    let a = &lap.matrix;
    let n = lap.n;
    let zero = OperatorMatrix::zeros(n);
    let id = OperatorMatrix::identity(n);
    match kind {
        SystemKind::Heat => assemble([
            [a.clone(), zero.clone(), zero.clone()],
            [zero.clone(), a.clone(), zero.clone()],
            [id, zero.clone(), a.clone()],
        ]),
        SystemKind::Oscillator => {
            let root = oracle_power(a, 0.5)?.value;
            let twice_root = root.scale_real(2.0);
            assemble([
                [zero.clone(), -&id, zero.clone()],
                [a.clone(), twice_root.clone(), zero.clone()],
                [zero.clone(), zero.clone(), twice_root],
            ])
        }
        SystemKind::TripleDiffusion => {
            let coeffs = coefficients.ok_or_else(|| {
                Error::params("the triple-diffusion system needs three diffusion coefficients")
            })?;
            validate_triple_coefficients(&coeffs)?;
            let [a1, a2, a3] = coeffs;
            assemble([
                [a.scale_real(a1), zero.clone(), zero.clone()],
                [zero.clone(), a.scale_real(a2), zero.clone()],
                [id, zero.clone(), a.scale_real(a3)],
            ])
        }
        SystemKind::Wave => assemble([
            [zero.clone(), zero.clone(), -&id],
            [zero.clone(), a.clone(), zero.clone()],
            [a.clone(), zero.clone(), zero.clone()],
        ]),
    }
}

fn validate_triple_coefficients(coeffs: &[f64; 3]) -> Result<()> {
    if coeffs.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(Error::params(
            "diffusion coefficients must be strictly positive",
        ));
    }
    if coeffs[0] == coeffs[1] || coeffs[0] == coeffs[2] || coeffs[1] == coeffs[2] {
        return Err(Error::params(
            "diffusion coefficients must be pairwise distinct",
        ));
    }
    Ok(())
}

/// Propagator selection for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolutionMethod {
    /// First order: `U_{k+1} = (I + dt·Λ)^{−1}(U_k + dt·F)`.
    ImplicitEuler,
    /// Exact on each step: `U(t) = e^{−tΛ}(U₀ − Λ^{−1}F) + Λ^{−1}F`.
    EigenExact,
}

impl fmt::Display for EvolutionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvolutionMethod::ImplicitEuler => write!(f, "IMPLICIT_EULER"),
            EvolutionMethod::EigenExact => write!(f, "EIGEN_EXACT"),
        }
    }
}

/// A computed trajectory: `states[k]` is the state at `times[k]`, with
/// `times[0] = 0` and `states[0]` the supplied initial condition.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub method: EvolutionMethod,
    /// Power of the system matrix that generated the evolution (1 for the
    /// classical system).
    pub alpha: f64,
}

fn validate_stepping(dim: usize, u0: &[Complex64], dt: f64, t_final: f64) -> Result<usize> {
    if u0.len() != dim {
        return Err(Error::DimensionMismatch {
            detail: format!("state length {} vs system dimension {dim}", u0.len()),
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::params("dt must be positive and finite"));
    }
    if !(t_final >= dt && t_final.is_finite()) {
        return Err(Error::params("final time must be at least dt"));
    }
    Ok((t_final / dt).round().max(1.0) as usize)
}

fn implicit_euler_steps(
    matrix: &OperatorMatrix,
    u0: &[Complex64],
    forcing: &[Complex64],
    dt: f64,
    n_steps: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let dim = matrix.dim();
    let stepped = OperatorMatrix::from_fn(dim, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        Complex64::new(delta, 0.0) + matrix.at(i, j) * dt
    });
    let lu = lu_factor(&stepped).ok_or(Error::SingularStep)?;
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(u0.to_vec());
    let mut current = u0.to_vec();
    for _ in 0..n_steps {
        let rhs: Vec<Complex64> = current
            .iter()
            .zip(forcing.iter())
            .map(|(&u, &f)| u + f * dt)
            .collect();
        current = lu.solve_vec(&rhs);
        states.push(current.clone());
    }
    Ok(states)
}

/// Time-steps `dU/dt + Λ·U = F` with constant forcing from `u0` to
/// `t_final` in steps of `dt` (step count is `round(t_final/dt)`).
pub fn evolve(
    b: &BlockOperator3,
    u0: &[Complex64],
    forcing: &[Complex64],
    dt: f64,
    t_final: f64,
    method: EvolutionMethod,
) -> Result<EvolutionResult> {
    let matrix = b.assembled();
    let dim = matrix.dim();
    let n_steps = validate_stepping(dim, u0, dt, t_final)?;
    if forcing.len() != dim {
        return Err(Error::DimensionMismatch {
            detail: format!("forcing length {} vs system dimension {dim}", forcing.len()),
        });
    }
    let states = match method {
        EvolutionMethod::ImplicitEuler => implicit_euler_steps(matrix, u0, forcing, dt, n_steps)?,
        EvolutionMethod::EigenExact => {
            // U(t+dt) = E·(U(t) − w) + w with E = e^{−dt·Λ} and w = Λ^{−1}F
            // (variation of constants for constant forcing).
            let propagator = matrix_exp(&matrix.scale_real(-dt))?.value;
            let zero_forcing = forcing.iter().all(|f| f.norm() == 0.0);
            let w = if zero_forcing {
                vec![Complex64::new(0.0, 0.0); dim]
            } else {
                lu_factor(matrix)
                    .ok_or(Error::SingularStep)?
                    .solve_vec(forcing)
            };
            let mut states = Vec::with_capacity(n_steps + 1);
            states.push(u0.to_vec());
            let mut current = u0.to_vec();
            for _ in 0..n_steps {
                let shifted: Vec<Complex64> = current
                    .iter()
                    .zip(w.iter())
                    .map(|(&u, &wi)| u - wi)
                    .collect();
                let pushed = propagator.mul_vec(&shifted);
                current = pushed
                    .iter()
                    .zip(w.iter())
                    .map(|(&p, &wi)| p + wi)
                    .collect();
                states.push(current.clone());
            }
            states
        }
    };
    let times = (0..=n_steps).map(|k| k as f64 * dt).collect();
    Ok(EvolutionResult {
        times,
        states,
        method,
        alpha: 1.0,
    })
}

/// Evolves the unforced fractional system `dU/dt + Λᵅ·U = 0` by implicit
/// Euler, with `Λᵅ` from the closed-form positive-power formulas.
pub fn fractional_evolve(
    kind: SystemKind,
    lap: &DirichletLaplacian,
    coefficients: Option<[f64; 3]>,
    alpha: f64,
    u0: &[Complex64],
    dt: f64,
    t_final: f64,
) -> Result<EvolutionResult> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidAlpha {
            alpha,
            detail: "fractional evolution needs alpha in (0, 1)".into(),
        });
    }
    let a = &lap.matrix;
    let powered = match kind {
        SystemKind::Heat => {
            reject_coefficients(kind, &coefficients)?;
            lambda1_fracpow(a, alpha, Sign::Positive)?
        }
        SystemKind::Oscillator => {
            reject_coefficients(kind, &coefficients)?;
            lambda312_fracpow(a, alpha, Sign::Positive)?
        }
        SystemKind::Wave => {
            reject_coefficients(kind, &coefficients)?;
            lambda4_fracpow(a, alpha, Sign::Positive)?
        }
        SystemKind::TripleDiffusion => {
            let coeffs = coefficients.ok_or_else(|| {
                Error::params("the triple-diffusion system needs three diffusion coefficients")
            })?;
            validate_triple_coefficients(&coeffs)?;
            lambda3_fracpow(
                &a.scale_real(coeffs[0]),
                &a.scale_real(coeffs[1]),
                &a.scale_real(coeffs[2]),
                alpha,
                Sign::Positive,
            )?
        }
    };
    let dim = powered.assembled().dim();
    let n_steps = validate_stepping(dim, u0, dt, t_final)?;
    let forcing = vec![Complex64::new(0.0, 0.0); dim];
    let states = implicit_euler_steps(powered.assembled(), u0, &forcing, dt, n_steps)?;
    let times = (0..=n_steps).map(|k| k as f64 * dt).collect();
    Ok(EvolutionResult {
        times,
        states,
        method: EvolutionMethod::ImplicitEuler,
        alpha,
    })
}

fn reject_coefficients(kind: SystemKind, coefficients: &Option<[f64; 3]>) -> Result<()> {
    if coefficients.is_some() {
        return Err(Error::params(format!(
            "diffusion coefficients only apply to the triple-diffusion system, not {kind}"
        )));
    }
    Ok(())
}
