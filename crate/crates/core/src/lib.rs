//! Numerical operator calculus for fractional powers of positive operators.
//!
//! Everything here acts on dense complex matrices standing in for
//! (discretized) positive operators. The library computes fractional powers
//! `A^z` by three mutually independent routes and is built so the routes can
//! be cross-checked against each other:
//!
//! 1. **Quadrature** ([`quadrature`]) — real-axis integral representations
//!    built from resolvents alone, evaluated with Gauss–Jacobi rules that
//!    absorb the endpoint singularities, plus node-doubling convergence
//!    control.
//! 2. **Closed forms** ([`closed_forms`]) — explicit block formulas for four
//!    families of 3×3 block operator matrices whose fractional powers are
//!    known entrywise.
//! 3. **Dense oracle** ([`oracle`]) — principal matrix powers through an
//!    eigendecomposition or a Schur-form recurrence with eigenvalue
//!    clustering, used as ground truth by the other routes.
//!
//! Supporting modules: [`operators`] (operator type, resolvents, positivity
//! certificates), [`block3`] (3×3 block assembly, the adjugate resolvent
//! formula and its guardrails), [`pde`] (discretized Dirichlet Laplacian and
//! evolution problems), [`linalg`] (the dense complex kernels), and [`io`]
//! (JSON/CSV interchange formats).
//!
//! All operations are pure functions of immutable inputs with fixed
//! evaluation order, so identical inputs produce bit-identical results.

pub mod block3;
pub mod closed_forms;
pub mod error;
pub mod io;
// The factorization kernels keep the index loops of the reference
// algorithms; iterator rewrites would obscure the offset arithmetic.
#[allow(clippy::needless_range_loop)]
pub mod linalg;
pub mod operators;
pub mod oracle;
pub mod pde;
pub mod quadrature;

pub use error::{ConvergenceFailure, Error, Result};
pub use operators::{OperatorMatrix, PositivityCertificate};
