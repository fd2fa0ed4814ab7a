//! Helpers shared by the integration suites: constructors pairing each
//! evolution-system layout with its closed-form family power.

#![allow(dead_code)]

use fracop::block3::BlockOperator3;
use fracop::closed_forms::{
    lambda1_fracpow, lambda1_fracpow_extended, lambda312_fracpow, lambda312_fracpow_extended,
    lambda3_fracpow, lambda3_fracpow_extended, lambda4_fracpow, lambda4_fracpow_extended, Sign,
};
use fracop::pde::{build_system, DirichletLaplacian, SystemKind};

pub const TRIPLE_COEFFS: [f64; 3] = [1.0, 2.0, 3.0];

pub const ALL_KINDS: [SystemKind; 4] = [
    SystemKind::Heat,
    SystemKind::Oscillator,
    SystemKind::TripleDiffusion,
    SystemKind::Wave,
];

pub fn coefficients_for(kind: SystemKind) -> Option<[f64; 3]> {
    match kind {
        SystemKind::TripleDiffusion => Some(TRIPLE_COEFFS),
        _ => None,
    }
}

pub fn family_block(kind: SystemKind, lap: &DirichletLaplacian) -> BlockOperator3 {
    build_system(kind, lap, coefficients_for(kind)).unwrap()
}

/// Closed-form family power matching the system layout of `kind`.
pub fn closed_power(
    kind: SystemKind,
    lap: &DirichletLaplacian,
    alpha: f64,
    sign: Sign,
) -> BlockOperator3 {
    let a = &lap.matrix;
    match kind {
        SystemKind::Heat => lambda1_fracpow(a, alpha, sign).unwrap(),
        SystemKind::Oscillator => lambda312_fracpow(a, alpha, sign).unwrap(),
        SystemKind::Wave => lambda4_fracpow(a, alpha, sign).unwrap(),
        SystemKind::TripleDiffusion => lambda3_fracpow(
            &a.scale_real(TRIPLE_COEFFS[0]),
            &a.scale_real(TRIPLE_COEFFS[1]),
            &a.scale_real(TRIPLE_COEFFS[2]),
            alpha,
            sign,
        )
        .unwrap(),
    }
}

/// Like [`closed_power`] but with the `alpha = 1` continuity extension on.
pub fn closed_power_extended(
    kind: SystemKind,
    lap: &DirichletLaplacian,
    alpha: f64,
    sign: Sign,
) -> BlockOperator3 {
    let a = &lap.matrix;
    match kind {
        SystemKind::Heat => lambda1_fracpow_extended(a, alpha, sign, true).unwrap(),
        SystemKind::Oscillator => lambda312_fracpow_extended(a, alpha, sign, true).unwrap(),
        SystemKind::Wave => lambda4_fracpow_extended(a, alpha, sign, true).unwrap(),
        SystemKind::TripleDiffusion => lambda3_fracpow_extended(
            &a.scale_real(TRIPLE_COEFFS[0]),
            &a.scale_real(TRIPLE_COEFFS[1]),
            &a.scale_real(TRIPLE_COEFFS[2]),
            alpha,
            sign,
            true,
        )
        .unwrap(),
    }
}
