//! Serialization of the library's exchange formats: matrix and block-matrix
//! JSON, positivity-certificate JSON, evolution scenario JSON, and the two
//! CSV layouts (spectrum point sets and trajectories).
//!
//! All functions here work on strings; callers own the file handles. Matrix
//! entries are row-major and may be written either as plain numbers or as
//! `[re, im]` pairs — readers accept both forms, and writers use plain
//! numbers whenever every entry is real so that real data stays readable.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::block3::{assemble, BlockOperator3};
use crate::closed_forms::SpectrumReport;
use crate::error::{Error, Result};
use crate::operators::{OperatorMatrix, PositivityCertificate};
use crate::pde::{EvolutionMethod, EvolutionResult, SystemKind};

/// One matrix entry on disk: a bare number for real values or `[re, im]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum EntryRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl EntryRepr {
    fn to_complex(self) -> Complex64 {
        match self {
            EntryRepr::Real(re) => Complex64::new(re, 0.0),
            EntryRepr::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    dim: usize,
    entries: Vec<EntryRepr>,
}

impl MatrixFile {
    fn from_matrix(m: &OperatorMatrix) -> Self {
        let n = m.dim();
        let all_real = (0..n).all(|i| (0..n).all(|j| m.at(i, j).im == 0.0));
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let z = m.at(i, j);
                if all_real {
                    EntryRepr::Real(z.re)
                } else {
                    EntryRepr::Pair([z.re, z.im])
                }
            })
            .collect();
        MatrixFile { dim: n, entries }
    }

    fn into_matrix(self) -> Result<OperatorMatrix> {
        if self.dim == 0 {
            return Err(Error::parse("matrix dimension must be at least 1"));
        }
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::parse(format!(
                "matrix of dim {} needs {} entries, found {}",
                self.dim,
                self.dim * self.dim,
                self.entries.len()
            )));
        }
        let values: Vec<Complex64> = self.entries.iter().map(|e| e.to_complex()).collect();
        let m = OperatorMatrix::from_fn(self.dim, |i, j| values[i * self.dim + j]);
        if !m.is_finite() {
            return Err(Error::parse("matrix entries must be finite"));
        }
        Ok(m)
    }
}

/// Parses `{"dim": n, "entries": [...]}` with row-major entries.
pub fn read_matrix_json(text: &str) -> Result<OperatorMatrix> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("matrix JSON: {e}")))?;
    file.into_matrix()
}

/// Serializes a matrix to the exchange format, one entry list row-major.
pub fn write_matrix_json(m: &OperatorMatrix) -> String {
    serde_json::to_string_pretty(&MatrixFile::from_matrix(m)).expect("matrix serialization")
}

#[derive(Debug, Serialize, Deserialize)]
struct BlockFile {
    n: usize,
    blocks: Vec<Vec<MatrixFile>>,
}

/// Parses `{"n": n, "blocks": [[matrix, matrix, matrix], ...]}` where each
/// inner object uses the matrix JSON format with `dim = n`.
pub fn read_block_json(text: &str) -> Result<BlockOperator3> {
    let file: BlockFile =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("block JSON: {e}")))?;
    if file.blocks.len() != 3 || file.blocks.iter().any(|row| row.len() != 3) {
        return Err(Error::parse("block JSON needs a 3×3 grid of matrices"));
    }
    let mut parsed: Vec<OperatorMatrix> = Vec::with_capacity(9);
    for (i, row) in file.blocks.into_iter().enumerate() {
        for (j, entry) in row.into_iter().enumerate() {
            if entry.dim != file.n {
                return Err(Error::parse(format!(
                    "block ({i},{j}) has dim {} but the file declares n = {}",
                    entry.dim, file.n
                )));
            }
            parsed.push(entry.into_matrix()?);
        }
    }
    let mut it = parsed.into_iter();
    let mut grab = || it.next().expect("nine parsed blocks");
    assemble([
        [grab(), grab(), grab()],
        [grab(), grab(), grab()],
        [grab(), grab(), grab()],
    ])
}

/// Serializes a block operator to the nested exchange format.
pub fn write_block_json(b: &BlockOperator3) -> String {
    let blocks = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| MatrixFile::from_matrix(b.entry(i, j)))
                .collect()
        })
        .collect();
    let file = BlockFile { n: b.n(), blocks };
    serde_json::to_string_pretty(&file).expect("block serialization")
}

/// Serializes a positivity certificate (`M`, `theta_M`, `r0`, `sup_bound`,
/// `grid`).
pub fn write_certificate_json(c: &PositivityCertificate) -> String {
    serde_json::to_string_pretty(c).expect("certificate serialization")
}

/// Parses a certificate back; used to round-trip CI artifacts.
pub fn read_certificate_json(text: &str) -> Result<PositivityCertificate> {
    serde_json::from_str(text).map_err(|e| Error::parse(format!("certificate JSON: {e}")))
}

/// Renders a spectrum report as CSV with one row per eigenvalue:
/// `re_base,im_base,re_pred,im_pred,re_obs,im_obs,residual`.
pub fn spectrum_csv(report: &SpectrumReport) -> String {
    let mut out = String::from("re_base,im_base,re_pred,im_pred,re_obs,im_obs,residual\n");
    for k in 0..report.base_eigs.len() {
        let b = report.base_eigs[k];
        let p = report.predicted[k];
        let o = report.observed[k];
        let residual = (o - p).norm();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            b.re, b.im, p.re, p.im, o.re, o.im, residual
        ));
    }
    out
}

/// Renders a trajectory as long-format CSV: `t,component,value_re,value_im`,
/// every component of every saved state on its own row.
pub fn trajectory_csv(result: &EvolutionResult) -> String {
    let mut out = String::from("t,component,value_re,value_im\n");
    for (t, state) in result.times.iter().zip(result.states.iter()) {
        for (component, value) in state.iter().enumerate() {
            out.push_str(&format!("{t},{component},{},{}\n", value.re, value.im));
        }
    }
    out
}

/// Initial state selector inside a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// All components zero.
    Zero,
    /// Normalized lowest Laplacian eigenmode in the first component block.
    FirstMode,
    /// Explicit `3n` state vector.
    Explicit(Vec<Complex64>),
}

/// A parsed evolution scenario, shape-checked but not yet validated against
/// the mathematical preconditions (those stay with the solvers).
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: SystemKind,
    pub n: usize,
    pub length: f64,
    /// `Some` selects the fractional system `Λ^alpha`; `None` the classical
    /// one.
    pub alpha: Option<f64>,
    pub dt: f64,
    pub t_final: f64,
    /// Diffusion coefficients, only meaningful for the triple-diffusion
    /// system.
    pub coefficients: Option<[f64; 3]>,
    pub initial: InitialState,
    pub method: EvolutionMethod,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum InitialRepr {
    Named(String),
    Explicit(Vec<EntryRepr>),
}

#[derive(Debug, Deserialize)]
struct ScenarioFile {
    kind: String,
    n: usize,
    length: f64,
    #[serde(default)]
    alpha: Option<f64>,
    dt: f64,
    #[serde(rename = "T")]
    t_final: f64,
    #[serde(default)]
    a: Option<[f64; 3]>,
    u0: InitialRepr,
    #[serde(default)]
    method: Option<String>,
}

/// Parses a scenario file:
/// `{"kind", "n", "length", "alpha": real|null, "dt", "T",
///   "a": [a1,a2,a3]|null, "u0": "zero"|"first_mode"|array,
///   "method": "implicit-euler"|"eigen-exact" (optional)}`.
pub fn read_scenario_json(text: &str) -> Result<Scenario> {
    let file: ScenarioFile =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("scenario JSON: {e}")))?;
    let kind: SystemKind = file
        .kind
        .parse()
        .map_err(|_| Error::parse(format!("scenario JSON: unknown kind {:?}", file.kind)))?;
    let initial = match file.u0 {
        InitialRepr::Named(name) => match name.as_str() {
            "zero" => InitialState::Zero,
            "first_mode" => InitialState::FirstMode,
            other => {
                return Err(Error::parse(format!(
                    "scenario JSON: u0 must be \"zero\", \"first_mode\", or an array, got {other:?}"
                )))
            }
        },
        InitialRepr::Explicit(entries) => {
            InitialState::Explicit(entries.into_iter().map(|e| e.to_complex()).collect())
        }
    };
    let method = match file.method.as_deref() {
        None | Some("implicit-euler") => EvolutionMethod::ImplicitEuler,
        Some("eigen-exact") => EvolutionMethod::EigenExact,
        Some(other) => {
            return Err(Error::parse(format!(
                "scenario JSON: method must be \"implicit-euler\" or \"eigen-exact\", got {other:?}"
            )))
        }
    };
    Ok(Scenario {
        kind,
        n: file.n,
        length: file.length,
        alpha: file.alpha,
        dt: file.dt,
        t_final: file.t_final,
        coefficients: file.a,
        initial,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::spectrum_report;
    use crate::operators::certify_positive;
    use crate::operators::GridSpec;
    use crate::pde::{build_system, evolve, DirichletLaplacian};

    #[test]
    fn matrix_json_round_trips_real_and_complex() {
        let real = OperatorMatrix::from_real(2, &[1.0, 0.5, -0.25, 3.0]).unwrap();
        let text = write_matrix_json(&real);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(
            value["entries"][0].is_number(),
            "real matrices serialize with plain numbers: {text}"
        );
        assert_eq!(read_matrix_json(&text).unwrap(), real);

        let complex = OperatorMatrix::from_fn(2, |i, j| Complex64::new(i as f64, j as f64 + 0.5));
        let text = write_matrix_json(&complex);
        assert_eq!(read_matrix_json(&text).unwrap(), complex);
    }

    #[test]
    fn matrix_json_accepts_mixed_entry_forms() {
        let text = r#"{"dim": 2, "entries": [1.0, [0.0, 1.0], -2, [3.5, 0.0]]}"#;
        let m = read_matrix_json(text).unwrap();
        assert_eq!(m.at(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(m.at(0, 1), Complex64::new(0.0, 1.0));
        assert_eq!(m.at(1, 0), Complex64::new(-2.0, 0.0));
        assert_eq!(m.at(1, 1), Complex64::new(3.5, 0.0));
    }

    #[test]
    fn matrix_json_rejects_malformed_input() {
        for bad in [
            r#"{"dim": 2, "entries": [1, 2, 3]}"#,
            r#"{"dim": 0, "entries": []}"#,
            r#"{"entries": [1]}"#,
            "not json",
            r#"{"dim": 1, "entries": ["x"]}"#,
        ] {
            let err = read_matrix_json(bad).unwrap_err();
            assert!(matches!(err, Error::Parse { .. }), "{bad}");
        }
    }

    #[test]
    fn block_json_round_trips() {
        let a = OperatorMatrix::from_real(2, &[4.0, -1.0, -1.0, 4.0]).unwrap();
        let zero = OperatorMatrix::zeros(2);
        let id = OperatorMatrix::identity(2);
        let b = assemble([
            [a.clone(), zero.clone(), zero.clone()],
            [zero.clone(), a.clone(), zero.clone()],
            [id, zero.clone(), a.clone()],
        ])
        .unwrap();
        let text = write_block_json(&b);
        let back = read_block_json(&text).unwrap();
        assert_eq!(back.assembled(), b.assembled());
    }

    #[test]
    fn block_json_rejects_shape_mismatches() {
        let one = r#"{"dim": 1, "entries": [1.0]}"#;
        let two = r#"{"dim": 2, "entries": [1, 0, 0, 1]}"#;
        let row = format!("[{one}, {one}, {one}]");
        let bad_grid = format!(r#"{{"n": 1, "blocks": [{row}, {row}]}}"#);
        assert!(matches!(
            read_block_json(&bad_grid).unwrap_err(),
            Error::Parse { .. }
        ));
        let bad_dim = format!(r#"{{"n": 1, "blocks": [{row}, {row}, [{one}, {two}, {one}]]}}"#);
        let err = read_block_json(&bad_dim).unwrap_err();
        assert!(
            matches!(&err, Error::Parse { detail } if detail.contains("(2,1)")),
            "{err}"
        );
    }

    #[test]
    fn certificate_json_uses_contract_keys() {
        let a = OperatorMatrix::diag_real(&[1.0, 2.0]);
        let cert = certify_positive(&a, &GridSpec::default()).unwrap();
        let text = write_certificate_json(&cert);
        for key in [
            "\"M\"",
            "\"theta_M\"",
            "\"r0\"",
            "\"sup_bound\"",
            "\"grid\"",
        ] {
            assert!(text.contains(key), "missing {key} in {text}");
        }
        let back = read_certificate_json(&text).unwrap();
        assert_eq!(back.m, cert.m);
        assert_eq!(back.s_grid.len(), cert.s_grid.len());
    }

    #[test]
    fn spectrum_csv_has_one_row_per_eigenvalue() {
        let a = OperatorMatrix::diag_real(&[4.0]);
        let zero = OperatorMatrix::zeros(1);
        let id = OperatorMatrix::identity(1);
        let b = assemble([
            [zero.clone(), zero.clone(), -&id],
            [zero.clone(), a.clone(), zero.clone()],
            [a.clone(), zero.clone(), zero.clone()],
        ])
        .unwrap();
        let power =
            crate::closed_forms::lambda4_fracpow(&a, 0.5, crate::closed_forms::Sign::Positive)
                .unwrap();
        let report = spectrum_report(&b, 0.5, power.assembled()).unwrap();
        let csv = spectrum_csv(&report);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(
            lines[0],
            "re_base,im_base,re_pred,im_pred,re_obs,im_obs,residual"
        );
        assert_eq!(lines.len(), 1 + 3, "header plus one row per eigenvalue");
        for row in &lines[1..] {
            assert_eq!(row.split(',').count(), 7, "row {row}");
        }
    }

    #[test]
    fn trajectory_csv_is_long_format() {
        let lap = DirichletLaplacian::new(1, 1.0).unwrap();
        let b = build_system(SystemKind::Heat, &lap, None).unwrap();
        let u0 = vec![Complex64::new(1.0, 0.0); 3];
        let f = vec![Complex64::new(0.0, 0.0); 3];
        let r = evolve(&b, &u0, &f, 0.5, 1.0, EvolutionMethod::ImplicitEuler).unwrap();
        let csv = trajectory_csv(&r);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "t,component,value_re,value_im");
        // Three saved states (t = 0, 0.5, 1) with three components each.
        assert_eq!(lines.len(), 1 + 3 * 3);
        assert_eq!(lines[1], "0,0,1,0");
    }

    #[test]
    fn scenario_json_parses_all_fields() {
        let text = r#"{
            "kind": "triple-diffusion",
            "n": 4,
            "length": 1.0,
            "alpha": 0.5,
            "dt": 0.001,
            "T": 1.0,
            "a": [1.0, 2.0, 3.0],
            "u0": "first_mode",
            "method": "implicit-euler"
        }"#;
        let s = read_scenario_json(text).unwrap();
        assert_eq!(s.kind, SystemKind::TripleDiffusion);
        assert_eq!(s.n, 4);
        assert_eq!(s.alpha, Some(0.5));
        assert_eq!(s.coefficients, Some([1.0, 2.0, 3.0]));
        assert_eq!(s.initial, InitialState::FirstMode);
        assert_eq!(s.method, EvolutionMethod::ImplicitEuler);
    }

    #[test]
    fn scenario_json_defaults_and_explicit_state() {
        let text = r#"{
            "kind": "heat",
            "n": 1,
            "length": 1.0,
            "alpha": null,
            "dt": 0.1,
            "T": 1.0,
            "a": null,
            "u0": [1.0, [0.0, -1.0], 0.25]
        }"#;
        let s = read_scenario_json(text).unwrap();
        assert_eq!(s.alpha, None);
        assert_eq!(s.coefficients, None);
        assert_eq!(s.method, EvolutionMethod::ImplicitEuler);
        match &s.initial {
            InitialState::Explicit(v) => {
                assert_eq!(v.len(), 3);
                assert_eq!(v[1], Complex64::new(0.0, -1.0));
            }
            other => panic!("expected explicit state, got {other:?}"),
        }
    }

    #[test]
    fn scenario_json_rejects_bad_fields() {
        let base = |kind: &str, u0: &str, method: &str| {
            format!(
                r#"{{"kind": "{kind}", "n": 1, "length": 1.0, "dt": 0.1, "T": 1.0,
                    "u0": {u0}{method}}}"#
            )
        };
        let err = read_scenario_json(&base("diffusion", "\"zero\"", "")).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        let err = read_scenario_json(&base("heat", "\"third_mode\"", "")).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        let err =
            read_scenario_json(&base("heat", "\"zero\"", r#", "method": "rk4""#)).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        assert!(read_scenario_json("{}").is_err());
    }
}
