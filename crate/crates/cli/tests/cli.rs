//! End-to-end tests of the `fracop` binary: exit-code contract, file
//! formats, route comparisons, and byte-level determinism of data files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracop::block3::assemble;
use fracop::io::{read_block_json, read_matrix_json, write_block_json};
use fracop::operators::OperatorMatrix;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fracop")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

/// Lower-triangular coupling layout over `a`, as block JSON.
fn coupling_block_json(a: &OperatorMatrix) -> String {
    let n = a.dim();
    let zero = OperatorMatrix::zeros(n);
    let id = OperatorMatrix::identity(n);
    let b = assemble([
        [a.clone(), zero.clone(), zero.clone()],
        [zero.clone(), a.clone(), zero.clone()],
        [id, zero.clone(), a.clone()],
    ])
    .unwrap();
    write_block_json(&b)
}

#[test]
fn certify_identity_reports_unit_bound() {
    let dir = tempfile::tempdir().unwrap();
    write_file(
        dir.path(),
        "id.json",
        r#"{"dim": 2, "entries": [1, 0, 0, 1]}"#,
    );
    let out = run(dir.path(), &["certify", "id.json"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cert["M"], 1.0);
    assert!((cert["theta_M"].as_f64().unwrap() - (0.5f64).asin()).abs() < 1e-15);
}

#[test]
fn certify_rejects_matrix_with_negative_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    write_file(
        dir.path(),
        "neg.json",
        r#"{"dim": 2, "entries": [-1, 0, 0, 1]}"#,
    );
    let out = run(dir.path(), &["certify", "neg.json"]);
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("not positive"), "{}", stderr(&out));
}

#[test]
fn io_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["certify", "missing.json"]);
    assert_eq!(exit_code(&out), 3, "{}", stderr(&out));

    write_file(dir.path(), "broken.json", "{not json");
    let out = run(dir.path(), &["certify", "broken.json"]);
    assert_eq!(exit_code(&out), 3, "{}", stderr(&out));
}

#[test]
fn fracpow_scalar_identity_through_oracle() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "one.json", r#"{"dim": 1, "entries": [1.0]}"#);
    let out = run(
        dir.path(),
        &[
            "fracpow", "one.json", "--alpha", "0.5", "--route", "oracle", "--out", "pow.json",
        ],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let m =
        read_matrix_json(&std::fs::read_to_string(dir.path().join("pow.json")).unwrap()).unwrap();
    assert!((m.at(0, 0).re - 1.0).abs() < 1e-14);
    assert_eq!(m.at(0, 0).im, 0.0);
}

#[test]
fn fracpow_rejects_alpha_one_for_single_resolvent_route() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "one.json", r#"{"dim": 1, "entries": [1.0]}"#);
    let out = run(
        dir.path(),
        &[
            "fracpow", "one.json", "--alpha", "1.0", "--route", "quad-e1",
        ],
    );
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
}

#[test]
fn fracpow_closed_route_agrees_with_oracle_on_block_input() {
    let dir = tempfile::tempdir().unwrap();
    let a = OperatorMatrix::from_real(2, &[2.0, -1.0, -1.0, 2.0]).unwrap();
    write_file(dir.path(), "block.json", &coupling_block_json(&a));
    let out = run(
        dir.path(),
        &[
            "fracpow",
            "block.json",
            "--alpha",
            "0.5",
            "--route",
            "closed:lambda1",
            "--route",
            "oracle",
            "--residual-tol",
            "1e-6",
            "--out",
            "pow.json",
        ],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    assert!(
        stdout(&out).contains("closed:lambda1 vs oracle"),
        "{}",
        stdout(&out)
    );
    let m =
        read_matrix_json(&std::fs::read_to_string(dir.path().join("pow.json")).unwrap()).unwrap();
    assert_eq!(m.dim(), 6, "closed route writes the assembled power");
}

#[test]
fn fracpow_closed_route_requires_block_input() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "one.json", r#"{"dim": 1, "entries": [2.0]}"#);
    let out = run(
        dir.path(),
        &[
            "fracpow",
            "one.json",
            "--alpha",
            "0.5",
            "--route",
            "closed:lambda1",
        ],
    );
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("block JSON"), "{}", stderr(&out));
}

#[test]
fn fracpow_tolerance_breach_exits_four() {
    // On the coupling layout the assembled matrix is defective, so the dense
    // oracle is genuinely limited to ~1e-9 agreement with the closed form; a
    // much tighter requested tolerance must fail with the breach code.
    let dir = tempfile::tempdir().unwrap();
    let a = OperatorMatrix::from_real(2, &[2.0, -1.0, -1.0, 2.0]).unwrap();
    write_file(dir.path(), "block.json", &coupling_block_json(&a));
    let out = run(
        dir.path(),
        &[
            "fracpow",
            "block.json",
            "--alpha",
            "0.5",
            "--route",
            "closed:lambda1",
            "--route",
            "oracle",
            "--residual-tol",
            "1e-12",
        ],
    );
    assert_eq!(exit_code(&out), 4, "{}", stderr(&out));
}

#[test]
fn fracpow_rejects_mismatched_layout() {
    let dir = tempfile::tempdir().unwrap();
    let a = OperatorMatrix::from_real(1, &[2.0]).unwrap();
    write_file(dir.path(), "block.json", &coupling_block_json(&a));
    let out = run(
        dir.path(),
        &[
            "fracpow",
            "block.json",
            "--alpha",
            "0.5",
            "--route",
            "closed:lambda4",
        ],
    );
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("layout"), "{}", stderr(&out));
}

#[test]
fn block_fracpow_writes_result_and_compares_routes() {
    let dir = tempfile::tempdir().unwrap();
    let a = OperatorMatrix::from_real(2, &[2.0, -1.0, -1.0, 2.0]).unwrap();
    write_file(dir.path(), "block.json", &coupling_block_json(&a));
    let out = run(
        dir.path(),
        &[
            "block-fracpow",
            "block.json",
            "--alpha",
            "0.5",
            "--compare-assembled",
            "--out",
            "pow.json",
        ],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("cofactor route vs assembled route"));
    let b =
        read_block_json(&std::fs::read_to_string(dir.path().join("pow.json")).unwrap()).unwrap();
    assert_eq!(b.n(), 2);
}

#[test]
fn block_fracpow_rejects_noncommuting_entries() {
    let dir = tempfile::tempdir().unwrap();
    let x = OperatorMatrix::from_real(2, &[1.0, 2.0, 0.0, 3.0]).unwrap();
    let y = OperatorMatrix::from_real(2, &[4.0, 0.0, 1.0, 5.0]).unwrap();
    let zero = OperatorMatrix::zeros(2);
    let id = OperatorMatrix::identity(2);
    let b = assemble([
        [x.clone(), zero.clone(), zero.clone()],
        [zero.clone(), y, zero.clone()],
        [id, zero, x],
    ])
    .unwrap();
    write_file(dir.path(), "block.json", &write_block_json(&b));
    let out = run(
        dir.path(),
        &["block-fracpow", "block.json", "--alpha", "0.5"],
    );
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("non-commuting"), "{}", stderr(&out));
}

#[test]
fn spectrum_of_builtin_rotation_system() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "spectrum", "--kind", "wave", "--n", "3", "--alpha", "0.85", "--out", "spectrum.csv",
        ],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let lines: Vec<&str> = csv.trim_end().lines().collect();
    assert_eq!(
        lines[0],
        "re_base,im_base,re_pred,im_pred,re_obs,im_obs,residual"
    );
    assert_eq!(lines.len(), 1 + 9, "nine eigenvalues for n = 3");
}

#[test]
fn spectrum_of_scalar_three_generator_block_file() {
    let dir = tempfile::tempdir().unwrap();
    let zero = OperatorMatrix::zeros(1);
    let id = OperatorMatrix::identity(1);
    let b = assemble([
        [
            OperatorMatrix::from_real(1, &[2.0]).unwrap(),
            zero.clone(),
            zero.clone(),
        ],
        [
            zero.clone(),
            OperatorMatrix::from_real(1, &[3.0]).unwrap(),
            zero.clone(),
        ],
        [id, zero, OperatorMatrix::from_real(1, &[1.0]).unwrap()],
    ])
    .unwrap();
    write_file(dir.path(), "block.json", &write_block_json(&b));
    let out = run(
        dir.path(),
        &[
            "spectrum",
            "--input",
            "block.json",
            "--alpha",
            "0.5",
            "--out",
            "spectrum.csv",
        ],
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .trim_end()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let bases: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let preds: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    assert_eq!(bases, vec![1.0, 2.0, 3.0]);
    for (p, expect) in preds.iter().zip([1.0, 2.0f64.sqrt(), 3.0f64.sqrt()]) {
        assert!((p - expect).abs() < 1e-12, "{p} vs {expect}");
    }
}

#[test]
fn spectrum_residual_breach_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "spectrum",
            "--kind",
            "wave",
            "--n",
            "3",
            "--alpha",
            "0.85",
            "--residual-tol",
            "1e-30",
        ],
    );
    assert_eq!(exit_code(&out), 4, "{}", stderr(&out));
}

#[test]
fn pde_zero_scenario_yields_zero_trajectory_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write_file(
        dir.path(),
        "scen.json",
        r#"{"kind": "heat", "n": 2, "length": 1.0, "alpha": null,
            "dt": 0.01, "T": 0.1, "a": null, "u0": "zero"}"#,
    );
    let out = run(dir.path(), &["pde", "scen.json", "--out", "traj.csv"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("traj.csv")).unwrap();
    for line in csv.trim_end().lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[2], "0", "{line}");
        assert_eq!(fields[3], "0", "{line}");
    }
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("traj.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "pde");
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs
        .iter()
        .any(|o| o.as_str().unwrap().ends_with("traj.csv")));
    assert!(manifest["wall_time"].as_f64().unwrap() >= 0.0);
}

#[test]
fn pde_fractional_scenario_runs() {
    let dir = tempfile::tempdir().unwrap();
    write_file(
        dir.path(),
        "scen.json",
        r#"{"kind": "heat", "n": 2, "length": 1.0, "alpha": 0.5,
            "dt": 0.01, "T": 0.1, "a": null, "u0": "first_mode"}"#,
    );
    let out = run(dir.path(), &["pde", "scen.json", "--out", "traj.csv"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("alpha = 0.5"), "{}", stdout(&out));
}

#[test]
fn pde_rejects_equal_diffusion_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    write_file(
        dir.path(),
        "scen.json",
        r#"{"kind": "triple-diffusion", "n": 2, "length": 1.0, "alpha": null,
            "dt": 0.01, "T": 0.1, "a": [1.0, 1.0, 2.0], "u0": "zero"}"#,
    );
    let out = run(dir.path(), &["pde", "scen.json", "--out", "traj.csv"]);
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
}

#[test]
fn pde_bad_scenario_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "scen.json", r#"{"kind": "heat"}"#);
    let out = run(dir.path(), &["pde", "scen.json", "--out", "traj.csv"]);
    assert_eq!(exit_code(&out), 3, "{}", stderr(&out));
}

#[test]
fn verify_identities_passes_at_default_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify-identities"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("PASS").count(), 4, "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn data_files_are_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    write_file(
        dir.path(),
        "a.json",
        r#"{"dim": 2, "entries": [2.0, -1.0, -1.0, 2.0]}"#,
    );
    for (out_name, args) in [
        (
            "p1.json",
            [
                "fracpow", "a.json", "--alpha", "0.5", "--route", "quad-e1", "--out",
            ],
        ),
        (
            "p2.json",
            [
                "fracpow", "a.json", "--alpha", "0.5", "--route", "quad-e1", "--out",
            ],
        ),
    ] {
        let mut argv: Vec<&str> = args.to_vec();
        argv.push(out_name);
        let out = run(dir.path(), &argv);
        assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    }
    let first = std::fs::read(dir.path().join("p1.json")).unwrap();
    let second = std::fs::read(dir.path().join("p2.json")).unwrap();
    assert_eq!(first, second, "fracpow output must be deterministic");

    for name in ["s1.csv", "s2.csv"] {
        let out = run(
            dir.path(),
            &[
                "spectrum",
                "--kind",
                "oscillator",
                "--n",
                "2",
                "--alpha",
                "0.5",
                "--out",
                name,
            ],
        );
        assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    }
    let first = std::fs::read(dir.path().join("s1.csv")).unwrap();
    let second = std::fs::read(dir.path().join("s2.csv")).unwrap();
    assert_eq!(first, second, "spectrum output must be deterministic");
}
