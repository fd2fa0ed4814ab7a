//! Command-line front door over the fractional-operator library: certify
//! positivity, compute fractional powers by independent routes and compare
//! them, map spectra through principal powers, run evolution scenarios, and
//! re-derive the library's integral identities as a self-test.
//!
//! Exit codes are stable so pipelines can tell inputs from methods apart:
//! `0` success, `2` a mathematical precondition failed, `3` an I/O or parse
//! problem, `4` a convergence failure or tolerance breach.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use fracop::block3::{
    assembled_fracpow_quadrature, block_fracpow_quadrature_with, BlockOperator3, BlockTolerances,
    DEFAULT_RESIDUAL_TOL,
};
use fracop::closed_forms::{
    lambda1_fracpow, lambda312_fracpow, lambda3_fracpow, lambda4_fracpow,
    resolvent_product_fracpow_with, spectrum_report, Sign,
};
use fracop::io::{
    read_block_json, read_matrix_json, read_scenario_json, spectrum_csv, trajectory_csv,
    write_block_json, write_certificate_json, write_matrix_json, InitialState,
};
use fracop::operators::{certify_positive, spectral_norm, GridSpec, OperatorMatrix};
use fracop::oracle::{oracle_power, relative_error};
use fracop::pde::{
    build_system, evolve, fractional_evolve, DirichletLaplacian, EvolutionMethod, SystemKind,
};
use fracop::quadrature::{
    balakrishnan_e1, balakrishnan_e2, change_of_variables_integral, change_of_variables_prediction,
    weighted_resolvent_integral, QuadratureScheme,
};
use fracop::{Error, Result};

const EXIT_MATH: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "fracop",
    version,
    about = "Fractional powers of positive operators and 3x3 block operator matrices",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify that an operator is positive and emit the certificate.
    Certify(CertifyArgs),
    /// Compute the inverse fractional power X^{-alpha} by one or more routes.
    Fracpow(FracpowArgs),
    /// Compute a block inverse power entrywise through operator cofactors.
    BlockFracpow(BlockFracpowArgs),
    /// Compare the spectrum of a computed power against the mapped base spectrum.
    Spectrum(SpectrumArgs),
    /// Run an evolution scenario and write the trajectory.
    Pde(PdeArgs),
    /// Re-derive the integral identities numerically and print a table.
    VerifyIdentities(VerifyIdentitiesArgs),
}

#[derive(Args)]
struct CertifyArgs {
    /// Matrix JSON file ({"dim": n, "entries": [...]}).
    matrix_file: PathBuf,
    /// Number of sample points on the resolvent grid.
    #[arg(long, default_value_t = 48)]
    points: usize,
    /// Smallest nonzero grid sample.
    #[arg(long, default_value_t = 1e-6)]
    s_min: f64,
    /// Largest sample as a multiple of max(1, norm of the matrix).
    #[arg(long, default_value_t = 1e3)]
    s_max_factor: f64,
    /// Write the certificate here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a run manifest here.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct FracpowArgs {
    /// Matrix JSON file, or block JSON when a closed-form route is used.
    input_file: PathBuf,
    /// Exponent: the command computes X^{-alpha}.
    #[arg(long)]
    alpha: f64,
    /// Route(s): quad-e1, quad-e2:<m>, closed:<lambda1|lambda312|lambda3|lambda4>,
    /// oracle. Repeat the flag to cross-validate; the first route's result is
    /// the one written out.
    #[arg(long = "route", required = true)]
    routes: Vec<String>,
    /// Write the first route's result matrix here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quadrature refinement stop: relative change between node-doubling levels.
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    /// When set, any pairwise route disagreement above this is a failure.
    #[arg(long)]
    residual_tol: Option<f64>,
    /// Write a run manifest here.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct BlockFracpowArgs {
    /// Block JSON file ({"n": n, "blocks": [[...], ...]}).
    block_file: PathBuf,
    /// Exponent: the command computes the block power for -alpha.
    #[arg(long)]
    alpha: f64,
    /// Write the resulting block operator here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quadrature refinement stop: relative change between node-doubling levels.
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    /// Residual bound for the per-node cofactor resolvent check.
    #[arg(long, default_value_t = DEFAULT_RESIDUAL_TOL)]
    residual_tol: f64,
    /// Override the commutation gate (defaults to a multiple of the entry scale).
    #[arg(long)]
    commutation_tol: Option<f64>,
    /// Also run the structure-blind route on the assembled matrix and report
    /// the relative gap between the two results.
    #[arg(long)]
    compare_assembled: bool,
    /// Write a run manifest here.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SpectrumSource {
    /// Block JSON file to analyze.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in system kind (heat, oscillator, triple-diffusion, wave) over a
    /// discrete Laplacian.
    #[arg(long)]
    kind: Option<SystemKind>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    source: SpectrumSource,
    /// Interior grid points of the Laplacian (with --kind).
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Interval length of the Laplacian (with --kind).
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    /// Diffusion coefficients a1,a2,a3 (triple-diffusion kind only).
    #[arg(long, value_delimiter = ',', num_args = 3)]
    a: Option<Vec<f64>>,
    /// Signed exponent z: the command compares spectra of X and X^z.
    #[arg(long)]
    alpha: f64,
    /// Write the spectrum point list here as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest allowed matched distance between predicted and observed points.
    #[arg(long, default_value_t = 1e-6)]
    residual_tol: f64,
    /// Write a run manifest here.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct PdeArgs {
    /// Scenario JSON file.
    scenario_file: PathBuf,
    /// Write the trajectory here as CSV.
    #[arg(long)]
    out: PathBuf,
    /// Write the run manifest here (default: next to the trajectory).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyIdentitiesArgs {
    /// Quadrature refinement stop: relative change between node-doubling levels.
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    /// Pass/fail threshold for every identity in the table.
    #[arg(long, default_value_t = 1e-6)]
    residual_tol: f64,
    /// Write a run manifest here.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

/// Record of one run: what was read and written, with which tolerances, how
/// long it took, and which checks passed. The wall time is the only
/// non-deterministic field; data files stay byte-identical across reruns.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    tolerances: BTreeMap<String, f64>,
    wall_time: f64,
    checks: Vec<ManifestCheck>,
}

#[derive(Serialize)]
struct ManifestCheck {
    name: String,
    passed: bool,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
}

struct ManifestBuilder {
    manifest: RunManifest,
    started: Instant,
    path: Option<PathBuf>,
}

impl ManifestBuilder {
    fn new(command: &str, path: Option<PathBuf>) -> Self {
        ManifestBuilder {
            manifest: RunManifest {
                command: command.to_string(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                tolerances: BTreeMap::new(),
                wall_time: 0.0,
                checks: Vec::new(),
            },
            started: Instant::now(),
            path,
        }
    }

    fn input(&mut self, path: &Path) {
        self.manifest.inputs.push(path.display().to_string());
    }

    fn tolerance(&mut self, name: &str, value: f64) {
        self.manifest.tolerances.insert(name.to_string(), value);
    }

    fn check(&mut self, name: &str, value: f64, tolerance: Option<f64>) -> bool {
        let passed = tolerance.is_none_or(|tol| value <= tol);
        self.manifest.checks.push(ManifestCheck {
            name: name.to_string(),
            passed,
            value,
            tolerance,
        });
        passed
    }

    fn write_output(&mut self, path: &Path, contents: &str) -> Result<()> {
        std::fs::write(path, contents)?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.manifest.wall_time = self.started.elapsed().as_secs_f64();
        if let Some(path) = self.path.take() {
            let text =
                serde_json::to_string_pretty(&self.manifest).expect("manifest serialization");
            std::fs::write(&path, text)?;
        }
        Ok(())
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Parse { .. } => EXIT_IO,
        Error::NotConverged(_)
        | Error::AdjugateFormulaFailed { .. }
        | Error::EigenFailure
        | Error::IllConditioned { .. }
        | Error::IllConditionedSimilarity { .. }
        | Error::OracleFailure { .. } => EXIT_TOLERANCE,
        _ => EXIT_MATH,
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Certify(args) => cmd_certify(args),
        Command::Fracpow(args) => cmd_fracpow(args),
        Command::BlockFracpow(args) => cmd_block_fracpow(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Pde(args) => cmd_pde(args),
        Command::VerifyIdentities(args) => cmd_verify_identities(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn cmd_certify(args: CertifyArgs) -> Result<u8> {
    let mut manifest = ManifestBuilder::new("certify", args.manifest.clone());
    manifest.input(&args.matrix_file);
    let matrix = read_matrix_json(&read_to_string(&args.matrix_file)?)?;
    let grid = GridSpec {
        points: args.points,
        s_min: args.s_min,
        s_max_factor: args.s_max_factor,
    };
    let cert = certify_positive(&matrix, &grid)?;
    manifest.check("resolvent_sup_bound", cert.sup_bound, Some(cert.m));
    let text = write_certificate_json(&cert);
    match &args.out {
        Some(path) => {
            manifest.write_output(path, &text)?;
            println!(
                "positive: M = {}, theta_M = {}, r0 = {} -> {}",
                cert.m,
                cert.theta_m,
                cert.r0,
                path.display()
            );
        }
        None => println!("{text}"),
    }
    manifest.finish()?;
    Ok(0)
}

/// One way of computing `X^{-alpha}`, parsed from a `--route` token.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Route {
    QuadE1,
    QuadE2 { m: usize },
    Closed { family: Family },
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Lambda1,
    Lambda312,
    Lambda3,
    Lambda4,
}

impl Route {
    fn parse(token: &str) -> Result<Route> {
        if token == "quad-e1" {
            return Ok(Route::QuadE1);
        }
        if token == "oracle" {
            return Ok(Route::Oracle);
        }
        if let Some(m) = token.strip_prefix("quad-e2:") {
            let m: usize = m
                .parse()
                .map_err(|_| Error::parse(format!("route {token:?}: m must be an integer")))?;
            return Ok(Route::QuadE2 { m });
        }
        if let Some(name) = token.strip_prefix("closed:") {
            let family = match name {
                "lambda1" => Family::Lambda1,
                "lambda312" => Family::Lambda312,
                "lambda3" => Family::Lambda3,
                "lambda4" => Family::Lambda4,
                other => {
                    return Err(Error::parse(format!(
                        "unknown closed-form family {other:?}; expected lambda1, lambda312, \
                         lambda3, or lambda4"
                    )))
                }
            };
            return Ok(Route::Closed { family });
        }
        Err(Error::parse(format!(
            "unknown route {token:?}; expected quad-e1, quad-e2:<m>, closed:<family>, or oracle"
        )))
    }

    fn label(&self) -> String {
        match self {
            Route::QuadE1 => "quad-e1".into(),
            Route::QuadE2 { m } => format!("quad-e2:{m}"),
            Route::Closed { family } => format!(
                "closed:{}",
                match family {
                    Family::Lambda1 => "lambda1",
                    Family::Lambda312 => "lambda312",
                    Family::Lambda3 => "lambda3",
                    Family::Lambda4 => "lambda4",
                }
            ),
            Route::Oracle => "oracle".into(),
        }
    }
}

/// The input of `fracpow`: a bare matrix, or a block file kept alongside its
/// assembled form so closed-form routes can see the structure.
enum FracpowInput {
    Matrix(OperatorMatrix),
    Block(Box<BlockOperator3>),
}

impl FracpowInput {
    fn working_matrix(&self) -> &OperatorMatrix {
        match self {
            FracpowInput::Matrix(m) => m,
            FracpowInput::Block(b) => b.assembled(),
        }
    }
}

fn read_fracpow_input(text: &str) -> Result<FracpowInput> {
    let probe: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("input JSON: {e}")))?;
    if probe.get("blocks").is_some() {
        Ok(FracpowInput::Block(Box::new(read_block_json(text)?)))
    } else {
        Ok(FracpowInput::Matrix(read_matrix_json(text)?))
    }
}

/// Checks that two blocks agree to within a small multiple of the overall
/// entry scale; used to recognize the structured layouts.
fn blocks_match(x: &OperatorMatrix, y: &OperatorMatrix, scale: f64) -> bool {
    (x - y).max_abs() <= 1e-10 * scale.max(1.0)
}

fn layout_error(family: Family, detail: &str) -> Error {
    let name = Route::Closed { family }.label();
    Error::params(format!(
        "input blocks do not match the {name} layout: {detail}"
    ))
}

/// Validates the block layout for the requested family and applies the
/// closed-form power, returning the assembled result.
fn closed_route(b: &BlockOperator3, family: Family, alpha: f64) -> Result<OperatorMatrix> {
    let scale = b.max_entry_norm();
    let n = b.n();
    let zero = OperatorMatrix::zeros(n);
    let id = OperatorMatrix::identity(n);
    let check_zero = |positions: &[(usize, usize)]| -> Result<()> {
        for &(i, j) in positions {
            if !blocks_match(b.entry(i, j), &zero, scale) {
                return Err(layout_error(
                    family,
                    &format!("block ({i},{j}) must be zero"),
                ));
            }
        }
        Ok(())
    };
    let powered = match family {
        Family::Lambda1 => {
            let a = b.entry(0, 0);
            check_zero(&[(0, 1), (0, 2), (1, 0), (1, 2), (2, 1)])?;
            if !blocks_match(b.entry(1, 1), a, scale) || !blocks_match(b.entry(2, 2), a, scale) {
                return Err(layout_error(family, "diagonal blocks must all equal A"));
            }
            if !blocks_match(b.entry(2, 0), &id, scale) {
                return Err(layout_error(family, "block (2,0) must be the identity"));
            }
            lambda1_fracpow(a, alpha, Sign::Negative)?
        }
        Family::Lambda312 => {
            let a = b.entry(1, 0);
            check_zero(&[(0, 0), (0, 2), (1, 2), (2, 0), (2, 1)])?;
            if !blocks_match(b.entry(0, 1), &-&id, scale) {
                return Err(layout_error(
                    family,
                    "block (0,1) must be minus the identity",
                ));
            }
            let d = b.entry(1, 1);
            if !blocks_match(b.entry(2, 2), d, scale) {
                return Err(layout_error(family, "blocks (1,1) and (2,2) must agree"));
            }
            // (1,1) must be twice the square root of (1,0).
            let half = d.scale_real(0.5);
            if !blocks_match(&(&half * &half), a, scale * scale.max(1.0)) {
                return Err(layout_error(
                    family,
                    "block (1,1) must be twice the square root of block (1,0)",
                ));
            }
            lambda312_fracpow(a, alpha, Sign::Negative)?
        }
        Family::Lambda3 => {
            check_zero(&[(0, 1), (0, 2), (1, 0), (1, 2), (2, 1)])?;
            if !blocks_match(b.entry(2, 0), &id, scale) {
                return Err(layout_error(family, "block (2,0) must be the identity"));
            }
            lambda3_fracpow(
                b.entry(0, 0),
                b.entry(1, 1),
                b.entry(2, 2),
                alpha,
                Sign::Negative,
            )?
        }
        Family::Lambda4 => {
            let a = b.entry(1, 1);
            check_zero(&[(0, 0), (0, 1), (1, 0), (1, 2), (2, 1), (2, 2)])?;
            if !blocks_match(b.entry(0, 2), &-&id, scale) {
                return Err(layout_error(
                    family,
                    "block (0,2) must be minus the identity",
                ));
            }
            if !blocks_match(b.entry(2, 0), a, scale) {
                return Err(layout_error(family, "blocks (2,0) and (1,1) must agree"));
            }
            lambda4_fracpow(a, alpha, Sign::Negative)?
        }
    };
    Ok(powered.assembled().clone())
}

fn cmd_fracpow(args: FracpowArgs) -> Result<u8> {
    let mut manifest = ManifestBuilder::new("fracpow", args.manifest.clone());
    manifest.input(&args.input_file);
    manifest.tolerance("rel_tol", args.rel_tol);
    if let Some(tol) = args.residual_tol {
        manifest.tolerance("residual_tol", tol);
    }
    if !(args.alpha > 0.0 && args.alpha.is_finite()) {
        return Err(Error::InvalidAlpha {
            alpha: args.alpha,
            detail: "fracpow computes X^{-alpha} for positive alpha".into(),
        });
    }
    let routes: Vec<Route> = args
        .routes
        .iter()
        .map(|token| Route::parse(token))
        .collect::<Result<_>>()?;
    let input = read_fracpow_input(&read_to_string(&args.input_file)?)?;
    let scheme = QuadratureScheme {
        rel_tol: args.rel_tol,
        ..QuadratureScheme::default()
    };

    let mut results: Vec<(String, OperatorMatrix)> = Vec::new();
    for route in &routes {
        let value = match route {
            Route::QuadE1 => balakrishnan_e1(input.working_matrix(), args.alpha, &scheme)?,
            Route::QuadE2 { m } => {
                balakrishnan_e2(input.working_matrix(), args.alpha, *m, &scheme)?
            }
            Route::Oracle => oracle_power(input.working_matrix(), -args.alpha)?.value,
            Route::Closed { family } => match &input {
                FracpowInput::Block(b) => closed_route(b, *family, args.alpha)?,
                FracpowInput::Matrix(_) => {
                    return Err(Error::params(format!(
                        "route {} needs a block JSON input so the layout can be checked",
                        route.label()
                    )))
                }
            },
        };
        let dim = value.dim();
        println!("route {}: computed {dim}x{dim} result", route.label());
        results.push((route.label(), value));
    }

    let mut worst: f64 = 0.0;
    for i in 0..results.len() {
        for j in (i + 1)..results.len() {
            let err = relative_error(&results[i].1, &results[j].1)?;
            worst = worst.max(err);
            println!(
                "compare {} vs {}: relative error {err:.3e}",
                results[i].0, results[j].0
            );
            manifest.check(
                &format!("{}_vs_{}", results[i].0, results[j].0),
                err,
                args.residual_tol,
            );
        }
    }

    if let Some(path) = &args.out {
        manifest.write_output(path, &write_matrix_json(&results[0].1))?;
        println!("wrote {} result to {}", results[0].0, path.display());
    }
    manifest.finish()?;
    if let Some(tol) = args.residual_tol {
        if worst > tol {
            eprintln!("error: route disagreement {worst:.3e} exceeds {tol:.3e}");
            return Ok(EXIT_TOLERANCE);
        }
    }
    Ok(0)
}

fn cmd_block_fracpow(args: BlockFracpowArgs) -> Result<u8> {
    let mut manifest = ManifestBuilder::new("block-fracpow", args.manifest.clone());
    manifest.input(&args.block_file);
    manifest.tolerance("rel_tol", args.rel_tol);
    manifest.tolerance("residual_tol", args.residual_tol);
    if let Some(tol) = args.commutation_tol {
        manifest.tolerance("commutation_tol", tol);
    }
    let block = read_block_json(&read_to_string(&args.block_file)?)?;
    let scheme = QuadratureScheme {
        rel_tol: args.rel_tol,
        ..QuadratureScheme::default()
    };
    let tols = BlockTolerances {
        commutation_tol: args.commutation_tol,
        residual_tol: args.residual_tol,
    };
    let powered = block_fracpow_quadrature_with(&block, args.alpha, &scheme, &tols)?;
    println!(
        "computed block power for -{} on a 3x{n} = {dim} system",
        args.alpha,
        n = block.n(),
        dim = 3 * block.n()
    );
    if args.compare_assembled {
        let direct = assembled_fracpow_quadrature(&block, args.alpha, &scheme)?;
        let err = relative_error(powered.assembled(), &direct)?;
        println!("compare cofactor route vs assembled route: relative error {err:.3e}");
        manifest.check("cofactor_vs_assembled", err, Some(10.0 * args.rel_tol));
    }
    if let Some(path) = &args.out {
        manifest.write_output(path, &write_block_json(&powered))?;
        println!("wrote block result to {}", path.display());
    }
    manifest.finish()?;
    Ok(0)
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<u8> {
    let mut manifest = ManifestBuilder::new("spectrum", args.manifest.clone());
    manifest.tolerance("residual_tol", args.residual_tol);
    let block = match (&args.source.input, args.source.kind) {
        (Some(path), None) => {
            manifest.input(path);
            read_block_json(&read_to_string(path)?)?
        }
        (None, Some(kind)) => {
            let lap = DirichletLaplacian::new(args.n, args.length)?;
            let coefficients = args.a.as_ref().map(|v| [v[0], v[1], v[2]]);
            build_system(kind, &lap, coefficients)?
        }
        _ => unreachable!("clap enforces exactly one source"),
    };
    let power = oracle_power(block.assembled(), args.alpha)?;
    let report = spectrum_report(&block, args.alpha, &power.value)?;
    println!(
        "{} eigenvalues mapped through z = {}; max matched residual {:.3e} (method {})",
        report.base_eigs.len(),
        args.alpha,
        report.max_match_residual,
        power.method
    );
    let passed = manifest.check(
        "max_match_residual",
        report.max_match_residual,
        Some(args.residual_tol),
    );
    if let Some(path) = &args.out {
        manifest.write_output(path, &spectrum_csv(&report))?;
        println!("wrote spectrum points to {}", path.display());
    }
    manifest.finish()?;
    if !passed {
        eprintln!(
            "error: matched residual {:.3e} exceeds {:.3e}",
            report.max_match_residual, args.residual_tol
        );
        return Ok(EXIT_TOLERANCE);
    }
    Ok(0)
}

fn cmd_pde(args: PdeArgs) -> Result<u8> {
    let manifest_path = args.manifest.clone().unwrap_or_else(|| {
        let mut p = args.out.clone();
        p.set_extension("manifest.json");
        p
    });
    let mut manifest = ManifestBuilder::new("pde", Some(manifest_path));
    manifest.input(&args.scenario_file);
    let scenario = read_scenario_json(&read_to_string(&args.scenario_file)?)?;
    let lap = DirichletLaplacian::new(scenario.n, scenario.length)?;
    let dim = 3 * scenario.n;
    let u0: Vec<Complex64> = match &scenario.initial {
        InitialState::Zero => vec![Complex64::new(0.0, 0.0); dim],
        InitialState::FirstMode => lap.first_mode_state(),
        InitialState::Explicit(v) => v.clone(),
    };
    let result = match scenario.alpha {
        None => {
            let system = build_system(scenario.kind, &lap, scenario.coefficients)?;
            let forcing = vec![Complex64::new(0.0, 0.0); dim];
            evolve(
                &system,
                &u0,
                &forcing,
                scenario.dt,
                scenario.t_final,
                scenario.method,
            )?
        }
        Some(alpha) => {
            if scenario.method != EvolutionMethod::ImplicitEuler {
                return Err(Error::params(
                    "fractional evolution only supports the implicit-euler method",
                ));
            }
            fractional_evolve(
                scenario.kind,
                &lap,
                scenario.coefficients,
                alpha,
                &u0,
                scenario.dt,
                scenario.t_final,
            )?
        }
    };
    let final_state = result.states.last().expect("at least the initial state");
    let final_norm = final_state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let all_finite = result
        .states
        .iter()
        .all(|s| s.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    manifest.check(
        "trajectory_finite",
        if all_finite { 0.0 } else { 1.0 },
        Some(0.5),
    );
    println!(
        "{} system, alpha = {}, {} steps by {}: final state norm {final_norm:.6e}",
        scenario.kind,
        result.alpha,
        result.times.len() - 1,
        result.method
    );
    manifest.write_output(&args.out, &trajectory_csv(&result))?;
    println!("wrote trajectory to {}", args.out.display());
    manifest.finish()?;
    if !all_finite {
        return Ok(EXIT_TOLERANCE);
    }
    Ok(0)
}

struct IdentityOutcome {
    name: &'static str,
    max_rel_err: f64,
}

/// `∫₀^∞ s^{−α}(s+1)^{−1} ds = π/sin(πα)` over an α grid.
fn identity_scalar_power_integral(scheme: &QuadratureScheme) -> Result<IdentityOutcome> {
    let one = OperatorMatrix::identity(1);
    let mut worst: f64 = 0.0;
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        let value = weighted_resolvent_integral(&one, -alpha, 1, scheme)?;
        let expected = std::f64::consts::PI / (std::f64::consts::PI * alpha).sin();
        let rel = (value.at(0, 0).re - expected).abs() / expected;
        worst = worst.max(rel);
    }
    Ok(IdentityOutcome {
        name: "scalar power integral",
        max_rel_err: worst,
    })
}

/// `∫₀^∞ s^{1−γ}(s+A)^{−2} ds = π(1−γ)/sin(πγ) · A^{−γ}` over a γ grid.
fn identity_weighted_resolvent_square(scheme: &QuadratureScheme) -> Result<IdentityOutcome> {
    let a = OperatorMatrix::from_real(2, &[2.0, 1.0, 1.0, 3.0])?;
    let mut worst: f64 = 0.0;
    for gamma in [0.25, 0.5, 0.75, 1.25, 1.75] {
        let value = weighted_resolvent_integral(&a, 1.0 - gamma, 2, scheme)?;
        let coeff = std::f64::consts::PI * (1.0 - gamma) / (std::f64::consts::PI * gamma).sin();
        let expected = oracle_power(&a, -gamma)?.value.scale_real(coeff);
        worst = worst.max(relative_error(&value, &expected)?);
    }
    Ok(IdentityOutcome {
        name: "weighted resolvent square",
        max_rel_err: worst,
    })
}

/// `∫₀^∞ s^{−γ}(ω·s^θ+A)^{−1} ds` against its predicted multiple of a
/// fractional power, over a (γ, ω, θ) grid.
fn identity_substitution_rule(scheme: &QuadratureScheme) -> Result<IdentityOutcome> {
    let a = OperatorMatrix::from_real(2, &[2.0, 1.0, 1.0, 3.0])?;
    let mut worst: f64 = 0.0;
    for gamma in [0.25, 0.5, 0.75] {
        for omega in [0.5, 1.0, 2.0] {
            for theta in [1.5, 2.0, 3.0] {
                let value = change_of_variables_integral(&a, gamma, omega, theta, scheme)?;
                let (scale, beta) = change_of_variables_prediction(gamma, omega, theta)?;
                let expected = oracle_power(&a, -beta)?.value.scale_real(scale);
                worst = worst.max(relative_error(&value, &expected)?);
            }
        }
    }
    Ok(IdentityOutcome {
        name: "substitution rule",
        max_rel_err: worst,
    })
}

/// The two-operator product integral against its closed form
/// `(A₁−A₂)^{−1}(A₂^{−α}−A₁^{−α})`, over an α grid.
fn identity_resolvent_product(scheme: &QuadratureScheme) -> Result<IdentityOutcome> {
    let a1 = OperatorMatrix::diag_real(&[1.0, 2.0]);
    let a2 = OperatorMatrix::diag_real(&[3.0, 5.0]);
    let mut worst: f64 = 0.0;
    for alpha in [0.25, 0.5, 0.75] {
        let checked = resolvent_product_fracpow_with(&a1, &a2, alpha, scheme)?;
        let rel = checked.discrepancy / spectral_norm(&checked.value);
        worst = worst.max(rel);
    }
    Ok(IdentityOutcome {
        name: "resolvent product",
        max_rel_err: worst,
    })
}

fn cmd_verify_identities(args: VerifyIdentitiesArgs) -> Result<u8> {
    let mut manifest = ManifestBuilder::new("verify-identities", args.manifest.clone());
    manifest.tolerance("rel_tol", args.rel_tol);
    manifest.tolerance("residual_tol", args.residual_tol);
    let scheme = QuadratureScheme {
        rel_tol: args.rel_tol,
        ..QuadratureScheme::default()
    };
    let outcomes = [
        identity_scalar_power_integral(&scheme)?,
        identity_weighted_resolvent_square(&scheme)?,
        identity_substitution_rule(&scheme)?,
        identity_resolvent_product(&scheme)?,
    ];
    let mut table = String::new();
    writeln!(
        table,
        "{:<28} {:>14} {:>11} {:>7}",
        "identity", "max rel error", "tolerance", "status"
    )
    .unwrap();
    let mut all_passed = true;
    for o in &outcomes {
        let passed = manifest.check(o.name, o.max_rel_err, Some(args.residual_tol));
        all_passed &= passed;
        writeln!(
            table,
            "{:<28} {:>14.3e} {:>11.1e} {:>7}",
            o.name,
            o.max_rel_err,
            args.residual_tol,
            if passed { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    print!("{table}");
    manifest.finish()?;
    if !all_passed {
        return Ok(EXIT_TOLERANCE);
    }
    Ok(0)
}
