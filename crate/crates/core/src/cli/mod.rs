//! Command-line driver.
//!
//! Exit codes: 0 success, 1 a checked invariant failed, 2 usage or input
//! error, 3 spectral parameter too close to the real axis.

mod io;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::boundary::{deficiency_indices, relative_green_defect, DeficiencyReport};
use crate::error::Error;
use crate::halfline::{Side, TwoComponentFunction};
use crate::neumann::{self, NeumannConfig};
use crate::operator::{CVector, HermitianOperator, SpectralPoint, UnitaryParameter};
use crate::probe::{self, Verdict};
use crate::random::{self, AtomRecipe};
use crate::resolvent::{ExtensionLW, DEFAULT_MIN_IMAG};

use io::{manifest_path_for, read_json, read_vector, to_json_bytes, OutputBundle};
pub use io::{parse_complex, parse_grid, RunManifest};

pub const DEFAULT_SEED: u64 = 20_240_601;
/// Tolerance for every pass/fail decision made by the driver.
pub const CHECK_TOL: f64 = 1e-10;
pub const THREADS_ENV: &str = "HALFLINE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    InvariantFailure = 1,
    Usage = 2,
    NearRealAxis = 3,
}

impl ExitStatus {
    fn from_check(ok: bool) -> Self {
        if ok {
            ExitStatus::Success
        } else {
            ExitStatus::InvariantFailure
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl CliError {
    fn status(&self) -> ExitStatus {
        match self {
            CliError::Usage(_) => ExitStatus::Usage,
            CliError::Core(Error::TooCloseToRealAxis { .. }) => ExitStatus::NearRealAxis,
            CliError::Core(Error::DegenerateKernel { .. } | Error::NotInDomain { .. }) => {
                ExitStatus::InvariantFailure
            }
            CliError::Core(_) => ExitStatus::Usage,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "halfline",
    version,
    about = "Self-adjoint extensions on two half-lines: boundary checks, resolvents and spectral probes"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Randomized check of Green's identity for the boundary pair.
    GreenCheck(GreenCheckArgs),
    /// Deficiency indices of the minimal operators on both half-lines.
    Deficiency(DeficiencyArgs),
    /// Resolvent of L_W applied to an atom function.
    Resolve(ResolveArgs),
    /// Norm lower bound over a grid x + i eps.
    SpectrumScan(ScanArgs),
    /// Constant-norm test of the candidate eigenfunctions at real points.
    PointSpectrum(PointArgs),
    /// The truncated Neumann-Laplacian example end to end.
    Example(ExampleArgs),
}

#[derive(Debug, Args)]
struct GreenCheckArgs {
    /// Hermitian operator JSON.
    #[arg(long)]
    operator: PathBuf,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Report JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DeficiencyArgs {
    #[arg(long)]
    operator: PathBuf,
    /// Optional report JSON; the report is always printed.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ResolveArgs {
    #[arg(long)]
    operator: PathBuf,
    /// Unitary boundary parameter JSON.
    #[arg(long)]
    unitary: PathBuf,
    /// Spectral parameter, e.g. 0.5+1i.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    lambda: num_complex::Complex64,
    /// Right-hand side as a two-component atom function JSON; its endpoints
    /// fix a and b.
    #[arg(long)]
    forcing: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_IMAG)]
    min_imag: f64,
    #[arg(long)]
    out: PathBuf,
}

/// Either explicit operator files or the Neumann example.
#[derive(Debug, Args)]
struct SourceArgs {
    #[arg(long, requires = "unitary")]
    operator: Option<PathBuf>,
    #[arg(long, requires = "operator")]
    unitary: Option<PathBuf>,
    #[arg(long, default_value_t = neumann::EXAMPLE_A, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, default_value_t = neumann::EXAMPLE_B, allow_hyphen_values = true)]
    b: f64,
    /// Number of cosine modes when no operator is given.
    #[arg(long, default_value_t = 8, conflicts_with = "operator")]
    modes: usize,
    #[arg(
        long,
        default_value_t = 0.0,
        allow_hyphen_values = true,
        conflicts_with = "operator"
    )]
    phi: f64,
    /// Witness direction as a JSON array of [re, im]; equal weights if absent.
    #[arg(long)]
    f0: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MIN_IMAG)]
    min_imag: f64,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Real parts: start:stop:count or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    grid_re: String,
    /// Positive imaginary parts: start:stop:count or a comma list.
    #[arg(long)]
    grid_im: String,
    /// CSV output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Real spectral points: start:stop:count or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    lambdas: String,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExampleArgs {
    /// JSON with any of: modes, phi, grid_re, grid_im. Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_re: Option<String>,
    #[arg(long)]
    grid_im: Option<String>,
    /// Forcing JSON on the example's endpoints; a fixed default otherwise.
    #[arg(long)]
    forcing: Option<PathBuf>,
    /// Also write x-space samples of the resolvent at the first grid point.
    #[arg(long)]
    field: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExampleConfig {
    pub modes: usize,
    pub phi: f64,
    pub grid_re: Vec<f64>,
    pub grid_im: Vec<f64>,
}

impl Default for ExampleConfig {
    fn default() -> Self {
        ExampleConfig {
            modes: 8,
            phi: std::f64::consts::FRAC_PI_3,
            grid_re: (0..21).map(|j| -5.0 + 0.5 * j as f64).collect(),
            grid_im: vec![1.0, 0.1, 0.01],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenCheckReport {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub max_defect: f64,
    pub mean_defect: f64,
    pub passed: bool,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Usage as i32
            } else {
                0
            };
        }
    };
    configure_threads();
    match dispatch(cli.command) {
        Ok(status) => status as i32,
        Err(e) => {
            eprintln!("error: {e}");
            e.status() as i32
        }
    }
}

fn configure_threads() {
    let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    else {
        return;
    };
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn dispatch(command: Command) -> CliResult<ExitStatus> {
    match command {
        Command::GreenCheck(args) => green_check(args),
        Command::Deficiency(args) => deficiency(args),
        Command::Resolve(args) => resolve(args),
        Command::SpectrumScan(args) => spectrum_scan(args),
        Command::PointSpectrum(args) => point_spectrum(args),
        Command::Example(args) => example(args),
    }
}

fn usage(e: String) -> CliError {
    CliError::Usage(e)
}

fn green_check(args: GreenCheckArgs) -> CliResult<ExitStatus> {
    let op: HermitianOperator = read_json(&args.operator)?;
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1".into()));
    }
    let dim = op.dim();
    let recipe = AtomRecipe::default();
    let defects = (0..args.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            rng.set_stream(trial as u64);
            let u = random::two_component(&mut rng, 0.0, 1.0, dim, &recipe);
            let v = random::two_component(&mut rng, 0.0, 1.0, dim, &recipe);
            relative_green_defect(&u, &v, &op)
        })
        .collect::<crate::Result<Vec<f64>>>()?;
    let max_defect = defects.iter().copied().fold(0.0, f64::max);
    let mean_defect = defects.iter().sum::<f64>() / defects.len() as f64;
    let report = GreenCheckReport {
        dim,
        trials: args.trials,
        seed: args.seed,
        max_defect,
        mean_defect,
        passed: max_defect < CHECK_TOL,
    };
    println!(
        "green-check: dim {dim}, {} trials, max defect {max_defect:.3e}, mean {mean_defect:.3e}",
        args.trials
    );
    let inputs = json!({ "operator": op, "trials": args.trials });
    let mut bundle = OutputBundle::new(RunManifest::new("green-check", inputs, Some(args.seed)));
    bundle.add(args.out.clone(), to_json_bytes(&report)?);
    bundle.write(&manifest_path_for(&args.out))?;
    Ok(ExitStatus::from_check(report.passed))
}

fn deficiency(args: DeficiencyArgs) -> CliResult<ExitStatus> {
    let op: HermitianOperator = read_json(&args.operator)?;
    let reports: [DeficiencyReport; 2] = [
        deficiency_indices(Side::Left, &op),
        deficiency_indices(Side::Right, &op),
    ];
    let text = to_json_bytes(&reports)?;
    print!("{}", String::from_utf8_lossy(&text));
    if let Some(out) = &args.out {
        let mut bundle = OutputBundle::new(RunManifest::new(
            "deficiency",
            json!({ "operator": op }),
            None,
        ));
        bundle.add(out.clone(), text);
        bundle.write(&manifest_path_for(out))?;
    }
    let n = op.dim();
    let expected = (reports[0].m, reports[0].n, reports[1].m, reports[1].n) == (0, n, n, 0);
    Ok(ExitStatus::from_check(expected))
}

fn resolve(args: ResolveArgs) -> CliResult<ExitStatus> {
    let op: HermitianOperator = read_json(&args.operator)?;
    let w: UnitaryParameter = read_json(&args.unitary)?;
    let f: TwoComponentFunction = read_json(&args.forcing)?;
    let ext = ExtensionLW::new(op, w, f.a(), f.b())?.with_min_imag(args.min_imag);
    let lambda = SpectralPoint::new(args.lambda);
    let out = ext.resolve(&lambda, &f)?;
    let passed = out.passes(CHECK_TOL);
    println!(
        "resolve: lambda = {}{:+}i, residual {:.3e}, bc defect {:.3e}",
        lambda.lambda.re, lambda.lambda_i, out.residual, out.bc_defect
    );
    let inputs = json!({
        "operator": ext.operator(),
        "unitary": ext.unitary(),
        "lambda": lambda,
        "forcing": f,
        "min_imag": args.min_imag,
    });
    let mut bundle = OutputBundle::new(RunManifest::new("resolve", inputs, None));
    bundle.add(args.out.clone(), to_json_bytes(&out)?);
    bundle.write(&manifest_path_for(&args.out))?;
    Ok(ExitStatus::from_check(passed))
}

/// Extension, witness direction and a JSON description of both.
fn load_source(source: &SourceArgs) -> CliResult<(ExtensionLW, CVector, serde_json::Value)> {
    let (ext, mut inputs) = match (&source.operator, &source.unitary) {
        (Some(op_path), Some(w_path)) => {
            let op: HermitianOperator = read_json(op_path)?;
            let w: UnitaryParameter = read_json(w_path)?;
            let inputs = json!({ "operator": &op, "unitary": &w, "a": source.a, "b": source.b });
            (ExtensionLW::new(op, w, source.a, source.b)?, inputs)
        }
        _ => {
            let mut cfg = NeumannConfig::new(source.modes, source.phi)?;
            cfg.a = source.a;
            cfg.b = source.b;
            (
                neumann::build_example_extension(&cfg)?,
                json!({ "example": cfg }),
            )
        }
    };
    let ext = ext.with_min_imag(source.min_imag);
    let f0 = match &source.f0 {
        Some(path) => read_vector(path)?,
        None => neumann::default_witness_vector(ext.dim()),
    };
    if f0.len() != ext.dim() {
        return Err(Error::DimensionMismatch {
            expected: ext.dim(),
            found: f0.len(),
        }
        .into());
    }
    inputs["f0"] = json!(f0.iter().collect::<Vec<_>>());
    inputs["min_imag"] = json!(source.min_imag);
    Ok((ext, f0, inputs))
}

fn spectrum_scan(args: ScanArgs) -> CliResult<ExitStatus> {
    let real_points = parse_grid(&args.grid_re).map_err(usage)?;
    let epsilons = parse_grid(&args.grid_im).map_err(usage)?;
    let (ext, f0, mut inputs) = load_source(&args.source)?;
    let reports = probe::continuous_spectrum_scan(&ext, &real_points, &epsilons, &f0)?;
    let satisfied = reports.iter().filter(|r| r.satisfied).count();
    println!(
        "spectrum-scan: {satisfied}/{} grid points satisfy the bound",
        reports.len()
    );
    inputs["grid_re"] = json!(real_points);
    inputs["grid_im"] = json!(epsilons);
    let mut bundle = OutputBundle::new(RunManifest::new("spectrum-scan", inputs, None));
    bundle.add(args.out.clone(), probe::scan_csv(&reports));
    bundle.write(&manifest_path_for(&args.out))?;
    Ok(ExitStatus::from_check(satisfied == reports.len()))
}

fn point_spectrum(args: PointArgs) -> CliResult<ExitStatus> {
    let lambdas = parse_grid(&args.lambdas).map_err(usage)?;
    let (ext, f0, mut inputs) = load_source(&args.source)?;
    let reports = lambdas
        .iter()
        .map(|&x| probe::point_spectrum_test(&ext, &SpectralPoint::real(x), &f0, args.samples))
        .collect::<crate::Result<Vec<_>>>()?;
    let certified = reports
        .iter()
        .filter(|r| r.verdict == Verdict::NotEigenvalue)
        .count();
    println!(
        "point-spectrum: {certified}/{} points certified as non-eigenvalues",
        reports.len()
    );
    inputs["lambdas"] = json!(lambdas);
    inputs["samples"] = json!(args.samples);
    let mut bundle = OutputBundle::new(RunManifest::new("point-spectrum", inputs, None));
    bundle.add(args.out.clone(), probe::point_spectrum_csv(&reports));
    bundle.write(&manifest_path_for(&args.out))?;
    Ok(ExitStatus::from_check(certified == reports.len()))
}

fn example_config(args: &ExampleArgs) -> CliResult<ExampleConfig> {
    let mut cfg = match &args.config {
        Some(path) => read_json::<ExampleConfig>(path)?,
        None => ExampleConfig::default(),
    };
    if let Some(m) = args.modes {
        cfg.modes = m;
    }
    if let Some(p) = args.phi {
        cfg.phi = p;
    }
    if let Some(g) = &args.grid_re {
        cfg.grid_re = parse_grid(g).map_err(usage)?;
    }
    if let Some(g) = &args.grid_im {
        cfg.grid_im = parse_grid(g).map_err(usage)?;
    }
    if cfg.grid_re.is_empty() || cfg.grid_im.is_empty() {
        return Err(usage("example grids must be nonempty".into()));
    }
    Ok(cfg)
}

fn example(args: ExampleArgs) -> CliResult<ExitStatus> {
    let cfg = example_config(&args)?;
    let neumann_cfg = NeumannConfig::new(cfg.modes, cfg.phi)?;
    let f = match &args.forcing {
        Some(path) => read_json::<TwoComponentFunction>(path)?,
        None => neumann::default_forcing(&neumann_cfg),
    };
    let f0 = neumann::default_witness_vector(cfg.modes);
    let results = neumann::run_example(&neumann_cfg, &cfg.grid_re, &cfg.grid_im, &f, &f0)?;
    let passed = results.all_passed();
    println!(
        "example: {} modes, phi = {:.6}, {} scan points, {} resolvent checks, all passed: {passed}",
        cfg.modes,
        neumann_cfg.phi,
        results.scan.len(),
        results.resolvents.len()
    );

    let dir = &args.out_dir;
    let inputs = json!({ "config": &cfg, "forcing": &f, "f0": f0.iter().collect::<Vec<_>>(), "field": args.field });
    let mut bundle = OutputBundle::new(RunManifest::new("example", inputs, None));
    bundle.add(dir.join("scan.csv"), probe::scan_csv(&results.scan));
    bundle.add(
        dir.join("resolvents.csv"),
        neumann::resolvent_csv(&results.resolvents),
    );
    bundle.add(
        dir.join("point_spectrum.csv"),
        probe::point_spectrum_csv(&results.point_spectrum),
    );
    bundle.add(dir.join("results.json"), to_json_bytes(&results)?);
    if args.field {
        let ext = neumann::build_example_extension(&neumann_cfg)?;
        let lambda = SpectralPoint::from_parts(cfg.grid_re[0], cfg.grid_im[0]);
        let out = ext.resolve(&lambda, &f)?;
        let rows = neumann::field_samples(&out.u, 41, 4.0);
        bundle.add(dir.join("field.csv"), neumann::field_csv(&rows));
    }
    bundle.write(&dir.join("manifest.json"))?;
    Ok(ExitStatus::from_check(passed))
}

/// Entry point used by the binary.
pub fn main_exit_code() -> i32 {
    run(std::env::args_os())
}
