use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use intrinsic_scale::checks::{check_block, run_check};
use intrinsic_scale::experiment::{
    load_profile_file, load_profiles, render, run_barrier, run_regularity, run_simulate, run_symbol, run_tables,
    BoundaryData, EpsChoice, ExperimentConfig, Format, RegularityArgs, RunOutput, SimulateArgs, SourceData,
};
use intrinsic_scale::operator::default_barrier_radii;
use intrinsic_scale::process::{Estimator, SmallJumpMode};
use intrinsic_scale::symbol::{default_xi_grid, log_grid};
use intrinsic_scale::{Error, KernelProfile, TailRule};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

/// Intrinsic scale functions, Monte Carlo and Hölder-modulus experiments
/// for nonlocal operators with weakly singular kernels.
#[derive(Parser)]
#[command(name = "intrinsic-scale", version)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ℓ, L and φ_a on a log grid against the known asymptotic forms.
    Tables(TablesArgs),
    /// ψ(ξ) against L(1/|ξ|).
    Symbol(SymbolCmd),
    /// Monte Carlo estimators for exit times, exit places and hitting.
    Simulate(SimulateCmd),
    /// max −A b_r / L(r) over a range of r.
    Barrier(BarrierCmd),
    /// Discrete Dirichlet problems and their oscillation decay.
    Regularity(RegularityCmd),
    /// Runs every invariant suite; exit code 4 when one fails.
    Check(CheckCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum TailArg {
    None,
    Extended,
}

impl From<TailArg> for TailRule {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::None => TailRule::None,
            TailArg::Extended => TailRule::ExtendedProfile,
        }
    }
}

#[derive(Args, Serialize)]
struct TablesArgs {
    /// Profile JSON (file path or inline); defaults to the five standard rows.
    #[arg(long)]
    profile: Option<String>,
    /// β used by the default rows.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0])]
    a: Vec<f64>,
    #[arg(long, default_value_t = 1e-8)]
    s_min: f64,
    #[arg(long, default_value_t = 1e-1)]
    s_max: f64,
    #[arg(long, default_value_t = 15)]
    points: usize,
}

#[derive(Args, Serialize)]
struct SymbolCmd {
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, value_enum, default_value = "none")]
    tail: TailArg,
    /// |ξ| values; defaults to a log grid on [10, 1e4].
    #[arg(long, value_delimiter = ',')]
    xi: Vec<f64>,
}

#[derive(Clone, Copy, Serialize, ValueEnum)]
enum EstimatorArg {
    ExitTail,
    MeanExit,
    ExitPlace,
    Hitting,
}

#[derive(Clone, Copy, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Drop,
    Gauss,
}

#[derive(Args, Serialize)]
struct SimulateCmd {
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, value_enum, default_value = "exit-tail")]
    estimator: EstimatorArg,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1])]
    r: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    s: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    a: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Small-jump cutoff: `auto` or a number.
    #[arg(long, default_value = "auto")]
    eps: String,
    #[arg(long, value_enum, default_value = "drop")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, value_enum, default_value = "none")]
    tail: TailArg,
}

#[derive(Args, Serialize)]
struct BarrierCmd {
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, value_enum, default_value = "none")]
    tail: TailArg,
    /// Radii; defaults to 2^-2, …, 2^-10.
    #[arg(long, value_delimiter = ',')]
    r: Vec<f64>,
}

#[derive(Args, Serialize)]
struct RegularityCmd {
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Lattice nodes across the ball diameter.
    #[arg(long, default_value_t = 1024)]
    nodes: usize,
    /// Ball radius; defaults to 1.98·min(R₀, 1).
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = 4.0)]
    a: f64,
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// `zero`, `manufactured` or a file of interior values.
    #[arg(long, default_value = "zero")]
    f: String,
    /// `random` or a file of exterior values.
    #[arg(long, default_value = "random")]
    g: String,
}

#[derive(Args, Serialize)]
struct CheckCmd {
    /// Profiles for the profile-generic suites; defaults to the standard rows.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

/// A failed run and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::InvalidProfile(_) | Error::Json(_) | Error::Io(_) | Error::Domain(_) => {
                EXIT_CONFIG
            }
            _ => EXIT_NUMERIC,
        };
        Failure { code, message: e.to_string() }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, message: message.into() }
}

type Loaded = Vec<(Value, Result<KernelProfile, Error>)>;

/// `--profile` is either inline JSON or a path.
fn load(spec: &str) -> Result<Loaded, Error> {
    let t = spec.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        load_profiles(spec)
    } else {
        load_profile_file(Path::new(spec))
    }
}

fn default_profile() -> Loaded {
    let p = KernelProfile::constant(1.0).expect("constant profile");
    vec![(serde_json::to_value(p.to_document()).expect("document"), Ok(p))]
}

/// Exactly one valid profile; the default is the constant profile with R₀ = 1.
fn single_profile(spec: &Option<String>) -> Result<(Vec<Value>, KernelProfile), Failure> {
    let mut loaded = match spec {
        Some(s) => load(s)?,
        None => default_profile(),
    };
    if loaded.len() != 1 {
        return Err(config_error(format!("expected one profile, found {}", loaded.len())));
    }
    let (doc, p) = loaded.remove(0);
    Ok((vec![doc], p?))
}

fn params(args: &impl Serialize) -> Vec<(String, Value)> {
    match serde_json::to_value(args) {
        Ok(Value::Object(m)) => m.into_iter().filter(|(k, _)| k != "profile" && k != "seed").collect(),
        _ => Vec::new(),
    }
}

fn config(name: &str, seed: u64, profiles: Vec<Value>, args: &impl Serialize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(name, seed).with_profiles(profiles);
    for (k, v) in params(args) {
        c = c.param(&k, v);
    }
    c
}

fn execute(command: &Command) -> Result<(ExperimentConfig, RunOutput), Failure> {
    match command {
        Command::Tables(a) => {
            let loaded = match &a.profile {
                Some(s) => load(s)?,
                None => KernelProfile::table_one(a.beta)?
                    .into_iter()
                    .map(|p| (serde_json::to_value(p.to_document()).expect("document"), Ok(p)))
                    .collect(),
            };
            if !(a.s_min > 0.0 && a.s_max > a.s_min && a.points >= 2) {
                return Err(config_error("need 0 < s-min < s-max and at least two points"));
            }
            let docs = loaded.iter().map(|(d, _)| d.clone()).collect();
            let labelled: Vec<(String, Result<KernelProfile, Error>)> = loaded
                .into_iter()
                .enumerate()
                .map(|(k, (_, p))| (p.as_ref().map(|p| p.label()).unwrap_or_else(|_| format!("profile[{k}]")), p))
                .collect();
            let block = run_tables(&labelled, &a.a, &log_grid(a.s_min, a.s_max, a.points))?;
            Ok((config("tables", 0, docs, a), RunOutput { blocks: vec![block], failures: 0 }))
        }
        Command::Symbol(a) => {
            let (docs, p) = single_profile(&a.profile)?;
            let grid = if a.xi.is_empty() { default_xi_grid() } else { a.xi.clone() };
            let blocks = run_symbol(&p, a.dim, a.tail.into(), &grid)?;
            Ok((config("symbol", 0, docs, a), RunOutput { blocks, failures: 0 }))
        }
        Command::Simulate(a) => {
            let (docs, p) = single_profile(&a.profile)?;
            let eps = match a.eps.as_str() {
                "auto" => EpsChoice::Auto,
                v => EpsChoice::Value(v.parse().map_err(|_| config_error(format!("--eps: `{v}` is not auto or a number")))?),
            };
            let args = SimulateArgs {
                estimator: match a.estimator {
                    EstimatorArg::ExitTail => Estimator::ExitTimeTail,
                    EstimatorArg::MeanExit => Estimator::MeanExitTime,
                    EstimatorArg::ExitPlace => Estimator::ExitPlace,
                    EstimatorArg::Hitting => Estimator::Hitting,
                },
                dim: a.dim,
                tail: a.tail.into(),
                r: a.r.clone(),
                s: a.s.clone(),
                a: a.a.clone(),
                t: a.t.clone(),
                paths: a.paths,
                seed: a.seed,
                eps,
                mode: match a.mode {
                    ModeArg::Drop => SmallJumpMode::Drop,
                    ModeArg::Gauss => SmallJumpMode::GaussianApprox,
                },
            };
            let block = run_simulate(&p, &args)?;
            Ok((config("simulate", a.seed, docs, a), RunOutput { blocks: vec![block], failures: 0 }))
        }
        Command::Barrier(a) => {
            let (docs, p) = single_profile(&a.profile)?;
            let grid = if a.r.is_empty() { default_barrier_radii() } else { a.r.clone() };
            let blocks = run_barrier(&p, 1, a.tail.into(), &grid)?;
            Ok((config("barrier", 0, docs, a), RunOutput { blocks, failures: 0 }))
        }
        Command::Regularity(a) => {
            let (docs, p) = single_profile(&a.profile)?;
            let f = match a.f.as_str() {
                "zero" => SourceData::Zero,
                "manufactured" => SourceData::Manufactured,
                path => SourceData::File(PathBuf::from(path)),
            };
            let g = match a.g.as_str() {
                "random" => BoundaryData::Random,
                path => BoundaryData::File(PathBuf::from(path)),
            };
            let args = RegularityArgs { dim: a.dim, nodes: a.nodes, r: a.r, a: a.a, samples: a.samples, seed: a.seed, f, g };
            let blocks = run_regularity(&p, &args)?;
            Ok((config("regularity", a.seed, docs, a), RunOutput { blocks, failures: 0 }))
        }
        Command::Check(a) => {
            let (docs, profiles) = match &a.profile {
                None => (Vec::new(), None),
                Some(s) => {
                    let loaded = load(s)?;
                    let docs = loaded.iter().map(|(d, _)| d.clone()).collect();
                    let ps = loaded.into_iter().map(|(_, p)| p).collect::<Result<Vec<_>, _>>()?;
                    (docs, Some(ps))
                }
            };
            let rows = run_check(profiles, a.seed)?;
            let failures = rows.iter().filter(|r| !r.passed).count();
            for r in rows.iter().filter(|r| !r.passed) {
                eprintln!("FAIL {} / {}: observed {:e}, required {}", r.module, r.invariant, r.observed, r.required);
            }
            Ok((config("check", a.seed, docs, a), RunOutput { blocks: vec![check_block(&rows)], failures }))
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("INTRINSIC_SCALE_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config_error(format!("INTRINSIC_SCALE_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| config_error(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    configure_threads()?;
    let start = Instant::now();
    let (mut cfg, out) = execute(&cli.command)?;
    cfg = cfg.with_format(match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    });
    let text = render(&cfg, &out, start.elapsed().as_secs_f64())?;
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(Error::from)?,
        None => print!("{text}"),
    }
    Ok(if out.failures > 0 { EXIT_INVARIANT } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
