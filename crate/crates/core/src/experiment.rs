//! Experiment configs, provenance, CSV/JSON rendering and the runners
//! behind the command-line tool.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernel::{JumpKernel, TailRule};
use crate::operator::OperatorEvaluator;
use crate::process::{
    estimate_exit_place, estimate_exit_tail, estimate_hitting, estimate_mean_exit, Estimator, LevyModel,
    SimulationReport, SmallJumpMode, TargetSpec,
};
use crate::profile::{Family, KernelProfile, ProfileDocument};
use crate::regularity::{measure_regularity, GridProblem, Solver};
use crate::scale::ScaleCalculus;
use crate::symbol::LevySymbol;

pub const TOOL: &str = "intrinsic-scale";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Everything that determines the output of a run. The output path is
/// not part of the hash.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub profiles: Vec<Value>,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(command: &str, seed: u64) -> Self {
        ExperimentConfig {
            command: command.to_string(),
            profiles: Vec::new(),
            params: BTreeMap::new(),
            seed,
            format: Format::Csv,
            output: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.params.insert(key.to_string(), v);
        self
    }

    /// Profile documents as given (file content, not path, is hashed).
    pub fn with_profiles(mut self, docs: Vec<Value>) -> Self {
        self.profiles = docs;
        self
    }

    pub fn with_format(mut self, format: Format) -> Self {
        self.format = format;
        self
    }

    /// sha256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()).as_slice())
    }
}

/// One table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => write!(f, "{s}"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Empty => Ok(()),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) if v.is_finite() => s.serialize_f64(*v),
            Cell::Num(v) => s.serialize_str(&v.to_string()),
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Empty => s.serialize_none(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A named table with a header row.
#[derive(Clone, Debug, Serialize)]
pub struct Block {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Block {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Block { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Result of a command: its tables and the number of failed checks.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub blocks: Vec<Block>,
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub wall_time: f64,
}

impl Provenance {
    pub fn new(config: &ExperimentConfig, wall_time: f64) -> Self {
        Provenance {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            command: config.command.clone(),
            config_hash: config.config_hash(),
            seed: config.seed,
            wall_time,
        }
    }
}

/// `# key=value` header lines, then each block as a CSV table preceded by
/// `# block=<name>` and separated by a blank line.
pub fn render_csv(prov: &Provenance, blocks: &[Block]) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("# tool={}\n# version={}\n", prov.tool, prov.version));
    out.push_str(&format!("# command={}\n# config_hash={}\n", prov.command, prov.config_hash));
    out.push_str(&format!("# seed={}\n# wall_time={:.6}\n", prov.seed, prov.wall_time));
    for (k, b) in blocks.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# block={}\n", b.name));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&b.columns).map_err(csv_err)?;
        for row in &b.rows {
            w.write_record(row.iter().map(|c| c.to_string())).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// `{"provenance": {...}, "blocks": [{"name", "columns", "rows"}]}`.
pub fn render_json(prov: &Provenance, blocks: &[Block]) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a> {
        provenance: &'a Provenance,
        blocks: &'a [Block],
    }
    Ok(serde_json::to_string_pretty(&Doc { provenance: prov, blocks })? + "\n")
}

pub fn render(config: &ExperimentConfig, out: &RunOutput, wall_time: f64) -> Result<String> {
    let prov = Provenance::new(config, wall_time);
    match config.format {
        Format::Csv => render_csv(&prov, &out.blocks),
        Format::Json => render_json(&prov, &out.blocks),
    }
}

/// Parses a profile file holding one document or an array of documents.
/// Each entry keeps its raw JSON (for hashing) and its build result, so a
/// rejected profile can be reported per row.
pub fn load_profiles(text: &str) -> Result<Vec<(Value, Result<KernelProfile>)>> {
    let v: Value = serde_json::from_str(text)?;
    let items = match v {
        Value::Array(a) => a,
        other => vec![other],
    };
    Ok(items
        .into_iter()
        .map(|item| {
            let built = serde_json::from_value::<ProfileDocument>(item.clone())
                .map_err(Error::from)
                .and_then(|d| KernelProfile::from_document(&d));
            (item, built)
        })
        .collect())
}

pub fn load_profile_file(path: &Path) -> Result<Vec<(Value, Result<KernelProfile>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    load_profiles(&text)
}

/// Closed forms where the inverse is explicit, the interpolation table
/// otherwise (Monte Carlo inverts L millions of times).
pub fn fast_calculus(profile: &KernelProfile) -> Result<ScaleCalculus> {
    match profile.family() {
        Family::Constant | Family::PowerLaw { .. } => ScaleCalculus::closed_form(profile.clone()),
        _ => ScaleCalculus::tabulated(profile.clone()),
    }
}

/// Reads numbers from a one-column (or last-column) CSV/text file; a
/// non-numeric first line is taken as a header.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let last = line.rsplit([',', ' ', '\t']).find(|t| !t.is_empty()).unwrap_or("");
        match last.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if k == 0 => continue,
            Err(_) => return Err(Error::Config(format!("{}: line {} is not numeric", path.display(), k + 1))),
        }
    }
    Ok(out)
}

fn asymptotic_forms(family: &Family, s: f64, a: f64) -> (Option<f64>, Option<f64>) {
    let l2 = (2.0 / s).ln();
    match *family {
        Family::PowerLogSquared { beta } => (Some(s.powf(-beta) * l2 * l2), Some(s)),
        Family::PowerLaw { beta } => (Some((s.powf(-beta) - 1.0) / beta), Some(s)),
        Family::Log => (Some(l2 * l2), Some(s.powf(1.0 / a.sqrt()))),
        Family::Constant => (Some((1.0 / s).ln()), Some(s.powf(1.0 / a))),
        Family::InverseLog => (Some(l2.ln()), Some((-l2.powf(1.0 / a)).exp())),
        _ => (None, None),
    }
}

/// ℓ, L and φ_a on the s grid with the comparison to the tabulated
/// asymptotic forms (ratios numeric/asymptotic).
pub fn run_tables(profiles: &[(String, Result<KernelProfile>)], a_values: &[f64], s_grid: &[f64]) -> Result<Block> {
    let mut b = Block::new(
        "tables",
        &["profile", "status", "s", "a", "ell", "L", "L_asym", "L_ratio", "phi", "phi_asym", "phi_ratio"],
    );
    for (label, p) in profiles {
        let profile = match p {
            Ok(p) => p,
            Err(e) => {
                let mut row = vec![Cell::from(label.as_str()), Cell::from(e.to_string())];
                row.resize(b.columns.len(), Cell::Empty);
                b.push(row);
                continue;
            }
        };
        let calc = ScaleCalculus::closed_form(profile.clone())?;
        for &s in s_grid {
            if !(s < calc.r0()) {
                continue;
            }
            let ell = calc.ell(s)?;
            let l = calc.eval_l(s)?;
            for &a in a_values {
                let phi = calc.phi(a, s)?;
                let (la, pa) = asymptotic_forms(profile.family(), s, a);
                b.push(vec![
                    label.as_str().into(),
                    "ok".into(),
                    s.into(),
                    a.into(),
                    ell.into(),
                    l.into(),
                    la.into(),
                    la.map(|v| l / v).into(),
                    phi.into(),
                    pa.into(),
                    pa.map(|v| phi / v).into(),
                ]);
            }
        }
    }
    Ok(b)
}

/// ψ(ξ) against L(|ξ|⁻¹) on the given |ξ| grid.
pub fn run_symbol(profile: &KernelProfile, dim: usize, tail: TailRule, xi_grid: &[f64]) -> Result<Vec<Block>> {
    let sym = LevySymbol::new(ScaleCalculus::closed_form(profile.clone())?, dim, tail)?;
    let rep = sym.comparability_report(xi_grid)?;
    let mut b = Block::new("symbol", &["xi", "psi", "L_inv_xi", "ratio"]);
    for r in &rep.rows {
        b.push(vec![r.xi.into(), r.psi.into(), r.l_inv_xi.into(), r.ratio.into()]);
    }
    let mut s = Block::new("summary", &["ratio_min", "ratio_max", "spread", "chain_constant"]);
    let xi_min = xi_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let chain = sym.chain_constant(xi_min).ok();
    s.push(vec![rep.ratio_min.into(), rep.ratio_max.into(), (rep.ratio_max / rep.ratio_min).into(), chain.into()]);
    Ok(vec![b, s])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EpsChoice {
    Auto,
    Value(f64),
}

#[derive(Clone, Debug)]
pub struct SimulateArgs {
    pub estimator: Estimator,
    pub dim: usize,
    pub tail: TailRule,
    pub r: Vec<f64>,
    /// exit-place radii (default 4r, 8r, 16r).
    pub s: Vec<f64>,
    /// hitting parameters (default 2, 4, 8, 16).
    pub a: Vec<f64>,
    /// exit-tail horizons (default 0.1/L(r)).
    pub t: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    pub eps: EpsChoice,
    pub mode: SmallJumpMode,
}

fn sim_row(rep: &SimulationReport, eps: f64) -> Vec<Cell> {
    let p = &rep.params;
    let start: Vec<String> = p.start.iter().map(|v| v.to_string()).collect();
    vec![
        rep.estimator.name().into(),
        p.r.into(),
        p.s.into(),
        p.a.into(),
        p.t.into(),
        start.join(" ").into(),
        eps.into(),
        rep.point_estimate.into(),
        rep.std_error.into(),
        rep.empirical_constant.into(),
        rep.n_paths.into(),
        rep.n_used.into(),
        rep.n_truncated.into(),
        rep.zero_events.into(),
        rep.upper_bound.into(),
        rep.seed.into(),
    ]
}

/// One row per parameter combination.
pub fn run_simulate(profile: &KernelProfile, args: &SimulateArgs) -> Result<Block> {
    let calc = fast_calculus(profile)?;
    let kernel = JumpKernel::new(calc, args.dim, args.tail)?;
    let mut b = Block::new(
        "simulate",
        &[
            "estimator",
            "r",
            "s",
            "a",
            "t",
            "start",
            "eps",
            "estimate",
            "std_error",
            "implied_constant",
            "n_paths",
            "n_used",
            "n_truncated",
            "zero_events",
            "upper_bound",
            "seed",
        ],
    );
    let x0 = vec![0.0; args.dim];
    for &r in &args.r {
        let model = match args.eps {
            EpsChoice::Auto => LevyModel::with_auto_eps(kernel.clone(), r, args.mode)?,
            EpsChoice::Value(e) => LevyModel::new(kernel.clone(), e, args.mode)?,
        };
        let eps = model.eps();
        match args.estimator {
            Estimator::ExitTimeTail => {
                let ts = if args.t.is_empty() { vec![0.1 / kernel.calculus().eval_l(r)?] } else { args.t.clone() };
                for t in ts {
                    let rep = estimate_exit_tail(&model, &x0, r, t, args.paths, args.seed)?;
                    b.push(sim_row(&rep, eps));
                }
            }
            Estimator::MeanExitTime => {
                let mut quarter = vec![0.0; args.dim];
                quarter[0] = 0.25 * r;
                let sum = estimate_mean_exit(&model, &x0, &[vec![0.0; args.dim], quarter], r, args.paths, args.seed)?;
                for rep in &sum.reports {
                    b.push(sim_row(rep, eps));
                }
            }
            Estimator::ExitPlace => {
                let ss = if args.s.is_empty() { vec![4.0 * r, 8.0 * r, 16.0 * r] } else { args.s.clone() };
                for s in ss {
                    let rep = estimate_exit_place(&model, &x0, r, s, args.paths, args.seed)?;
                    b.push(sim_row(&rep, eps));
                }
            }
            Estimator::Hitting => {
                let aa = if args.a.is_empty() { vec![2.0, 4.0, 8.0, 16.0] } else { args.a.clone() };
                for a in aa {
                    let rep =
                        estimate_hitting(&model, &x0, &x0, r, a, &TargetSpec::HalfAnnulus, args.paths, args.seed)?;
                    b.push(sim_row(&rep, eps));
                }
            }
        }
    }
    Ok(b)
}

/// max_x −A b_r(x)/L(r) per r.
pub fn run_barrier(profile: &KernelProfile, dim: usize, tail: TailRule, r_grid: &[f64]) -> Result<Vec<Block>> {
    if dim != 1 {
        return Err(Error::Config("the barrier command uses the default one-dimensional x grid".into()));
    }
    let calc = ScaleCalculus::closed_form(profile.clone())?;
    let ev = OperatorEvaluator::new(JumpKernel::new(calc, dim, tail)?);
    let rep = ev.barrier_report(r_grid, None)?;
    let mut b = Block::new("barrier", &["r", "max_ratio", "argmax_x"]);
    for row in &rep.rows {
        b.push(vec![row.r.into(), row.max_ratio.into(), row.argmax_x[0].into()]);
    }
    let mut s = Block::new("summary", &["spread"]);
    s.push(vec![rep.spread.into()]);
    Ok(vec![b, s])
}

/// Right-hand side of a regularity run.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceData {
    Zero,
    /// f = A u* for a smooth u*; g = u* plus ±0.5 noise on the collar.
    Manufactured,
    File(PathBuf),
}

/// Exterior data of a regularity run.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryData {
    /// Independent ±1 values per collar node.
    Random,
    File(PathBuf),
}

#[derive(Clone, Debug)]
pub struct RegularityArgs {
    pub dim: usize,
    pub nodes: usize,
    /// Solve radius (default 1.98·min(R₀, 1)).
    pub r: Option<f64>,
    pub a: f64,
    pub samples: usize,
    pub seed: u64,
    pub f: SourceData,
    pub g: BoundaryData,
}

/// Smooth reference function for manufactured right-hand sides.
pub fn manufactured_u(x: &[f64]) -> f64 {
    let s: f64 = x.iter().map(|v| (1.5 * v).sin()).sum();
    s + 0.25 * x.iter().map(|v| v * v).sum::<f64>().min(4.0)
}

/// Solves the problem for each sample and measures the decay: blocks
/// `annuli` (sample, n, r_n, osc_n, nodes, used) and `summary`.
pub fn run_regularity(profile: &KernelProfile, args: &RegularityArgs) -> Result<Vec<Block>> {
    let calc = fast_calculus(profile)?;
    let kernel = JumpKernel::new(calc.clone(), args.dim, TailRule::None)?;
    let r = args.r.unwrap_or(1.98 * calc.r0().min(1.0));
    let center = vec![0.0; args.dim];
    let problem = GridProblem::new(kernel, &center, r, args.nodes)?;
    let solver = Solver::new(&problem)?;
    let ni = problem.interior_points().len();
    let ne = problem.exterior_points().len();
    let mut annuli = Block::new("annuli", &["sample", "n", "r_n", "osc_n", "nodes", "used"]);
    let mut summary = Block::new(
        "summary",
        &[
            "sample",
            "beta_fit",
            "b_fit",
            "theta",
            "holder_quotient",
            "rhs_bound_empirical",
            "strictly_decreasing",
            "degenerate",
            "sup_u",
            "sup_f",
        ],
    );
    let file_f = match &args.f {
        SourceData::File(p) => Some(read_values(p)?),
        _ => None,
    };
    let file_g = match &args.g {
        BoundaryData::File(p) => Some(read_values(p)?),
        _ => None,
    };
    for sample in 0..args.samples.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        rng.set_stream(sample as u64);
        let mut g: Vec<f64> = match &file_g {
            Some(v) => v.clone(),
            None => (0..ne).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
        };
        let f: Vec<f64> = match (&args.f, &file_f) {
            (SourceData::File(_), Some(v)) => v.clone(),
            (SourceData::Manufactured, _) => {
                let us: Vec<f64> = problem.interior_points().iter().map(|p| manufactured_u(p)).collect();
                let ue: Vec<f64> = problem.exterior_points().iter().map(|p| manufactured_u(p)).collect();
                for (gv, uv) in g.iter_mut().zip(&ue) {
                    *gv = uv + 0.5 * *gv;
                }
                solver.matrix().apply(&us, &ue)
            }
            _ => vec![0.0; ni],
        };
        let sol = solver.solve(&f, &g)?;
        let rep = measure_regularity(&sol, &calc, args.a, &center)?;
        for row in &rep.rows {
            annuli.push(vec![sample.into(), row.n.into(), row.r_n.into(), row.osc.into(), row.nodes.into(), row.used.into()]);
        }
        summary.push(vec![
            sample.into(),
            rep.beta_fit.into(),
            rep.b_fit.into(),
            rep.theta.into(),
            rep.holder_quotient.into(),
            rep.rhs_bound_empirical.into(),
            rep.strictly_decreasing.into(),
            rep.degenerate.into(),
            rep.sup_u.into(),
            rep.sup_f.into(),
        ]);
    }
    Ok(vec![annuli, summary])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_output_and_tracks_params() {
        let a = ExperimentConfig::new("barrier", 1).param("dim", 1);
        let mut b = a.clone();
        b.output = Some(PathBuf::from("/tmp/x.csv"));
        assert_eq!(a.config_hash(), b.config_hash());
        let c = a.clone().param("dim", 2);
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn csv_has_header_and_blocks() {
        let cfg = ExperimentConfig::new("t", 0);
        let mut b = Block::new("x", &["a", "b"]);
        b.push(vec![1.5.into(), "q,r".into()]);
        let text = render(&cfg, &RunOutput { blocks: vec![b], failures: 0 }, 0.0).unwrap();
        assert!(text.contains("# block=x\na,b\n1.5,\"q,r\"\n"));
    }
}
