//! Compound-Poisson simulation of the isotropic jump process with Lévy
//! measure j(|h|) dh and the exit / hitting estimators built on it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::JumpKernel;

pub const DEFAULT_MAX_EVENTS: u64 = 10_000_000;
/// Paths per random-number substream.
pub const SHARD_SIZE: usize = 1024;
/// Largest tolerated fraction of truncated paths.
pub const MAX_TRUNCATED_FRACTION: f64 = 1e-3;
/// Diffusive displacement budget of the automatic ε rule.
pub const EPS_RULE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallJumpMode {
    /// Jumps shorter than ε are discarded.
    #[default]
    Drop,
    /// Jumps shorter than ε are replaced by a Brownian motion with the
    /// same covariance.
    GaussianApprox,
}

/// Kernel plus small-jump policy.
#[derive(Clone, Debug)]
pub struct LevyModel {
    kernel: JumpKernel,
    eps: f64,
    mode: SmallJumpMode,
    l_eps: f64,
    intensity: f64,
    sigma2: f64,
    max_events: u64,
}

impl LevyModel {
    pub fn new(kernel: JumpKernel, eps: f64, mode: SmallJumpMode) -> Result<Self> {
        let calc = kernel.calculus();
        if !(eps >= calc.r_min() && eps < kernel.support()) {
            return Err(Error::Config(format!("ε = {eps} must lie in [r_min, R₀)")));
        }
        let l_eps = calc.eval_l(eps)?;
        let intensity = kernel.sphere_area() * l_eps;
        let sigma2 = kernel.sphere_area() * calc.second_moment(eps)? / kernel.dim() as f64;
        Ok(LevyModel { kernel, eps, mode, l_eps, intensity, sigma2, max_events: DEFAULT_MAX_EVENTS })
    }

    /// Model with ε chosen by [`auto_eps`] for balls of radius r.
    pub fn with_auto_eps(kernel: JumpKernel, r: f64, mode: SmallJumpMode) -> Result<Self> {
        let eps = auto_eps(&kernel, r)?;
        Self::new(kernel, eps, mode)
    }

    pub fn with_max_events(mut self, max_events: u64) -> Self {
        self.max_events = max_events.max(1);
        self
    }

    pub fn kernel(&self) -> &JumpKernel {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn mode(&self) -> SmallJumpMode {
        self.mode
    }

    /// Λ(ε) = |∂B₁| L(ε), the rate of jumps longer than ε.
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    /// Per-coordinate variance rate of the omitted small jumps.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn max_events(&self) -> u64 {
        self.max_events
    }

    /// L⁻¹(u·L(ε)), a radius with P(|J| > s) = L(s)/L(ε).
    pub fn sample_jump_radius(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("uniform variate {u} outside (0,1)")));
        }
        let r = self.kernel.calculus().invert_l(u * self.l_eps)?;
        Ok(r.max(self.eps))
    }

    fn sample_direction<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        match out.len() {
            1 => out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 },
            2 => {
                let th = 2.0 * PI * rng.random::<f64>();
                out[0] = th.cos();
                out[1] = th.sin();
            }
            _ => loop {
                let mut n2 = 0.0;
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                    n2 += *v * *v;
                }
                if n2 > 1e-300 {
                    let n = n2.sqrt();
                    out.iter_mut().for_each(|v| *v /= n);
                    break;
                }
            },
        }
    }

    fn open_uniform<R: Rng>(rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                return u;
            }
        }
    }
}

/// Largest ε with σ²(ε) ≤ 10⁻⁴ r² L(r), capped at r/10: the diffusive
/// displacement of the discarded jumps over the expected exit horizon
/// 1/L(r) then stays below 1% of r.
pub fn auto_eps(kernel: &JumpKernel, r: f64) -> Result<f64> {
    let calc = kernel.calculus();
    if !(r > 0.0 && r < kernel.support()) {
        return Err(Error::domain(format!("radius {r} outside (0, R₀)")));
    }
    let target = EPS_RULE * r * r * calc.eval_l(r)?;
    let d = kernel.dim() as f64;
    let sigma2 = |e: f64| -> Result<f64> { Ok(kernel.sphere_area() * calc.second_moment(e)? / d) };
    let hi = (0.1 * r).min(0.5 * kernel.support());
    if sigma2(hi)? <= target {
        return Ok(hi);
    }
    let lo = calc.r_min() * 10.0;
    if sigma2(lo)? > target {
        return Err(Error::domain("no admissible ε above r_min"));
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if sigma2(m.exp())? <= target {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    Ok(a.exp())
}

/// Target set of a hitting problem, relative to the ball center.
#[derive(Clone)]
pub enum TargetSet {
    /// {x₁ − c₁ > 0} ∩ {r_in ≤ |x − c| < r_out}.
    HalfAnnulus { r_in: f64, r_out: f64 },
    /// {r_in ≤ |x − c| < r_out}.
    Annulus { r_in: f64, r_out: f64 },
    /// Membership test on the offset x − c.
    Custom { name: String, contains: Arc<dyn Fn(&[f64]) -> bool + Send + Sync> },
}

impl fmt::Debug for TargetSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl TargetSet {
    pub fn describe(&self) -> String {
        match self {
            TargetSet::HalfAnnulus { r_in, r_out } => format!("half_annulus({r_in},{r_out})"),
            TargetSet::Annulus { r_in, r_out } => format!("annulus({r_in},{r_out})"),
            TargetSet::Custom { name, .. } => format!("custom({name})"),
        }
    }

    fn contains(&self, offset: &[f64]) -> bool {
        let n = norm(offset);
        match self {
            TargetSet::HalfAnnulus { r_in, r_out } => offset[0] > 0.0 && n >= *r_in && n < *r_out,
            TargetSet::Annulus { r_in, r_out } => n >= *r_in && n < *r_out,
            TargetSet::Custom { contains, .. } => contains(offset),
        }
    }
}

/// Stop at the exit from the open ball B_radius(center), on entering the
/// target, or at the horizon, whichever comes first.
#[derive(Clone, Debug)]
pub struct StopRule {
    pub center: Vec<f64>,
    pub radius: f64,
    pub target: Option<TargetSet>,
    pub horizon: Option<f64>,
}

impl StopRule {
    pub fn exit(center: &[f64], radius: f64) -> Self {
        StopRule { center: center.to_vec(), radius, target: None, horizon: None }
    }

    pub fn with_target(mut self, target: TargetSet) -> Self {
        self.target = Some(target);
        self
    }

    pub fn with_horizon(mut self, t: f64) -> Self {
        self.horizon = Some(t);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Exit,
    Hit,
    Horizon,
    Truncated,
}

#[derive(Clone, Debug)]
pub struct PathRecord {
    pub position: Vec<f64>,
    pub time: f64,
    pub reason: StopReason,
    pub events: u64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Simulates one path from x0 with its own seed.
pub fn simulate_path(model: &LevyModel, x0: &[f64], stop: &StopRule, seed: u64) -> Result<PathRecord> {
    if x0.len() != model.dim() || stop.center.len() != model.dim() {
        return Err(Error::domain("point dimension does not match the model"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(run_path(model, x0, stop, &mut rng))
}

fn run_path<R: Rng>(model: &LevyModel, x0: &[f64], stop: &StopRule, rng: &mut R) -> PathRecord {
    let d = model.dim();
    let mut x = x0.to_vec();
    let mut offset = vec![0.0; d];
    let status = |x: &[f64], off: &mut [f64]| -> Option<StopReason> {
        for i in 0..d {
            off[i] = x[i] - stop.center[i];
        }
        if let Some(t) = &stop.target {
            if t.contains(off) {
                return Some(StopReason::Hit);
            }
        }
        if norm(off) >= stop.radius {
            return Some(StopReason::Exit);
        }
        None
    };
    if let Some(reason) = status(&x, &mut offset) {
        return PathRecord { position: x, time: 0.0, reason, events: 0 };
    }
    let kappa = model.kernel.kappa();
    let rate = kappa * model.intensity;
    let coeff = model.kernel.coefficient_field().cloned();
    let gaussian = model.mode == SmallJumpMode::GaussianApprox && model.sigma2 > 0.0;
    let dt_sub = 1.0 / (100.0 * model.intensity);
    let mut t = 0.0;
    let mut events = 0u64;
    let mut dir = vec![0.0; d];
    let mut h = vec![0.0; d];
    let mut y = vec![0.0; d];
    loop {
        if events >= model.max_events {
            return PathRecord { position: x, time: t, reason: StopReason::Truncated, events };
        }
        let wait: f64 = rng.sample::<f64, _>(Exp1) / rate;
        let mut seg_end = t + wait;
        let mut at_horizon = false;
        if let Some(tmax) = stop.horizon {
            if seg_end > tmax {
                seg_end = tmax;
                at_horizon = true;
            }
        }
        if gaussian {
            while t < seg_end {
                let step = dt_sub.min(seg_end - t);
                let sd = (model.sigma2 * step).sqrt();
                for i in 0..d {
                    let z: f64 = rng.sample(StandardNormal);
                    y[i] = x[i] + sd * z;
                }
                t += step;
                let d0 = stop.radius - dist(&x, &stop.center);
                let d1 = stop.radius - dist(&y, &stop.center);
                x.copy_from_slice(&y);
                if let Some(reason) = status(&x, &mut offset) {
                    return PathRecord { position: x, time: t, reason, events };
                }
                // Brownian-bridge crossing of the sphere between substeps
                let p = (-2.0 * d0 * d1 / (model.sigma2 * step)).exp();
                if rng.random::<f64>() < p {
                    return PathRecord { position: x, time: t, reason: StopReason::Exit, events };
                }
            }
        }
        t = seg_end;
        if at_horizon {
            return PathRecord { position: x, time: t, reason: StopReason::Horizon, events };
        }
        events += 1;
        let u = LevyModel::open_uniform(rng);
        let radius = model.sample_jump_radius(u).unwrap_or(model.eps);
        model.sample_direction(rng, &mut dir);
        for i in 0..d {
            h[i] = radius * dir[i];
        }
        if let Some(c) = &coeff {
            let accept = c.value(&x, &h) / kappa;
            if rng.random::<f64>() >= accept {
                continue;
            }
        }
        for i in 0..d {
            x[i] += h[i];
        }
        if let Some(reason) = status(&x, &mut offset) {
            return PathRecord { position: x, time: t, reason, events };
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    ExitTimeTail,
    MeanExitTime,
    ExitPlace,
    Hitting,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::ExitTimeTail => "exit-tail",
            Estimator::MeanExitTime => "mean-exit",
            Estimator::ExitPlace => "exit-place",
            Estimator::Hitting => "hitting",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportParams {
    pub r: f64,
    pub s: Option<f64>,
    pub a: Option<f64>,
    pub t: Option<f64>,
    pub start: Vec<f64>,
    pub set: Option<String>,
}

/// Monte Carlo estimate with its sampling error and the implied constant
/// of the inequality being probed.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub estimator: Estimator,
    pub params: ReportParams,
    pub n_paths: u64,
    pub n_used: u64,
    pub n_truncated: u64,
    pub point_estimate: f64,
    /// Sample standard deviation / √n_used.
    pub std_error: f64,
    pub seed: u64,
    pub wall_time: f64,
    pub empirical_constant: f64,
    /// No event observed; `upper_bound` holds a 95% upper confidence bound.
    pub zero_events: bool,
    pub upper_bound: Option<f64>,
}

impl SimulationReport {
    /// Equality of everything except the wall time, bit for bit.
    pub fn same_outcome(&self, other: &SimulationReport) -> bool {
        let b = |x: f64, y: f64| x.to_bits() == y.to_bits();
        self.estimator == other.estimator
            && self.params == other.params
            && self.n_paths == other.n_paths
            && self.n_used == other.n_used
            && self.n_truncated == other.n_truncated
            && b(self.point_estimate, other.point_estimate)
            && b(self.std_error, other.std_error)
            && self.seed == other.seed
            && b(self.empirical_constant, other.empirical_constant)
            && self.zero_events == other.zero_events
            && self.upper_bound.map(f64::to_bits) == other.upper_bound.map(f64::to_bits)
    }

    /// Interval point_estimate ± 3·std_error.
    pub fn interval(&self) -> (f64, f64) {
        (self.point_estimate - 3.0 * self.std_error, self.point_estimate + 3.0 * self.std_error)
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    truncated: u64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return Moments { truncated: self.truncated + o.truncated, ..o };
        }
        if o.n == 0 {
            return Moments { truncated: self.truncated + o.truncated, ..self };
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + delta * delta * (self.n as f64 * o.n as f64) / n as f64,
            truncated: self.truncated + o.truncated,
        }
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
    }
}

/// Runs `n_paths` samples on substreams (seed, stream_base + shard) and
/// merges shard statistics in shard order, so the result does not depend
/// on the thread count.
fn run_sharded<F>(n_paths: usize, seed: u64, stream_base: u64, sample: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng) -> Option<f64> + Sync,
{
    let shards = n_paths.div_ceil(SHARD_SIZE);
    let parts: Vec<Moments> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + k as u64);
            let count = SHARD_SIZE.min(n_paths - k * SHARD_SIZE);
            let mut m = Moments::default();
            for _ in 0..count {
                match sample(&mut rng) {
                    Some(v) => m.push(v),
                    None => m.truncated += 1,
                }
            }
            m
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

fn check_inputs(model: &LevyModel, x0: &[f64], n_paths: usize) -> Result<()> {
    if x0.len() != model.dim() {
        return Err(Error::domain("start point dimension does not match the model"));
    }
    if n_paths < 2 {
        return Err(Error::Config("need at least two paths".into()));
    }
    Ok(())
}

fn finish(
    estimator: Estimator,
    params: ReportParams,
    m: Moments,
    n_paths: usize,
    seed: u64,
    started: Instant,
    bernoulli: bool,
    constant: impl Fn(f64) -> f64,
) -> Result<SimulationReport> {
    let frac = m.truncated as f64 / n_paths as f64;
    if frac > MAX_TRUNCATED_FRACTION {
        return Err(Error::Truncation(format!(
            "{} of {n_paths} paths hit the event limit ({:.3}%)",
            m.truncated,
            100.0 * frac
        )));
    }
    let zero = bernoulli && m.mean == 0.0;
    let upper = if zero { Some(-(0.05f64).ln() / m.n as f64) } else { None };
    let std_error = if zero { 0.0 } else { m.std_error() };
    Ok(SimulationReport {
        estimator,
        params,
        n_paths: n_paths as u64,
        n_used: m.n,
        n_truncated: m.truncated,
        point_estimate: m.mean,
        std_error,
        seed,
        wall_time: started.elapsed().as_secs_f64(),
        empirical_constant: constant(upper.unwrap_or(m.mean)),
        zero_events: zero,
        upper_bound: upper,
    })
}

/// P_{x0}(τ_{B_r(x0)} ≤ t) with implied C₁ = estimate/(t L(r)).
pub fn estimate_exit_tail(
    model: &LevyModel,
    x0: &[f64],
    r: f64,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<SimulationReport> {
    check_inputs(model, x0, n_paths)?;
    if !(t > 0.0) {
        return Err(Error::domain("horizon must be positive"));
    }
    let lr = model.kernel.calculus().eval_l(r)?;
    let started = Instant::now();
    let stop = StopRule::exit(x0, r).with_horizon(t);
    let m = run_sharded(n_paths, seed, 0, |rng| match run_path(model, x0, &stop, rng).reason {
        StopReason::Truncated => None,
        StopReason::Exit => Some(1.0),
        _ => Some(0.0),
    });
    let params = ReportParams { r, t: Some(t), start: x0.to_vec(), ..Default::default() };
    finish(Estimator::ExitTimeTail, params, m, n_paths, seed, started, true, |p| p / (t * lr))
}

/// Mean exit times from several starting points.
#[derive(Clone, Debug, Serialize)]
pub struct MeanExitSummary {
    pub reports: Vec<SimulationReport>,
    /// max_x E_x τ · L(r).
    pub c2: f64,
    /// min over starts in B_{r/2} of E_x τ · L(r) (NaN if none).
    pub c3: f64,
}

/// E_{x0+o} τ_{B_r(x0)} for each offset o; each report carries E τ·L(r).
pub fn estimate_mean_exit(
    model: &LevyModel,
    x0: &[f64],
    offsets: &[Vec<f64>],
    r: f64,
    n_paths: usize,
    seed: u64,
) -> Result<MeanExitSummary> {
    check_inputs(model, x0, n_paths)?;
    if offsets.is_empty() {
        return Err(Error::Config("no starting offsets".into()));
    }
    let lr = model.kernel.calculus().eval_l(r)?;
    let stop = StopRule::exit(x0, r);
    let mut reports = Vec::with_capacity(offsets.len());
    let (mut c2, mut c3) = (0.0_f64, f64::INFINITY);
    for (k, off) in offsets.iter().enumerate() {
        if off.len() != model.dim() {
            return Err(Error::domain("offset dimension does not match the model"));
        }
        let start: Vec<f64> = x0.iter().zip(off).map(|(a, b)| a + b).collect();
        let started = Instant::now();
        let m = run_sharded(n_paths, seed, (k as u64) << 40, |rng| {
            let rec = run_path(model, &start, &stop, rng);
            (rec.reason != StopReason::Truncated).then_some(rec.time)
        });
        let params = ReportParams { r, start: start.clone(), ..Default::default() };
        let rep = finish(Estimator::MeanExitTime, params, m, n_paths, seed, started, false, |v| v * lr)?;
        c2 = c2.max(rep.empirical_constant);
        if norm(off) < 0.5 * r {
            c3 = c3.min(rep.empirical_constant);
        }
        reports.push(rep);
    }
    Ok(MeanExitSummary { reports, c2, c3: if c3.is_finite() { c3 } else { f64::NAN } })
}

/// P_{x0}(X_{τ_{B_r}} ∉ B_s(x0)) with implied C₄ = estimate·L(r)/L(s).
pub fn estimate_exit_place(
    model: &LevyModel,
    x0: &[f64],
    r: f64,
    s: f64,
    n_paths: usize,
    seed: u64,
) -> Result<SimulationReport> {
    check_inputs(model, x0, n_paths)?;
    if !(s > 2.0 * r) {
        return Err(Error::domain("exit place needs s > 2r"));
    }
    let calc = model.kernel.calculus();
    let lr = calc.eval_l(r)?;
    let ls = calc.l_or_zero(s)?;
    let started = Instant::now();
    let stop = StopRule::exit(x0, r);
    let m = run_sharded(n_paths, seed, 0, |rng| {
        let rec = run_path(model, x0, &stop, rng);
        match rec.reason {
            StopReason::Truncated => None,
            _ => Some(if dist(&rec.position, x0) >= s { 1.0 } else { 0.0 }),
        }
    });
    let params = ReportParams { r, s: Some(s), start: x0.to_vec(), ..Default::default() };
    finish(Estimator::ExitPlace, params, m, n_paths, seed, started, true, |p| {
        if ls > 0.0 {
            p * lr / ls
        } else if p == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    })
}

/// Which set a hitting estimate targets.
#[derive(Clone, Debug)]
pub enum TargetSpec {
    /// Half of the intrinsic annulus B_{φ_a(r)} ∖ B_r (first coordinate positive).
    HalfAnnulus,
    /// The whole intrinsic annulus.
    Annulus,
    /// A user set (offsets from x0).
    Custom(TargetSet),
}

/// P_y(T_A < τ_{B_{φ_a(r)}(x0)}) with implied C₅ = estimate·a/ln a.
#[allow(clippy::too_many_arguments)]
pub fn estimate_hitting(
    model: &LevyModel,
    x0: &[f64],
    y: &[f64],
    r: f64,
    a: f64,
    set: &TargetSpec,
    n_paths: usize,
    seed: u64,
) -> Result<SimulationReport> {
    check_inputs(model, x0, n_paths)?;
    if y.len() != x0.len() {
        return Err(Error::domain("start point dimension does not match the model"));
    }
    let phi = model.kernel.calculus().phi(a, r)?;
    let target = match set {
        TargetSpec::HalfAnnulus => TargetSet::HalfAnnulus { r_in: r, r_out: phi },
        TargetSpec::Annulus => TargetSet::Annulus { r_in: r, r_out: phi },
        TargetSpec::Custom(t) => t.clone(),
    };
    let started = Instant::now();
    let stop = StopRule::exit(x0, phi).with_target(target.clone());
    let m = run_sharded(n_paths, seed, 0, |rng| match run_path(model, y, &stop, rng).reason {
        StopReason::Truncated => None,
        StopReason::Hit => Some(1.0),
        _ => Some(0.0),
    });
    let params = ReportParams { r, a: Some(a), start: y.to_vec(), set: Some(target.describe()), ..Default::default() };
    finish(Estimator::Hitting, params, m, n_paths, seed, started, true, |p| p * a / a.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::TailRule;
    use crate::profile::KernelProfile;
    use crate::scale::ScaleCalculus;

    fn constant_model(eps: f64) -> LevyModel {
        let calc = ScaleCalculus::closed_form(KernelProfile::constant(1.0).unwrap()).unwrap();
        let k = JumpKernel::new(calc, 1, TailRule::None).unwrap();
        LevyModel::new(k, eps, SmallJumpMode::Drop).unwrap()
    }

    #[test]
    fn radius_sampler_endpoints() {
        let m = constant_model((-2.0f64).exp());
        assert!((m.sample_jump_radius(0.5).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((m.sample_jump_radius(1.0 - 1e-15).unwrap() - m.eps()).abs() < 1e-12);
        assert!((m.sample_jump_radius(1e-15).unwrap() - 1.0).abs() < 1e-12);
        assert!((m.intensity() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn start_outside_exits_immediately() {
        let m = constant_model(1e-3);
        let rec = simulate_path(&m, &[0.5], &StopRule::exit(&[0.0], 0.1), 1).unwrap();
        assert_eq!(rec.reason, StopReason::Exit);
        assert_eq!(rec.time, 0.0);
        assert_eq!(rec.position, vec![0.5]);
    }

    #[test]
    fn deterministic_in_seed() {
        let m = constant_model(1e-3);
        let a = estimate_exit_tail(&m, &[0.0], 0.05, 0.03, 3000, 9).unwrap();
        let b = estimate_exit_tail(&m, &[0.0], 0.05, 0.03, 3000, 9).unwrap();
        assert!(a.same_outcome(&b));
    }
}
