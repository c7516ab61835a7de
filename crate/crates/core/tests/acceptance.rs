//! Acceptance run: one PASS/FAIL line per criterion, with the observed
//! figure, the requirement and the runtime against its budget.
//!
//! Run with `cargo test --test acceptance`. The process fails when a
//! criterion fails, except for those listed in `UNATTAINABLE`, which are
//! still executed and reported as FAIL.

use std::f64::consts::E;
use std::process::Command;
use std::time::Instant;

use intrinsic_scale::checks::ks_statistic;
use intrinsic_scale::experiment::{fast_calculus, manufactured_u};
use intrinsic_scale::measure::IntrinsicMeasure;
use intrinsic_scale::operator::{default_barrier_radii, OperatorEvaluator};
use intrinsic_scale::process::{estimate_hitting, estimate_mean_exit, LevyModel, SmallJumpMode, TargetSpec};
use intrinsic_scale::regularity::{measure_regularity, GridProblem, RegularityReport, Solver};
use intrinsic_scale::symbol::{default_xi_grid, LevySymbol};
use intrinsic_scale::{JumpKernel, KernelProfile, ScaleCalculus, TailRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240601;

/// Criteria that cannot hold for any correct implementation; the reason is
/// printed next to the FAIL line.
const UNATTAINABLE: &[(usize, &str)] = &[(
    7,
    "targets and balls are nested in a, so the hitting probability is nondecreasing in a \
     while a/ln a doubles between a = 2 and a = 16; min <= 0.5 max is forced",
)];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn s_grid() -> Vec<f64> {
    vec![1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.2, 0.5]
}

fn table_constant() -> Outcome {
    let calc = ScaleCalculus::closed_form(KernelProfile::constant(1.0).unwrap()).unwrap();
    let (mut worst_l, mut worst_phi) = (0.0_f64, 0.0_f64);
    for s in s_grid() {
        let exact = (1.0 / s).ln();
        worst_l = worst_l.max((calc.eval_l(s).unwrap() - exact).abs() / (1.0 + exact.abs()));
        for a in [2.0, 4.0, 10.0] {
            worst_phi = worst_phi.max((calc.phi(a, s).unwrap() - s.powf(1.0 / a)).abs());
        }
    }
    outcome(
        worst_l <= 1e-10 && worst_phi <= 1e-8,
        format!("L scaled error {worst_l:.2e} (<= 1e-10), phi error {worst_phi:.2e} (<= 1e-8)"),
    )
}

fn table_power_law() -> Outcome {
    let mut worst = 0.0_f64;
    for beta in [0.5, 1.0, 1.5] {
        let calc = ScaleCalculus::closed_form(KernelProfile::power_law(beta, 1.0).unwrap()).unwrap();
        for s in s_grid() {
            let exact = (s.powf(-beta) - 1.0) / beta;
            worst = worst.max((calc.eval_l(s).unwrap() - exact).abs() / exact);
        }
    }
    outcome(worst <= 1e-10, format!("max relative error {worst:.2e} (<= 1e-10)"))
}

fn annulus() -> Outcome {
    let mut worst = 0.0_f64;
    for p in KernelProfile::table_one(1.0).unwrap() {
        let calc = ScaleCalculus::closed_form(p).unwrap();
        for d in [1, 2] {
            let mu = IntrinsicMeasure::new(calc.clone(), d).unwrap();
            for a in [2.0, E, 10.0] {
                for r in [1e-4, 1e-2, 0.1] {
                    let m = mu.mu_annulus(r, calc.phi(a, r).unwrap()).unwrap();
                    let want = mu.sphere_area() * a.ln();
                    worst = worst.max((m - want).abs() / want);
                }
            }
        }
    }
    outcome(worst <= 1e-8, format!("max relative error {worst:.2e} (<= 1e-8)"))
}

fn symbol() -> Outcome {
    let mut spreads = Vec::new();
    let mut ok = true;
    for p in [KernelProfile::power_law(1.0, 1.0), KernelProfile::constant(1.0), KernelProfile::log(1.0)] {
        let p = p.unwrap();
        let sym = LevySymbol::new(ScaleCalculus::closed_form(p.clone()).unwrap(), 1, TailRule::None).unwrap();
        let rep = sym.comparability_report(&default_xi_grid()).unwrap();
        let spread = rep.ratio_max / rep.ratio_min;
        ok &= spread <= 50.0 && rep.ratio_min > 0.0;
        spreads.push(format!("{} {spread:.3}", p.label()));
    }
    outcome(ok, format!("spread {} (<= 50)", spreads.join(", ")))
}

fn sampler() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [KernelProfile::constant(1.0), KernelProfile::power_law(1.0, 1.0)] {
        let p = p.unwrap();
        let calc = fast_calculus(&p).unwrap();
        let model =
            LevyModel::new(JumpKernel::new(calc.clone(), 1, TailRule::None).unwrap(), 1e-3, SmallJumpMode::Drop).unwrap();
        let (d, crit) = ks_statistic(&model, &calc, 100_000, SEED).unwrap();
        ok &= d <= crit;
        parts.push(format!("{} D={d:.5}", p.label()));
    }
    outcome(ok, format!("{} (critical {:.5})", parts.join(", "), 1.9495 / 100_000f64.sqrt()))
}

fn mean_exit() -> Outcome {
    let calc = ScaleCalculus::closed_form(KernelProfile::constant(1.0).unwrap()).unwrap();
    let kernel = JumpKernel::new(calc.clone(), 1, TailRule::None).unwrap();
    // (E_0 τ L, SE) and (E_{r/4} τ L, SE) per r
    let mut centre = Vec::new();
    let mut quarter = Vec::new();
    for (k, r) in [0.1, 0.05, 0.02, 0.01].into_iter().enumerate() {
        let model = LevyModel::with_auto_eps(kernel.clone(), r, SmallJumpMode::Drop).unwrap();
        let lr = calc.eval_l(r).unwrap();
        let sum = estimate_mean_exit(&model, &[0.0], &[vec![0.0], vec![0.25 * r]], r, 100_000, SEED + k as u64).unwrap();
        centre.push((sum.reports[0].empirical_constant, sum.reports[0].std_error * lr));
        quarter.push((sum.reports[1].empirical_constant, sum.reports[1].std_error * lr));
    }
    let lo = centre.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let hi = centre.iter().map(|c| c.0).fold(0.0, f64::max);
    let se0 = centre.iter().map(|c| c.1).fold(0.0, f64::max);
    let mut inside = true;
    for &(v, se) in &quarter {
        let slack = 3.0 * (se * se + se0 * se0).sqrt();
        inside &= v >= lo - slack && v <= hi + slack;
    }
    let q: Vec<String> = quarter.iter().map(|q| format!("{:.4}", q.0)).collect();
    outcome(
        hi / lo <= 5.0 && inside,
        format!(
            "E_0 tau L(r) in [{lo:.4}, {hi:.4}], factor {:.3} (<= 5); E_r/4 tau L(r) = [{}] within bracket +- 3 SE: {inside}",
            hi / lo,
            q.join(", ")
        ),
    )
}

fn hitting() -> Outcome {
    let calc = ScaleCalculus::closed_form(KernelProfile::constant(1.0).unwrap()).unwrap();
    let kernel = JumpKernel::new(calc, 1, TailRule::None).unwrap();
    let r = 0.01;
    let model = LevyModel::with_auto_eps(kernel, r, SmallJumpMode::Drop).unwrap();
    let mut est = Vec::new();
    let mut scaled = Vec::new();
    for a in [2.0, 4.0, 8.0, 16.0] {
        let rep = estimate_hitting(&model, &[0.0], &[0.0], r, a, &TargetSpec::HalfAnnulus, 100_000, SEED).unwrap();
        est.push(rep.point_estimate);
        scaled.push(rep.empirical_constant);
    }
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    let positive = est.iter().all(|&p| p > 0.0);
    let s: Vec<String> = scaled.iter().map(|v| format!("{v:.4}")).collect();
    outcome(
        lo >= 0.5 * hi && positive,
        format!("p*a/ln a = [{}], min/max {:.3} (>= 0.5), all p > 0: {positive}", s.join(", "), lo / hi),
    )
}

fn barrier() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [KernelProfile::constant(1.0), KernelProfile::power_law(1.0, 1.0)] {
        let p = p.unwrap();
        let ev = OperatorEvaluator::new(
            JumpKernel::new(ScaleCalculus::closed_form(p.clone()).unwrap(), 1, TailRule::None).unwrap(),
        );
        let rep = ev.barrier_report(&default_barrier_radii(), None).unwrap();
        ok &= rep.spread <= 10.0;
        parts.push(format!("{} spread {:.3}", p.label(), rep.spread));
    }
    outcome(ok, format!("{} (<= 10)", parts.join(", ")))
}

fn regularity() -> Outcome {
    let calc = ScaleCalculus::closed_form(KernelProfile::constant(1.0).unwrap()).unwrap();
    let kernel = JumpKernel::new(calc.clone(), 1, TailRule::None).unwrap();
    let problem = GridProblem::new(kernel, &[0.0], 1.98, 1024).unwrap();
    let solver = Solver::new(&problem).unwrap();
    let ni = problem.interior_points().len();
    let us: Vec<f64> = problem.interior_points().iter().map(|p| manufactured_u(p)).collect();
    let ue: Vec<f64> = problem.exterior_points().iter().map(|p| manufactured_u(p)).collect();
    let f_star = solver.matrix().apply(&us, &ue);

    let mut decay_ok = true;
    let mut min_annuli = usize::MAX;
    let mut min_b = f64::INFINITY;
    let mut constants = Vec::new();
    for sample in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream(sample);
        let signs: Vec<f64> = ue.iter().map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();

        let sol = solver.solve(&vec![0.0; ni], &signs).unwrap();
        let rep: RegularityReport = measure_regularity(&sol, &calc, 4.0, &[0.0]).unwrap();
        let used = rep.rows.iter().filter(|r| r.used).count();
        min_annuli = min_annuli.min(used);
        min_b = min_b.min(rep.b_fit);
        decay_ok &= rep.strictly_decreasing && used >= 4 && rep.b_fit > 1.0 && !rep.degenerate;

        let g: Vec<f64> = ue.iter().zip(&signs).map(|(u, s)| u + 0.5 * s).collect();
        let sol = solver.solve(&f_star, &g).unwrap();
        constants.push(measure_regularity(&sol, &calc, 4.0, &[0.0]).unwrap().rhs_bound_empirical);
    }
    let lo = constants.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = constants.iter().copied().fold(0.0, f64::max);
    let stable = lo > 0.0 && hi.is_finite() && hi / lo <= 3.0;
    outcome(
        decay_ok && stable,
        format!(
            "f = 0: strictly decreasing in all runs: {decay_ok}, min usable annuli {min_annuli} (>= 4), min b {min_b:.3} (> 1); \
             manufactured f: constant in [{lo:.4e}, {hi:.4e}], factor {:.3} (<= 3)",
            hi / lo
        ),
    )
}

fn check_command() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_intrinsic-scale"))
        .args(["check", "--seed", "7"])
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&out.stdout);
    let rows = text.lines().filter(|l| l.ends_with(",true") || l.ends_with(",false")).count();
    let failed = text.lines().filter(|l| l.ends_with(",false")).count();
    outcome(
        out.status.code() == Some(0),
        format!("exit code {:?}, {rows} invariants, {failed} failed", out.status.code()),
    )
}

fn main() {
    let criteria: [(usize, &str, f64, fn() -> Outcome); 10] = [
        (1, "constant profile L and phi exact", 1.0, table_constant),
        (2, "power-law L exact", 1.0, table_power_law),
        (3, "annulus identity", 5.0, annulus),
        (4, "symbol comparability", 60.0, symbol),
        (5, "jump radius law (KS)", 10.0, sampler),
        (6, "mean exit time scaling", 300.0, mean_exit),
        (7, "hitting lower bound shape", 300.0, hitting),
        (8, "barrier uniformity", 60.0, barrier),
        (9, "regularity decay", 600.0, regularity),
        (10, "invariant suites", 300.0, check_command),
    ];
    let mut unexpected = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let passed = o.passed && secs < budget;
        let verdict = if passed { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict} {name}: {}; runtime {secs:.2} s (< {budget} s)", o.detail);
        if !passed {
            match UNATTAINABLE.iter().find(|(k, _)| *k == id) {
                Some((_, why)) => println!("             known unattainable: {why}"),
                None => unexpected += 1,
            }
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
