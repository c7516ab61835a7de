//! Randomized invariants.

use std::sync::Arc;

use intrinsic_scale::experiment::ExperimentConfig;
use intrinsic_scale::measure::IntrinsicMeasure;
use intrinsic_scale::operator::{CappedQuadratic, FnFunction, GaussianBump, OperatorEvaluator, TestFunction};
use intrinsic_scale::process::{simulate_path, LevyModel, SmallJumpMode, StopRule};
use intrinsic_scale::regularity::{GridProblem, Solver};
use intrinsic_scale::symbol::LevySymbol;
use intrinsic_scale::{JumpKernel, KernelProfile, ScaleCalculus, TailRule};
use proptest::prelude::*;

fn profile(kind: u8, beta: f64) -> KernelProfile {
    match kind % 6 {
        0 => KernelProfile::power_log_squared(beta, 1.0),
        1 => KernelProfile::power_law(beta.max(0.05), 1.0),
        2 => KernelProfile::log(1.0),
        3 => KernelProfile::constant(1.0),
        4 => KernelProfile::inverse_log(1.0),
        _ => KernelProfile::power_log(beta, 0.5, 1.0),
    }
    .unwrap()
}

fn calc(kind: u8, beta: f64) -> ScaleCalculus {
    ScaleCalculus::closed_form(profile(kind, beta)).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn l_is_strictly_decreasing(kind in 0u8..6, beta in 0.0..1.8f64, a in -10.0..-0.05f64, gap in 0.01..3.0f64) {
        let c = calc(kind, beta);
        let r1 = 10f64.powf(a);
        let r2 = (r1 * (1.0 + gap)).min(0.99);
        prop_assume!(r2 > r1);
        prop_assert!(c.eval_l(r1).unwrap() > c.eval_l(r2).unwrap());
    }

    #[test]
    fn inverse_round_trip(kind in 0u8..6, beta in 0.0..1.8f64, a in -10.0..-0.01f64) {
        let c = calc(kind, beta);
        let r = 10f64.powf(a);
        let y = c.eval_l(r).unwrap();
        let back = c.invert_l(y).unwrap();
        prop_assert!((c.eval_l(back).unwrap() - y).abs() <= 1e-9 * y);
    }

    #[test]
    fn scale_maps_compose(kind in 0u8..6, beta in 0.0..1.8f64, a in 1.0..6.0f64, b in 1.0..6.0f64, e in -9.0..-1.0f64) {
        let c = calc(kind, beta);
        let r = 10f64.powf(e);
        let ab = c.phi(a * b, r).unwrap();
        let two = c.phi(a, c.phi(b, r).unwrap()).unwrap();
        prop_assert!((ab - two).abs() <= 1e-8 * ab);
        prop_assert!(c.phi(a, r).unwrap() >= r * (1.0 - 1e-12));
    }

    #[test]
    fn intrinsic_annuli_have_equal_mass(kind in 0u8..6, beta in 0.0..1.8f64, a in 1.1..20.0f64, e in -8.0..-1.0f64, d in 1usize..4) {
        let c = calc(kind, beta);
        let r = 10f64.powf(e);
        let outer = c.phi(a, r).unwrap();
        prop_assume!(outer < 0.999);
        let mu = IntrinsicMeasure::new(c, d).unwrap();
        let m = mu.mu_annulus(r, outer).unwrap();
        let want = mu.sphere_area() * a.ln();
        prop_assert!((m - want).abs() <= 1e-8 * want);
    }

    #[test]
    fn symbol_is_even_and_nonnegative(kind in 0u8..6, beta in 0.0..1.5f64, xi in 0.1..2000.0f64) {
        let sym = LevySymbol::new(calc(kind, beta), 1, TailRule::None).unwrap();
        let p = sym.psi(&[xi]).unwrap();
        prop_assert!(p > 0.0);
        prop_assert!((p - sym.psi(&[-xi]).unwrap()).abs() <= 1e-8 * p);
    }

    #[test]
    fn operator_is_linear_and_kills_constants(kind in 0u8..6, beta in 0.0..1.0f64, k in -3.0..3.0f64, shift in -2.0..2.0f64, x in -0.5..0.5f64) {
        let ev = OperatorEvaluator::new(JumpKernel::new(calc(kind, beta), 1, TailRule::None).unwrap());
        let u = GaussianBump::new(vec![0.1], 0.25);
        let v = CappedQuadratic::new(vec![-0.2], 0.4);
        let w = FnFunction { f: |y: &[f64]| k * u.value(y) + v.value(y) + shift, scale: 0.25 };
        let (au, av) = (ev.apply(&u, &[x]).unwrap(), ev.apply(&v, &[x]).unwrap());
        let aw = ev.apply(&w, &[x]).unwrap();
        let scale = k.abs() * au.abs() + av.abs() + 1.0;
        prop_assert!((aw - (k * au + av)).abs() <= 1e-6 * scale, "{aw} vs {}", k * au + av);
    }

    #[test]
    fn operator_is_translation_invariant(kind in 0u8..6, beta in 0.0..1.0f64, v in -0.4..0.4f64, x in -0.3..0.3f64) {
        let ev = OperatorEvaluator::new(JumpKernel::new(calc(kind, beta), 1, TailRule::None).unwrap());
        let a = ev.apply(&GaussianBump::new(vec![0.0], 0.2), &[x]).unwrap();
        let b = ev.apply(&GaussianBump::new(vec![v], 0.2), &[x + v]).unwrap();
        prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()));
    }

    #[test]
    fn jump_radius_is_monotone_in_the_uniform(kind in 0u8..6, beta in 0.0..1.8f64, u in 0.001..0.998f64) {
        let kernel = JumpKernel::new(calc(kind, beta), 1, TailRule::None).unwrap();
        let m = LevyModel::new(kernel, 1e-4, SmallJumpMode::Drop).unwrap();
        let a = m.sample_jump_radius(u).unwrap();
        let b = m.sample_jump_radius(u + 0.001).unwrap();
        prop_assert!(a >= 1e-4 && b <= a && a < 1.0);
    }

    #[test]
    fn paths_replay_from_their_seed(seed in any::<u64>(), x in -0.05..0.05f64) {
        let kernel = JumpKernel::new(calc(3, 0.0), 1, TailRule::None).unwrap();
        let m = LevyModel::with_auto_eps(kernel, 0.1, SmallJumpMode::GaussianApprox).unwrap();
        let stop = StopRule::exit(&[0.0], 0.1);
        let a = simulate_path(&m, &[x], &stop, seed).unwrap();
        let b = simulate_path(&m, &[x], &stop, seed).unwrap();
        prop_assert_eq!(a.position, b.position);
        prop_assert_eq!(a.time.to_bits(), b.time.to_bits());
        prop_assert!(a.time > 0.0);
    }

    #[test]
    fn halved_coefficient_halves_the_operator(kind in 0u8..6, beta in 0.0..1.0f64, x in -0.2..0.2f64) {
        let kernel = JumpKernel::new(calc(kind, beta), 1, TailRule::None).unwrap();
        let half = kernel.clone().with_coefficient(Arc::new(intrinsic_scale::kernel::ConstantCoefficient(0.5))).unwrap();
        let u = GaussianBump::new(vec![0.05], 0.3);
        let a = OperatorEvaluator::new(kernel).apply(&u, &[x]).unwrap();
        let b = OperatorEvaluator::new(half).apply(&u, &[x]).unwrap();
        prop_assert!((2.0 * b - a).abs() <= 1e-6 * (1.0 + a.abs()));
    }

    #[test]
    fn config_hash_tracks_params(seed in any::<u64>(), r in 1e-3..1.0f64, other in 1e-3..1.0f64) {
        prop_assume!(r != other);
        let a = ExperimentConfig::new("simulate", seed).param("r", r);
        let b = ExperimentConfig::new("simulate", seed).param("r", other);
        prop_assert_ne!(a.config_hash(), b.config_hash());
        let mut c = a.clone();
        c.output = Some("elsewhere.csv".into());
        prop_assert_eq!(a.config_hash(), c.config_hash());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn discrete_maximum_principle(kind in 0u8..6, beta in 0.0..1.0f64, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let kernel = JumpKernel::new(calc(kind, beta), 1, TailRule::None).unwrap();
        let p = GridProblem::new(kernel, &[0.0], 0.3, 127).unwrap();
        let solver = Solver::new(&p).unwrap();
        let m = solver.matrix();
        prop_assert!(m.min_off_diagonal() >= 0.0);
        prop_assert!(m.asymmetry() <= 1e-12);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..p.exterior_points().len()).map(|_| rng.random_range(-1.0..2.0)).collect();
        let (lo, hi) = g.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        let sol = solver.solve(&vec![0.0; p.interior_points().len()], &g).unwrap();
        prop_assert!(sol.u.iter().all(|v| *v >= lo - 1e-10 && *v <= hi + 1e-10));
    }
}
