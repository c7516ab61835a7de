//! Library values against independent reference computations.

mod common;

use std::f64::consts::PI;

use common::oracle;
use intrinsic_scale::experiment::manufactured_u;
use intrinsic_scale::measure::IntrinsicMeasure;
use intrinsic_scale::operator::{FnFunction, GaussianBump, OperatorEvaluator};
use intrinsic_scale::process::{LevyModel, SmallJumpMode};
use intrinsic_scale::regularity::GridProblem;
use intrinsic_scale::regvar::check_karamata;
use intrinsic_scale::symbol::LevySymbol;
use intrinsic_scale::{EvalMode, JumpKernel, KernelProfile, ScaleCalculus, TailRule};

fn ln2(s: f64) -> f64 {
    (2.0 / s).ln()
}

/// Library profile next to a hand-written ℓ.
fn cases() -> Vec<(KernelProfile, Box<dyn Fn(f64) -> f64>)> {
    vec![
        (KernelProfile::power_log_squared(1.0, 1.0).unwrap(), Box::new(|s: f64| ln2(s).powi(2) / s)),
        (KernelProfile::power_law(0.5, 1.0).unwrap(), Box::new(|s: f64| s.powf(-0.5))),
        (KernelProfile::power_law(1.5, 1.0).unwrap(), Box::new(|s: f64| s.powf(-1.5))),
        (KernelProfile::log(1.0).unwrap(), Box::new(ln2)),
        (KernelProfile::constant(1.0).unwrap(), Box::new(|_| 1.0)),
        (KernelProfile::inverse_log(1.0).unwrap(), Box::new(|s: f64| 1.0 / ln2(s))),
        (KernelProfile::power_log(0.3, 1.5, 0.8).unwrap(), Box::new(|s: f64| s.powf(-0.3) * ln2(s).powf(1.5))),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn gauss_legendre_reference_is_exact_on_polynomials() {
    let v = oracle::integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, 1);
    assert!((v - (255.0 / 8.0 - 9.0)).abs() < 1e-12);
}

#[test]
fn scale_matches_reference_quadrature() {
    for (p, ell) in cases() {
        let r0 = p.r0();
        for mode in [EvalMode::ClosedForm, EvalMode::Tabulated] {
            let calc = ScaleCalculus::new(p.clone(), mode).unwrap();
            for r in [1e-9, 1e-5, 1e-2, 0.3 * r0, 0.9 * r0] {
                let want = oracle::scale_l(&ell, r, r0);
                let got = calc.eval_l(r).unwrap();
                let tol = if mode == EvalMode::ClosedForm { 1e-9 } else { 1e-7 };
                assert!(rel(got, want) < tol, "{} {mode:?} r={r}: {got} vs {want}", p.label());
            }
        }
    }
}

#[test]
fn inverse_matches_bisection() {
    for (p, ell) in cases() {
        let r0 = p.r0();
        let calc = ScaleCalculus::closed_form(p.clone()).unwrap();
        for r in [1e-8, 1e-3, 0.5 * r0] {
            let y = oracle::scale_l(&ell, r, r0);
            let want = oracle::bisect_decreasing(|s| oracle::scale_l(&ell, s, r0), y, 1e-12, r0 * (1.0 - 1e-12));
            let got = calc.invert_l(y).unwrap();
            assert!(rel(got, want) < 1e-8, "{} r={r}: {got} vs {want}", p.label());
        }
    }
}

#[test]
fn closed_form_scale_maps() {
    // ℓ ≡ 1: φ_a(s) = s^{1/a}; ℓ = s^{-1}: L = 1/s − 1 so φ_a(s) = as/(1 + (a − 1)s)
    let c = ScaleCalculus::closed_form(KernelProfile::constant(1.0).unwrap()).unwrap();
    let p = ScaleCalculus::closed_form(KernelProfile::power_law(1.0, 1.0).unwrap()).unwrap();
    for s in [1e-7, 1e-3, 0.2] {
        for a in [1.5, 3.0, 12.0] {
            assert!(rel(c.phi(a, s).unwrap(), s.powf(1.0 / a)) < 1e-12);
            assert!(rel(p.phi(a, s).unwrap(), a * s / (1.0 + (a - 1.0) * s)) < 1e-12);
        }
    }
}

#[test]
fn annulus_mass_by_integrating_the_density() {
    for (p, ell) in cases() {
        let r0 = p.r0();
        let calc = ScaleCalculus::closed_form(p.clone()).unwrap();
        for d in [1, 2, 3] {
            let mu = IntrinsicMeasure::new(calc.clone(), d).unwrap();
            let area = [2.0, 2.0 * PI, 4.0 * PI][d - 1];
            let (r, a) = (1e-3, 3.0);
            let outer = calc.phi(a, r).unwrap();
            // density ℓ/(L ρ^d) times the shell area ρ^{d−1} |S|
            let mass = area * oracle::integrate_log(|s| ell(s) / oracle::scale_l(&ell, s, r0), r, outer, 40);
            assert!(rel(mass, area * a.ln()) < 1e-8, "{} d={d}: {mass}", p.label());
            assert!(rel(mu.mu_annulus(r, outer).unwrap(), mass) < 1e-8);
        }
    }
}

#[test]
fn symbol_matches_reference() {
    for (p, ell) in cases().into_iter().skip(1).take(4) {
        let sym = LevySymbol::new(ScaleCalculus::closed_form(p.clone()).unwrap(), 1, TailRule::None).unwrap();
        for xi in [3.0, 50.0, 700.0] {
            let want = oracle::symbol_1d(&ell, xi, p.r0());
            let got = sym.psi(&[xi]).unwrap();
            assert!(rel(got, want) < 1e-6, "{} xi={xi}: {got} vs {want}", p.label());
        }
    }
}

#[test]
fn constant_symbol_closed_form() {
    // 2∫_0^1 (1 − cos ξs)/s ds = 2(γ + ln ξ − Ci(ξ)); Ci(10) = −0.0454564330
    let sym = LevySymbol::new(ScaleCalculus::closed_form(KernelProfile::constant(1.0).unwrap()).unwrap(), 1, TailRule::None)
        .unwrap();
    let want = 2.0 * (0.5772156649015329 + 10f64.ln() + 0.0454564330044554);
    assert!(rel(sym.psi(&[10.0]).unwrap(), want) < 1e-8);
}

#[test]
fn operator_matches_reference_1d() {
    for (p, ell) in cases().into_iter().filter(|(p, _)| p.alpha() <= 1.0) {
        let ev = OperatorEvaluator::new(JumpKernel::new(ScaleCalculus::closed_form(p.clone()).unwrap(), 1, TailRule::None).unwrap());
        let bump = GaussianBump::new(vec![0.1], 0.3);
        for x in [0.0, 0.1, 0.37, 0.9] {
            let u = |y: f64| (-(y - 0.1) * (y - 0.1) / 0.09).exp();
            let u2 = |y: f64| u(y) * (4.0 * (y - 0.1) * (y - 0.1) / 0.0081 - 2.0 / 0.09);
            let want = oracle::operator_1d(&ell, u, u2, x, p.r0());
            let got = ev.apply(&bump, &[x]).unwrap();
            assert!((got - want).abs() < 1e-6 * (1.0 + want.abs()), "{} x={x}: {got} vs {want}", p.label());
        }
    }
}

#[test]
fn operator_matches_reference_2d() {
    let p = KernelProfile::log(1.0).unwrap();
    let ev = OperatorEvaluator::new(JumpKernel::new(ScaleCalculus::closed_form(p).unwrap(), 2, TailRule::None).unwrap());
    let u = |a: f64, b: f64| (1.3 * a).sin() * (0.7 * b).cos() + 0.2 * a * b;
    let f = FnFunction { f: |x: &[f64]| u(x[0], x[1]), scale: 0.7 };
    for x in [(0.0, 0.0), (0.2, -0.4)] {
        let want = oracle::operator_2d(ln2, u, x, 1.0);
        let got = ev.apply(&f, &[x.0, x.1]).unwrap();
        assert!((got - want).abs() < 1e-6 * (1.0 + want.abs()), "{x:?}: {got} vs {want}");
    }
}

#[test]
fn intensity_and_small_jump_variance() {
    for (p, ell) in cases() {
        let calc = ScaleCalculus::closed_form(p.clone()).unwrap();
        for d in [1, 2] {
            let kernel = JumpKernel::new(calc.clone(), d, TailRule::None).unwrap();
            let area = kernel.sphere_area();
            let eps = 1e-3;
            let m = LevyModel::new(kernel, eps, SmallJumpMode::GaussianApprox).unwrap();
            let lambda = area * oracle::scale_l(&ell, eps, p.r0());
            let sigma2 = area * oracle::integrate_log(|s| s * s * ell(s), 1e-30, eps, 400) / d as f64;
            assert!(rel(m.intensity(), lambda) < 1e-9, "{}", p.label());
            assert!(rel(m.sigma2(), sigma2) < 1e-8, "{}: {} vs {sigma2}", p.label(), m.sigma2());
        }
    }
}

#[test]
fn karamata_ratio_against_direct_integral() {
    for (p, ell) in cases() {
        let (rho, r) = (1.0 + p.alpha(), 1e-3);
        let direct = oracle::integrate_log(|s| s.powf(rho + 1.0) * ell(s), 1e-30, r, 600) / (r.powf(rho + 1.0) * ell(r));
        let got = check_karamata(&p, rho, r).unwrap();
        assert!(rel(got, direct) < 1e-8, "{}: {got} vs {direct}", p.label());
    }
}

#[test]
fn grid_operator_is_consistent() {
    // the discrete operator on a smooth function approaches the continuum
    // value at the centre as the lattice is refined
    let p = KernelProfile::constant(0.5).unwrap();
    let calc = ScaleCalculus::closed_form(p).unwrap();
    let u2 = |y: f64| -2.25 * (1.5 * y).sin() + 0.5;
    let want = oracle::operator_1d(|_| 1.0, |y| manufactured_u(&[y]), u2, 0.0, 0.5);
    let mut errors = Vec::new();
    for nodes in [127, 511, 2047] {
        let prob = GridProblem::new(JumpKernel::new(calc.clone(), 1, TailRule::None).unwrap(), &[0.0], 0.25, nodes).unwrap();
        let m = prob.assemble().unwrap();
        let ui: Vec<f64> = prob.interior_points().iter().map(|x| manufactured_u(x)).collect();
        let ue: Vec<f64> = prob.exterior_points().iter().map(|x| manufactured_u(x)).collect();
        let au = m.apply(&ui, &ue);
        let mid = ui.len() / 2;
        assert!(prob.interior_points()[mid][0].abs() < 1e-12);
        errors.push((au[mid] - want).abs() / want.abs());
    }
    assert!(errors[2] < errors[0] && errors[2] < 1e-2, "{errors:?}");
}
