//! Exit places and hitting probabilities of intrinsic annuli.

use intrinsic_scale::process::{estimate_exit_place, estimate_hitting, LevyModel, SmallJumpMode, TargetSpec};
use intrinsic_scale::{JumpKernel, KernelProfile, ScaleCalculus, TailRule};

fn main() -> intrinsic_scale::Result<()> {
    let calc = ScaleCalculus::closed_form(KernelProfile::constant(1.0)?)?;
    let kernel = JumpKernel::new(calc.clone(), 1, TailRule::None)?;
    let r = 0.01;
    let model = LevyModel::with_auto_eps(kernel, r, SmallJumpMode::Drop)?;

    println!("exit place: P(|X_tau| >= s) against L(s)/L(r)");
    for s in [4.0 * r, 16.0 * r, 64.0 * r] {
        let rep = estimate_exit_place(&model, &[0.0], r, s, 50_000, 3)?;
        println!("  s = {s:.2}: p = {:.4} +- {:.4}, p L(r)/L(s) = {:.3}", rep.point_estimate, rep.std_error, rep.empirical_constant);
    }

    println!("hitting the half annulus B_phi_a(r) minus B_r before leaving B_phi_a(r)");
    for a in [2.0, 4.0, 8.0, 16.0] {
        let rep = estimate_hitting(&model, &[0.0], &[0.0], r, a, &TargetSpec::HalfAnnulus, 50_000, 4)?;
        println!(
            "  a = {a:>2}: phi_a(r) = {:.4}, p = {:.4} +- {:.4}, p a/ln a = {:.3}",
            calc.phi(a, r)?,
            rep.point_estimate,
            rep.std_error,
            rep.empirical_constant
        );
    }
    Ok(())
}
