//! Mean exit times from small balls: E τ_{B_r} L(r) stays bounded as r → 0
//! even though E τ itself goes to zero only logarithmically.

use intrinsic_scale::process::{estimate_exit_tail, estimate_mean_exit, LevyModel, SmallJumpMode};
use intrinsic_scale::{JumpKernel, KernelProfile, ScaleCalculus, TailRule};

fn main() -> intrinsic_scale::Result<()> {
    let calc = ScaleCalculus::closed_form(KernelProfile::constant(1.0)?)?;
    let kernel = JumpKernel::new(calc.clone(), 1, TailRule::None)?;
    println!("{:>6} {:>10} {:>12} {:>10} {:>12}", "r", "eps", "E tau", "SE", "E tau L(r)");
    for r in [0.1, 0.01, 1e-3, 1e-4] {
        let model = LevyModel::with_auto_eps(kernel.clone(), r, SmallJumpMode::Drop)?;
        let sum = estimate_mean_exit(&model, &[0.0], &[vec![0.0], vec![0.25 * r]], r, 50_000, 1)?;
        let rep = &sum.reports[0];
        println!(
            "{r:>6.0e} {:>10.2e} {:>12.5e} {:>10.1e} {:>12.4}   (x = r/4: {:.4})",
            model.eps(),
            rep.point_estimate,
            rep.std_error,
            rep.empirical_constant,
            sum.reports[1].empirical_constant
        );
    }

    // P(τ ≤ t) ≤ C t L(r)
    let model = LevyModel::with_auto_eps(kernel, 0.01, SmallJumpMode::GaussianApprox)?;
    let t = 0.1 / calc.eval_l(0.01)?;
    let rep = estimate_exit_tail(&model, &[0.0], 0.01, t, 50_000, 2)?;
    let (lo, hi) = rep.interval();
    println!("\nP(tau <= {t:.4}) = {:.4} in [{lo:.4}, {hi:.4}], implied C1 = {:.3}", rep.point_estimate, rep.empirical_constant);
    Ok(())
}
