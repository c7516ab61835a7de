//! The barrier estimate: −A b_r / L(r) is bounded uniformly in r.

use intrinsic_scale::operator::{default_barrier_radii, GaussianBump, OperatorEvaluator};
use intrinsic_scale::{JumpKernel, KernelProfile, ScaleCalculus, TailRule};

fn main() -> intrinsic_scale::Result<()> {
    for p in [KernelProfile::constant(1.0)?, KernelProfile::power_law(1.0, 1.0)?, KernelProfile::inverse_log(1.0)?] {
        let calc = ScaleCalculus::closed_form(p.clone())?;
        let ev = OperatorEvaluator::new(JumpKernel::new(calc.clone(), 1, TailRule::None)?);
        let rep = ev.barrier_report(&default_barrier_radii(), None)?;
        let ratios: Vec<String> = rep.rows.iter().map(|r| format!("{:.3}", r.max_ratio)).collect();
        println!("{:<20} {}  spread {:.3}", p.label(), ratios.join(" "), rep.spread);

        // at the centre of the bump the operator is most negative
        let r = 0.01;
        let centre = ev.apply(&GaussianBump::new(vec![0.0], r), &[0.0])?;
        println!("{:<20} -A b_r(0)/L(r) at r = {r}: {:.4}", "", -centre / calc.eval_l(r)?);
    }
    Ok(())
}
