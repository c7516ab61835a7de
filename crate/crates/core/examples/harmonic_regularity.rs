//! Discrete harmonic functions with rough exterior data: oscillation decay
//! over intrinsic annuli and the fitted modulus.

use intrinsic_scale::regularity::{measure_regularity, GridProblem, Solver};
use intrinsic_scale::{JumpKernel, KernelProfile, ScaleCalculus, TailRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> intrinsic_scale::Result<()> {
    let calc = ScaleCalculus::closed_form(KernelProfile::constant(1.0)?)?;
    let kernel = JumpKernel::new(calc.clone(), 1, TailRule::None)?;
    let problem = GridProblem::new(kernel, &[0.0], 1.98, 1024)?;
    let solver = Solver::new(&problem)?;
    let ni = problem.interior_points().len();

    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = problem.exterior_points().iter().map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let sol = solver.solve(&vec![0.0; ni], &g)?;
        let rep = measure_regularity(&sol, &calc, 4.0, &[0.0])?;
        println!("dataset {seed}: residual {:.1e}", sol.residual);
        for row in rep.rows.iter().filter(|r| r.used) {
            println!("  n = {}  r_n = {:.3e}  osc = {:.4e}  ({} nodes)", row.n, row.r_n, row.osc, row.nodes);
        }
        println!(
            "  b = {:.3}, beta = {:.3}, theta = {:.3}, strictly decreasing: {}",
            rep.b_fit, rep.beta_fit, rep.theta, rep.strictly_decreasing
        );
    }
    Ok(())
}
