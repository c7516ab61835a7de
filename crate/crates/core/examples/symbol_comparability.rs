//! ψ(ξ) against L(1/|ξ|) in one and two dimensions.

use intrinsic_scale::symbol::{log_grid, LevySymbol};
use intrinsic_scale::{KernelProfile, ScaleCalculus, TailRule};

fn main() -> intrinsic_scale::Result<()> {
    let grid = log_grid(10.0, 1e4, 7);
    for p in [KernelProfile::power_law(1.0, 1.0)?, KernelProfile::constant(1.0)?, KernelProfile::log(1.0)?] {
        for d in [1, 2] {
            let sym = LevySymbol::new(ScaleCalculus::closed_form(p.clone())?, d, TailRule::None)?;
            let rep = sym.comparability_report(&grid)?;
            let ratios: Vec<String> = rep.rows.iter().map(|r| format!("{:.3}", r.ratio)).collect();
            println!("{:<18} d={d}  psi/L(1/xi): {}  spread {:.3}", p.label(), ratios.join(" "), rep.ratio_max / rep.ratio_min);
        }
    }
    Ok(())
}
