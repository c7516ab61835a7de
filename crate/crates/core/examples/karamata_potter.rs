//! Karamata ratios, Potter constants and the vanishing of ℓ/L for slowly
//! varying profiles.

use intrinsic_scale::regvar::{check_karamata, check_potter, ell_over_l, pair_grid};
use intrinsic_scale::{KernelProfile, ScaleCalculus};

fn main() -> intrinsic_scale::Result<()> {
    let grid = pair_grid(1e-10, 0.5, 25);
    for p in KernelProfile::table_one(1.0)? {
        let rho = 1.0 + p.alpha();
        let mut line = format!("{:<26}", p.label());
        for r in [1e-3, 1e-6, 1e-12] {
            // tends to 1/(ρ + 1 − α) = 1/2
            line += &format!(" K({r:.0e}) = {:.4}", check_karamata(&p, rho, r)?);
        }
        let potter = check_potter(&p, 0.1, &grid)?;
        line += &format!("  Potter C(0.1) = {:.3}", potter.constant);
        if p.is_slowly_varying() {
            let (small, large) = ell_over_l(&ScaleCalculus::closed_form(p.clone())?, 1e-10, 1e-2)?;
            line += &format!("  ell/L: {large:.3} -> {small:.4}");
        }
        println!("{line}");
    }
    Ok(())
}
