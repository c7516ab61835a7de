//! The five standard profiles: L and φ_a against their asymptotic forms.
//!
//!     cargo run --release --example table_one

use intrinsic_scale::{KernelProfile, ScaleCalculus};

fn main() -> intrinsic_scale::Result<()> {
    let a = 4.0;
    println!("{:<26} {:>8} {:>14} {:>14} {:>14}", "profile", "s", "L(s)", "phi_4(s)", "phi_4(s)/s");
    for p in KernelProfile::table_one(1.0)? {
        let calc = ScaleCalculus::closed_form(p.clone())?;
        for s in [1e-8, 1e-4, 1e-2] {
            let phi = calc.phi(a, s)?;
            println!("{:<26} {s:>8.0e} {:>14.6} {phi:>14.6e} {:>14.4}", p.label(), calc.eval_l(s)?, phi / s);
        }
    }
    // the critical profile: φ_a(s) = s^{1/a} moves much further than any dilation
    let c = ScaleCalculus::closed_form(KernelProfile::constant(1.0)?)?;
    println!("\nconstant: phi_4(1e-8) = {:.3e} = (1e-8)^(1/4)", c.phi(a, 1e-8)?);
    Ok(())
}
