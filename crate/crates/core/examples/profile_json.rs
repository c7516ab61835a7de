//! Round trip through the JSON profile document, including an extended
//! tail and a user table.

use intrinsic_scale::{KernelProfile, ScaleCalculus};

fn main() -> intrinsic_scale::Result<()> {
    let p = KernelProfile::from_json(r#"{"family": "power_log", "beta": 0.5, "log_power": -1.0, "r0": 0.5}"#)?;
    let text = p.to_json();
    println!("{text}");
    let back = KernelProfile::from_json(&text)?;
    assert_eq!(back.label(), p.label());

    let ext = p.extend()?;
    println!("extended: R0 = {}, c_L = {:.4}, c_U = {:.4}", ext.r0(), ext.c_lower(), ext.c_upper());
    let calc = ScaleCalculus::closed_form(ext)?;
    println!("extended L(1e-3) = {:.6}, L(10) = {:.6}", calc.eval_l(1e-3)?, calc.eval_l(10.0)?);

    // a sampled profile, interpolated log-log
    let s: Vec<f64> = (0..=40).map(|k| 10f64.powf(-10.0 + 0.25 * k as f64)).collect();
    let ell: Vec<f64> = s.iter().map(|v| 1.0 + (2.0 / v).ln().sqrt()).collect();
    let tab = KernelProfile::tabulated(s, ell, Some(1.0))?;
    let calc = ScaleCalculus::closed_form(tab)?;
    println!("tabulated: L(1e-6) = {:.6}, phi_2(1e-6) = {:.4e}", calc.eval_l(1e-6)?, calc.phi(2.0, 1e-6)?);
    Ok(())
}
