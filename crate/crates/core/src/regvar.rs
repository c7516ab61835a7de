//! Grid checks of the scaling hypotheses and of the classical facts about
//! regularly varying profiles (Karamata, Potter, ℓ/L → 0).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::KernelProfile;
use crate::quadrature::integrate_decaying;
use crate::scale::ScaleCalculus;
use crate::symbol::log_grid;

/// Relative slack allowed for rounding in the grid comparisons.
const SLACK: f64 = 1e-12;

/// Outcome of a sampled inequality: the worst normalized value and where
/// it occurred.
#[derive(Clone, Debug, Serialize)]
pub struct GridCheck {
    pub name: String,
    /// For lower bounds the minimum of observed/bound (≥ 1 passes); for
    /// upper bounds the maximum of observed/bound (≤ 1 passes).
    pub worst: f64,
    pub at: (f64, f64),
    pub points: usize,
    pub lower_bound: bool,
}

impl GridCheck {
    fn new(name: &str, lower_bound: bool) -> Self {
        GridCheck {
            name: name.to_string(),
            worst: if lower_bound { f64::INFINITY } else { 0.0 },
            at: (f64::NAN, f64::NAN),
            points: 0,
            lower_bound,
        }
    }

    fn record(&mut self, value: f64, at: (f64, f64)) {
        self.points += 1;
        let worse = if self.lower_bound { value < self.worst } else { value > self.worst };
        if worse || value.is_nan() {
            self.worst = value;
            self.at = at;
        }
    }

    pub fn passes(&self) -> bool {
        if self.points == 0 || self.worst.is_nan() {
            return false;
        }
        if self.lower_bound {
            self.worst >= 1.0 - SLACK
        } else {
            self.worst <= 1.0 + SLACK
        }
    }
}

/// Radii r and dilations λ (1 ≤ λ < R₀/r) sampled for the scaling checks.
fn scaling_grid(profile: &KernelProfile, n: usize) -> Vec<(f64, f64)> {
    let r0 = profile.r0();
    let (lo, hi, span) = if r0.is_finite() {
        (1e-10 * r0, r0 * (1.0 - 1e-6), None)
    } else {
        let c = profile.tail_from().unwrap_or(1.0);
        (1e-10 * c, 1e4 * c, Some(1e8))
    };
    let mut out = Vec::new();
    for r in log_grid(lo, hi, n) {
        let lam_max = match span {
            Some(s) => s,
            None => r0 / r * (1.0 - 1e-9),
        };
        if lam_max <= 1.0 {
            continue;
        }
        for lam in log_grid(1.0, lam_max, n) {
            out.push((r, lam));
        }
    }
    out
}

/// Weak lower scaling ℓ(rλ)/ℓ(r) ≥ c_L λ^{-γ} and upper scaling
/// ℓ(rλ)/ℓ(r) ≤ c_U λ^d on an n×n log-grid.
pub fn check_weak_scaling(profile: &KernelProfile, dim: usize, n: usize) -> (GridCheck, GridCheck) {
    let c = profile.constants();
    let mut lower = GridCheck::new("weak lower scaling", true);
    let mut upper = GridCheck::new("weak upper scaling", false);
    for (r, lam) in scaling_grid(profile, n) {
        let ratio = profile.ell_unchecked(r * lam) / profile.ell_unchecked(r);
        lower.record(ratio / (c.c_lower * lam.powf(-c.gamma)), (r, lam));
        upper.record(ratio / (c.c_upper * lam.powi(dim as i32)), (r, lam));
    }
    (lower, upper)
}

/// L(r) ≥ c_L ℓ(r)(1 − (r/R₀)^γ)/γ, the form the proof of the lemma
/// actually yields for finite R₀ (it reduces to γ⁻¹c_L ℓ(r) when R₀ = ∞).
pub fn check_lemma_l_lower(calc: &ScaleCalculus, n: usize) -> Result<GridCheck> {
    let p = calc.profile();
    let (cl, g, r0) = (p.c_lower(), p.gamma(), p.r0());
    let mut out = GridCheck::new("L ≥ c_L ℓ / γ", true);
    let hi = if r0.is_finite() { r0 * (1.0 - 1e-6) } else { 1e4 * p.tail_from().unwrap_or(1.0) };
    for r in log_grid(1e-10 * hi.min(1.0), hi, n) {
        let trunc = if r0.is_finite() { 1.0 - (r / r0).powf(g) } else { 1.0 };
        let bound = cl * p.ell_unchecked(r) * trunc / g;
        out.record(calc.eval_l(r)? / bound, (r, f64::NAN));
    }
    Ok(out)
}

/// L(rλ)/L(r) ≥ c_L λ^{-γ} when R₀ = ∞; for finite R₀ the weaker
/// (c_L/2) λ^{-γ} on 1 ≤ λ < λ₁, r < r₁ with L(r₁) = 2 L(R₀/λ₁).
pub fn check_lemma_l_ratio(calc: &ScaleCalculus, lambda1: f64, n: usize) -> Result<GridCheck> {
    let p = calc.profile();
    let (cl, g, r0) = (p.c_lower(), p.gamma(), p.r0());
    if r0.is_infinite() {
        let mut out = GridCheck::new("L(rλ)/L(r) ≥ c_L λ^-γ", true);
        let c = p.tail_from().unwrap_or(1.0);
        for r in log_grid(1e-10 * c, 1e3 * c, n) {
            let lr = calc.eval_l(r)?;
            for lam in log_grid(1.0, 1e6, n) {
                let v = calc.eval_l(r * lam)? / lr;
                out.record(v / (cl * lam.powf(-g)), (r, lam));
            }
        }
        return Ok(out);
    }
    if !(lambda1 > 1.0) {
        return Err(Error::domain("λ₁ must exceed 1"));
    }
    let r1 = calc.invert_l(2.0 * calc.eval_l(r0 / lambda1)?)?;
    let mut out = GridCheck::new("L(rλ)/L(r) ≥ (c_L/2) λ^-γ", true);
    for r in log_grid(1e-10 * r1, r1 * (1.0 - 1e-9), n) {
        let lr = calc.eval_l(r)?;
        for lam in log_grid(1.0, lambda1 * (1.0 - 1e-9), n) {
            let v = calc.eval_l(r * lam)? / lr;
            out.record(v / (0.5 * cl * lam.powf(-g)), (r, lam));
        }
    }
    Ok(out)
}

/// j(t) ≤ max(c_U, M^{γ+d}/c_L) j(s) whenever s ≤ Mt ≤ R₀, t ≤ R₀.
pub fn check_j_comparison(profile: &KernelProfile, dim: usize, m: f64, n: usize) -> GridCheck {
    let c = profile.constants();
    let bound = c.c_upper.max(m.powf(c.gamma + dim as f64) / c.c_lower);
    let r0 = profile.r0();
    let top = if r0.is_finite() { r0 } else { 1e4 * profile.tail_from().unwrap_or(1.0) };
    let j = |s: f64| profile.ell_unchecked(s) / s.powi(dim as i32);
    let mut out = GridCheck::new(&format!("j comparison M={m}"), false);
    for t in log_grid(1e-9 * top, top / m * (1.0 - 1e-12), n) {
        let s_hi = (m * t).min(top * (1.0 - 1e-12));
        for s in log_grid(1e-10 * top, s_hi, n) {
            out.record(j(t) / (bound * j(s)), (s, t));
        }
    }
    out
}

/// Karamata ratio ∫_0^r s^ρ ℓ(s) ds / (r^{ρ+1} ℓ(r)); tends to 1/(ρ+1) for
/// slowly varying ℓ.
pub fn check_karamata(profile: &KernelProfile, rho: f64, r: f64) -> Result<f64> {
    if !(rho > -1.0) {
        return Err(Error::domain("Karamata ratio needs ρ > −1"));
    }
    if !(r > 0.0 && r < profile.r0()) {
        return Err(Error::domain("radius outside (0, R₀)"));
    }
    let lr = profile.ell_unchecked(r);
    let pl = profile.family().power_and_log();
    let g = |v: f64| match pl {
        // ℓ(re^{-v})/ℓ(r) in closed form so s^{-β} cannot overflow
        Some((b, q)) => (-(rho + 1.0 - b) * v).exp() * ((v + (2.0 / r).ln()) / (2.0 / r).ln()).powf(q),
        None => (-(rho + 1.0) * v).exp() * profile.ell_unchecked(r * (-v).exp()) / lr,
    };
    let res = integrate_decaying(g, f64::INFINITY, 1e-10)?;
    if !res.value.is_finite() {
        return Err(Error::numeric("divergent Karamata integral", res.error));
    }
    Ok(res.value)
}

#[derive(Clone, Debug, Serialize)]
pub struct PotterReport {
    /// Empirical Potter constant C(δ).
    pub constant: f64,
    pub worst: (f64, f64),
}

/// max over pairs of (ℓ(r)/ℓ(s)) / max((r/s)^{-α-δ}, (r/s)^{-α+δ}).
pub fn check_potter(profile: &KernelProfile, delta: f64, grid: &[(f64, f64)]) -> Result<PotterReport> {
    if !(delta > 0.0) {
        return Err(Error::domain("Potter bound needs δ > 0"));
    }
    let a = profile.alpha();
    let mut rep = PotterReport { constant: 0.0, worst: (f64::NAN, f64::NAN) };
    for &(r, s) in grid {
        let q = r / s;
        let v = (profile.ell(r)? / profile.ell(s)?) / q.powf(-a - delta).max(q.powf(-a + delta));
        if v > rep.constant {
            rep.constant = v;
            rep.worst = (r, s);
        }
    }
    Ok(rep)
}

/// All pairs of an n-point log grid on [lo, hi].
pub fn pair_grid(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let g = log_grid(lo, hi, n);
    g.iter().flat_map(|&r| g.iter().map(move |&s| (r, s))).collect()
}

/// L evaluated on r = 10^{-1}, …, 10^{-k}: returns true when it is
/// strictly increasing, i.e. L grows without a visible ceiling.
pub fn check_divergence(calc: &ScaleCalculus, decades: usize) -> Result<bool> {
    let r0 = calc.r0().min(1.0);
    let mut prev = f64::NEG_INFINITY;
    for k in 1..=decades {
        let r = r0 * 10f64.powi(-(k as i32));
        if r < calc.r_min() {
            break;
        }
        let v = calc.eval_l(r)?;
        if !(v > prev) {
            return Ok(false);
        }
        prev = v;
    }
    Ok(true)
}

/// (ℓ/L)(r_small) and (ℓ/L)(r_large); for slowly varying profiles the
/// first is smaller.
pub fn ell_over_l(calc: &ScaleCalculus, r_small: f64, r_large: f64) -> Result<(f64, f64)> {
    let f = |r: f64| -> Result<f64> { Ok(calc.ell(r)? / calc.eval_l(r)?) };
    Ok((f(r_small)?, f(r_large)?))
}
