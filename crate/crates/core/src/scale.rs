//! The intrinsic scale L(r) = ∫_r^{R₀} ℓ(s)/s ds, its inverse and the scale
//! map φ_a = L⁻¹(L/a).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{Family, KernelProfile};
use crate::quadrature::{integrate, integrate_breaks, integrate_decaying};

/// Default relative tolerance for quadrature and inversion.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Smallest radius covered by the table and by bracketed inversion.
pub const DEFAULT_R_MIN: f64 = 1e-12;
const TABLE_NODES: usize = 4096;
const MAX_INVERSION_STEPS: usize = 80;

/// How L is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Closed form where the family has one, adaptive quadrature otherwise.
    ClosedForm,
    /// Monotone cubic Hermite interpolation on a log-spaced table.
    Tabulated,
}

#[derive(Debug)]
struct Table {
    x0: f64,
    h: f64,
    l: Vec<f64>,
    dl: Vec<f64>,
}

/// Evaluators for L, L⁻¹ and φ_a for one profile. Immutable and cheap to
/// clone; the table is shared.
#[derive(Clone, Debug)]
pub struct ScaleCalculus {
    profile: KernelProfile,
    mode: EvalMode,
    tol: f64,
    r_min: f64,
    tail_at_cut: f64,
    table: Option<Arc<Table>>,
}

impl ScaleCalculus {
    pub fn new(profile: KernelProfile, mode: EvalMode) -> Result<Self> {
        Self::with_options(profile, mode, DEFAULT_TOL, DEFAULT_R_MIN)
    }

    pub fn closed_form(profile: KernelProfile) -> Result<Self> {
        Self::new(profile, EvalMode::ClosedForm)
    }

    pub fn tabulated(profile: KernelProfile) -> Result<Self> {
        Self::new(profile, EvalMode::Tabulated)
    }

    pub fn with_options(profile: KernelProfile, mode: EvalMode, tol: f64, r_min: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1e-2) {
            return Err(Error::Config(format!("tolerance {tol} out of range")));
        }
        if !(r_min > 0.0 && r_min < profile.r0()) {
            return Err(Error::Config(format!("r_min {r_min} must lie in (0, R₀)")));
        }
        let mut calc = ScaleCalculus { profile, mode, tol, r_min, tail_at_cut: 0.0, table: None };
        if let Some(cut) = calc.profile.tail_from() {
            calc.tail_at_cut = calc.tail_l(cut)?;
        }
        if mode == EvalMode::Tabulated {
            calc.table = Some(Arc::new(calc.build_table()?));
        }
        Ok(calc)
    }

    pub fn profile(&self) -> &KernelProfile {
        &self.profile
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r0(&self) -> f64 {
        self.profile.r0()
    }

    /// Same profile, other evaluation mode.
    pub fn to_mode(&self, mode: EvalMode) -> Result<Self> {
        Self::with_options(self.profile.clone(), mode, self.tol, self.r_min)
    }

    pub fn ell(&self, s: f64) -> Result<f64> {
        self.profile.ell(s)
    }

    /// L(r) for 0 < r < R₀.
    pub fn eval_l(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < self.r0()) {
            return Err(Error::domain(format!("L({r}) outside (0, {})", self.r0())));
        }
        if let Some(t) = &self.table {
            let x = -r.ln();
            let last = t.x0 + t.h * (t.l.len() - 1) as f64;
            if x >= t.x0 && x <= last {
                return Ok(t.eval(x));
            }
        }
        self.l_direct(r)
    }

    /// L(r), extended by 0 for r ≥ R₀.
    pub fn l_or_zero(&self, r: f64) -> Result<f64> {
        if r >= self.r0() {
            Ok(0.0)
        } else {
            self.eval_l(r)
        }
    }

    /// The unique r with L(r) = y; y = 0 gives R₀.
    pub fn invert_l(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::domain(format!("L⁻¹({y}) needs a finite y ≥ 0")));
        }
        if y == 0.0 {
            return Ok(self.r0());
        }
        if let Some(t) = &self.table {
            let n = t.l.len();
            if y > t.l[n - 1] {
                return Err(Error::Range(format!("y = {y} exceeds L(r_min) = {}", t.l[n - 1])));
            }
            if y >= t.l[0] {
                return Ok((-t.invert(y)).exp());
            }
        }
        self.invert_direct(y)
    }

    /// φ_a(r) = L⁻¹(L(r)/a).
    pub fn phi(&self, a: f64, r: f64) -> Result<f64> {
        if !(a > 1.0) {
            return Err(Error::domain(format!("phi needs a > 1, got {a}")));
        }
        let y = self.eval_l(r)? / a;
        Ok(self.invert_l(y)?.max(r))
    }

    /// ∫_0^{min(ε,R₀)} s ℓ(s) ds, the second moment of the small jumps.
    pub fn second_moment(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::domain("second moment needs ε > 0"));
        }
        let top = eps.min(self.r0());
        let p = &self.profile;
        let cut = p.tail_from().unwrap_or(f64::INFINITY);
        let inner = top.min(cut);
        let lower = match p.family() {
            Family::Constant => 0.5 * inner * inner,
            Family::PowerLaw { beta } => inner.powf(2.0 - beta) / (2.0 - beta),
            _ => {
                // s²ℓ(s) combined so that s^{-β} cannot overflow deep in the tail
                let pl = p.family().power_and_log();
                let g = |v: f64| {
                    let s = inner * (-v).exp();
                    match pl {
                        _ if s <= 0.0 => 0.0,
                        Some((b, q)) => s.powf(2.0 - b) * (2.0 / s).ln().powf(q),
                        None => s * s * p.ell_unchecked(s),
                    }
                };
                integrate_decaying(g, f64::INFINITY, self.tol)?.value
            }
        };
        let upper = if top > cut {
            integrate(|s| s * p.ell_unchecked(s), cut, top, self.tol, 0.0)?.value
        } else {
            0.0
        };
        Ok(lower + upper)
    }

    /// Exact (non-tabulated) L.
    pub fn l_direct(&self, r: f64) -> Result<f64> {
        match self.profile.tail_from() {
            Some(cut) if r >= cut => self.tail_l(r),
            Some(cut) => Ok(self.base_l(r, cut)? + self.tail_at_cut),
            None => self.base_l(r, self.profile.r0()),
        }
    }

    fn has_closed_form(&self) -> bool {
        match self.profile.family() {
            Family::Tabulated { .. } => true,
            f => {
                let (beta, p) = f.power_and_log().expect("analytic");
                beta == 0.0 || p == 0.0
            }
        }
    }

    /// ∫_r^{cut} ℓ(s)/s ds for the unextended profile.
    fn base_l(&self, r: f64, cut: f64) -> Result<f64> {
        if r >= cut {
            return Ok(0.0);
        }
        let fam = self.profile.family();
        if let Family::Tabulated { s, ell } = fam {
            return Ok(tabulated_l(s, ell, r, cut));
        }
        let (beta, p) = fam.power_and_log().expect("analytic");
        if p == 0.0 {
            if beta == 0.0 {
                return Ok((cut / r).ln());
            }
            // (r^{-β} − cut^{-β})/β
            return Ok(if cut.is_finite() {
                cut.powf(-beta) * (beta * (cut / r).ln()).exp_m1() / beta
            } else {
                r.powf(-beta) / beta
            });
        }
        if beta == 0.0 {
            let ur = (2.0 / cut).ln();
            let rel = (cut / r).ln() / ur; // (u_r − u_R)/u_R
            if p == -1.0 {
                return Ok(rel.ln_1p());
            }
            let q = p + 1.0;
            return Ok(ur.powf(q) * (q * rel.ln_1p()).exp_m1() / q);
        }
        let prof = &self.profile;
        let (lo, hi) = (r.ln(), cut.ln());
        let n = ((hi - lo) / 2.0).ceil().max(1.0) as usize;
        let breaks: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        let res = integrate_breaks(|x: f64| prof.ell_unchecked(x.exp()), &breaks, self.tol * 0.05, 0.0)?;
        Ok(res.value)
    }

    /// ∫_r^∞ (s − c)^{-γ}/s ds with c = cut/2, for r ≥ cut.
    fn tail_l(&self, r: f64) -> Result<f64> {
        let cut = self.profile.tail_from().expect("extended");
        let c = 0.5 * cut;
        let g = self.profile.gamma();
        if g == 1.0 {
            return Ok(-(-c / r).ln_1p() / c);
        }
        let w_top = (c / r).powf(g);
        let res = integrate(|w: f64| (1.0 - w.powf(1.0 / g)).powf(-g), 0.0, w_top, self.tol * 0.05, 0.0)?;
        Ok(c.powf(-g) / g * res.value)
    }

    fn invert_direct(&self, y: f64) -> Result<f64> {
        if let Some(cut) = self.profile.tail_from() {
            if y <= self.tail_at_cut {
                let c = 0.5 * cut;
                if self.profile.gamma() == 1.0 {
                    return Ok((c / -(-y * c).exp_m1()).max(cut));
                }
                let mut hi = 2.0 * cut;
                while self.tail_l(hi)? > y {
                    hi *= 4.0;
                    if !hi.is_finite() {
                        return Err(Error::numeric("tail inversion bracket overflow", y));
                    }
                }
                return self.bisect(y, cut, hi);
            }
            return self.invert_base(y - self.tail_at_cut, cut);
        }
        self.invert_base(y, self.profile.r0())
    }

    fn invert_base(&self, y: f64, cut: f64) -> Result<f64> {
        let fam = self.profile.family();
        if let Some((beta, p)) = fam.power_and_log() {
            if p == 0.0 && beta == 0.0 {
                return Ok(cut * (-y).exp());
            }
            if p == 0.0 {
                let base = if cut.is_finite() { cut.powf(-beta) } else { 0.0 };
                if cut.is_finite() {
                    // cut·(1 + βy cut^β)^{-1/β}
                    return Ok(cut * (-(beta * y / base).ln_1p() / beta).exp());
                }
                return Ok((beta * y + base).powf(-1.0 / beta));
            }
            if beta == 0.0 {
                let ur = (2.0 / cut).ln();
                let rel = if p == -1.0 {
                    y.exp_m1()
                } else {
                    let q = p + 1.0;
                    ((q * y / ur.powf(q)).ln_1p() / q).exp_m1()
                };
                return Ok(cut * (-(rel * ur)).exp());
            }
        }
        if y > self.base_l(self.r_min, cut)? {
            return Err(Error::Range(format!("y = {y} exceeds L(r_min)")));
        }
        self.bisect(y, self.r_min, cut)
    }

    /// Safeguarded Newton iteration in ln r on the bracket [lo, hi].
    fn bisect(&self, y: f64, lo: f64, hi: f64) -> Result<f64> {
        let (mut zl, mut zh) = (lo.ln(), hi.ln());
        let mut z = 0.5 * (zl + zh);
        let target = 1e-3 * self.tol * y.max(1e-300);
        let mut best = (f64::INFINITY, z);
        for _ in 0..MAX_INVERSION_STEPS {
            let r = z.exp();
            let f = self.l_direct(r)? - y;
            if f.abs() < best.0 {
                best = (f.abs(), z);
            }
            if f.abs() <= target {
                return Ok(r);
            }
            if f > 0.0 {
                zl = z;
            } else {
                zh = z;
            }
            if zh - zl <= 4.0 * f64::EPSILON * zl.abs().max(zh.abs()).max(1.0) {
                break;
            }
            let slope = self.profile.ell_unchecked(r);
            let zn = z + f / slope;
            z = if zn > zl && zn < zh && slope > 0.0 { zn } else { 0.5 * (zl + zh) };
        }
        if best.0 <= self.tol * y.max(1.0) {
            Ok(best.1.exp())
        } else {
            Err(Error::numeric(format!("inversion of L at y = {y} did not converge"), best.0))
        }
    }

    fn build_table(&self) -> Result<Table> {
        let r0 = self.r0();
        let r_hi = if r0.is_finite() { r0 * (1.0 - 1e-9) } else { 1e6 * self.profile.tail_from().unwrap_or(1.0) };
        let x0 = -r_hi.ln();
        let x_last = -self.r_min.ln();
        let n = TABLE_NODES;
        let h = (x_last - x0) / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|k| x0 + h * k as f64).collect();
        let mut l = Vec::with_capacity(n);
        let cumulative = !self.has_closed_form();
        let cut = self.profile.tail_from();
        for (k, &x) in xs.iter().enumerate() {
            let r = (-x).exp();
            let below_cut = cut.map_or(true, |c| r < c);
            let v = if cumulative && k > 0 && below_cut {
                let prof = &self.profile;
                let mut br = vec![xs[k - 1], x];
                if let Some(c) = cut {
                    let xc = -c.ln();
                    if xc > xs[k - 1] && xc < x {
                        br.insert(1, xc);
                    }
                }
                let inc = integrate_breaks(|t: f64| prof.ell_unchecked((-t).exp()), &br, 1e-14, 0.0)?;
                l[k - 1] + inc.value
            } else {
                self.l_direct(r)?
            };
            l.push(v);
        }
        let dl: Vec<f64> = xs.iter().map(|&x| self.profile.ell_unchecked((-x).exp())).collect();
        Ok(Table { x0, h, l, dl })
    }
}

impl Table {
    fn segment(&self, k: usize) -> (f64, f64) {
        // Fritsch–Carlson limiting of the end slopes on segment k.
        let delta = (self.l[k + 1] - self.l[k]) / self.h;
        let (mut m0, mut m1) = (self.dl[k], self.dl[k + 1]);
        if delta > 0.0 {
            let a = m0 / delta;
            let b = m1 / delta;
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m0 *= tau;
                m1 *= tau;
            }
        }
        (m0, m1)
    }

    fn hermite(&self, k: usize, t: f64) -> (f64, f64) {
        let (m0, m1) = self.segment(k);
        let (y0, y1, h) = (self.l[k], self.l[k + 1], self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1;
        let dv = (6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * h * m0 + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * h * m1;
        (v, dv)
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.l.len();
        let k = (((x - self.x0) / self.h).floor() as usize).min(n - 2);
        let t = (x - self.x0) / self.h - k as f64;
        self.hermite(k, t).0
    }

    /// x = ln(1/r) with L = y; y must lie within the table.
    fn invert(&self, y: f64) -> f64 {
        let n = self.l.len();
        let k = self.l.partition_point(|&v| v <= y).clamp(1, n - 1) - 1;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let span = self.l[k + 1] - self.l[k];
        let mut t = if span > 0.0 { ((y - self.l[k]) / span).clamp(0.0, 1.0) } else { 0.5 };
        for _ in 0..60 {
            let (v, dv) = self.hermite(k, t);
            let f = v - y;
            if f == 0.0 {
                break;
            }
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let tn = t - f / dv;
            t = if dv > 0.0 && tn > lo && tn < hi { tn } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-16 {
                break;
            }
        }
        self.x0 + self.h * (k as f64 + t)
    }
}

/// Exact L for the log-log linear interpolant, with power extrapolation
/// below the first node.
fn tabulated_l(xs: &[f64], ell: &[f64], r: f64, cut: f64) -> f64 {
    let seg = |ya: f64, k: f64, a: f64, b: f64| {
        let lr = (b / a).ln();
        if k == 0.0 {
            ya * lr
        } else {
            ya * (k * lr).exp_m1() / k
        }
    };
    let slope = |i: usize| (ell[i + 1] / ell[i]).ln() / (xs[i + 1] / xs[i]).ln();
    let n = xs.len();
    let mut total = 0.0;
    let mut lo = r;
    if lo < xs[0] {
        let top = xs[0].min(cut);
        let k = slope(0);
        let ya = ell[0] * (lo / xs[0]).powf(k);
        total += seg(ya, k, lo, top);
        lo = top;
    }
    for i in 0..n - 1 {
        let (a, b) = (xs[i].max(lo), xs[i + 1].min(cut));
        if b <= a {
            continue;
        }
        let k = slope(i);
        let ya = ell[i] * (a / xs[i]).powf(k);
        total += seg(ya, k, a, b);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn closed_forms() {
        let c = ScaleCalculus::closed_form(KernelProfile::constant(1.0).unwrap()).unwrap();
        assert!(close(c.eval_l(0.5).unwrap(), 2f64.ln(), 1e-15));
        assert!(close(c.invert_l(2f64.ln()).unwrap(), 0.5, 1e-15));
        assert!(close(c.phi(4.0, 0.0625).unwrap(), 0.5, 1e-14));
        assert_eq!(c.invert_l(0.0).unwrap(), 1.0);
        let p = ScaleCalculus::closed_form(KernelProfile::power_law(1.0, 1.0).unwrap()).unwrap();
        assert!(close(p.eval_l(0.1).unwrap(), 9.0, 1e-14));
        assert!(close(p.invert_l(9.0).unwrap(), 0.1, 1e-14));
        assert!(close(p.phi(3.0, 0.01).unwrap(), 1.0 / 34.0, 1e-13));
        let l = ScaleCalculus::closed_form(KernelProfile::log(1.0).unwrap()).unwrap();
        let ln10 = 10f64.ln();
        assert!(close(l.eval_l(0.1).unwrap(), 2f64.ln() * ln10 + 0.5 * ln10 * ln10, 1e-14));
    }

    #[test]
    fn quadrature_family_inverts() {
        let c = ScaleCalculus::closed_form(KernelProfile::power_log_squared(1.0, 1.0).unwrap()).unwrap();
        for &r in &[1e-9, 1e-4, 0.3, 0.99] {
            let y = c.eval_l(r).unwrap();
            let back = c.invert_l(y).unwrap();
            assert!((back / r - 1.0).abs() < 1e-9, "{r} {back}");
        }
    }

    #[test]
    fn table_matches_direct() {
        for prof in KernelProfile::table_one(1.0).unwrap() {
            let d = ScaleCalculus::closed_form(prof.clone()).unwrap();
            let t = ScaleCalculus::tabulated(prof).unwrap();
            for &r in &[1e-11, 3e-7, 1e-3, 0.2, 0.9] {
                let (a, b) = (d.eval_l(r).unwrap(), t.eval_l(r).unwrap());
                assert!((a - b).abs() <= 1e-8 * a, "{r}: {a} vs {b}");
                let back = t.invert_l(a).unwrap();
                assert!((back / r - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn extended_l_is_continuous() {
        let p = KernelProfile::constant(1.0).unwrap().extend().unwrap();
        let c = ScaleCalculus::closed_form(p).unwrap();
        let below = c.eval_l(1.0 - 1e-12).unwrap();
        let at = c.eval_l(1.0).unwrap();
        assert!((below - at).abs() < 1e-10);
        assert!((at - 2.0 * 2f64.ln()).abs() < 1e-14);
        let y = c.eval_l(5.0).unwrap();
        assert!((c.invert_l(y).unwrap() - 5.0).abs() < 1e-12);
        let g = KernelProfile::with_gamma(Family::Constant, 1.0, 0.5).unwrap().extend().unwrap();
        let cg = ScaleCalculus::closed_form(g).unwrap();
        let y = cg.eval_l(3.0).unwrap();
        assert!((cg.invert_l(y).unwrap() - 3.0).abs() < 1e-9);
    }
}
