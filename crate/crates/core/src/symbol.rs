//! Characteristic exponent ψ(ξ) = ∫ (1 − cos⟨ξ,h⟩) j(|h|) dh of the
//! isotropic kernel.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{JumpKernel, TailRule};
use crate::measure::sphere_area;
use crate::quadrature::{integrate, integrate_breaks, integrate_decaying, wynn_epsilon};
use crate::scale::ScaleCalculus;

pub const DEFAULT_QUAD_TOL: f64 = 1e-8;
const CACHE_NODES: usize = 4096;
const MAX_TAIL_TERMS: usize = 400;

/// Log-grid cache of the radial reduction F for d ≥ 2.
#[derive(Debug)]
struct FCache {
    x0: f64,
    h: f64,
    ln_f: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LevySymbol {
    kernel: JumpKernel,
    quad_tol: f64,
    cache: Option<Arc<FCache>>,
}

/// One grid point of a comparability run.
#[derive(Clone, Debug, Serialize)]
pub struct SymbolRow {
    pub xi: f64,
    pub psi: f64,
    pub l_inv_xi: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparabilityReport {
    pub rows: Vec<SymbolRow>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub argmin: f64,
    pub argmax: f64,
}

impl LevySymbol {
    pub fn new(calculus: ScaleCalculus, dim: usize, tail: TailRule) -> Result<Self> {
        Self::from_kernel(JumpKernel::new(calculus, dim, tail)?, DEFAULT_QUAD_TOL)
    }

    /// The kernel's coefficient field, if any, is ignored (ψ is defined for
    /// the translation-invariant kernel).
    pub fn from_kernel(kernel: JumpKernel, quad_tol: f64) -> Result<Self> {
        if !(quad_tol > 0.0 && quad_tol < 1e-2) {
            return Err(Error::Config(format!("quad_tol {quad_tol} out of range")));
        }
        let mut sym = LevySymbol { kernel, quad_tol, cache: None };
        if sym.kernel.dim() >= 2 {
            sym.cache = Some(Arc::new(sym.build_cache()?));
        }
        Ok(sym)
    }

    pub fn with_quad_tol(self, quad_tol: f64) -> Result<Self> {
        Self::from_kernel(self.kernel, quad_tol)
    }

    pub fn kernel(&self) -> &JumpKernel {
        &self.kernel
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    /// Radial reduction F(r) = ∫_{ℝ^{d−1}} j(√(|z|² + r²)) dz.
    pub fn radial_density(&self, r: f64) -> Result<f64> {
        if self.kernel.dim() == 1 {
            return Ok(self.kernel.j(r));
        }
        if let Some(c) = &self.cache {
            let x = r.ln();
            let n = c.ln_f.len();
            let pos = (x - c.x0) / c.h;
            if pos >= 1.0 && pos <= (n - 3) as f64 {
                let k = pos.floor() as usize;
                let t = pos - k as f64;
                // four-point Lagrange on nodes k-1..k+2
                let (y0, y1, y2, y3) = (c.ln_f[k - 1], c.ln_f[k], c.ln_f[k + 1], c.ln_f[k + 2]);
                let v = -t * (t - 1.0) * (t - 2.0) / 6.0 * y0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * y1
                    - (t + 1.0) * t * (t - 2.0) / 2.0 * y2
                    + (t + 1.0) * t * (t - 1.0) / 6.0 * y3;
                return Ok(v.exp());
            }
        }
        self.radial_density_direct(r)
    }

    fn radial_density_direct(&self, r: f64) -> Result<f64> {
        let d = self.kernel.dim();
        let s = self.kernel.support();
        if r >= s {
            return Ok(0.0);
        }
        let k = &self.kernel;
        let g = |w: f64| {
            let (sh, ch) = (w.sinh(), w.cosh());
            let th = sh / ch;
            th.powi(d as i32 - 2) / ch * k.ell_hat(r * ch)
        };
        let tol = self.quad_tol * 1e-2;
        let kink = k.kink().filter(|&c| c > r).map(|c| (c / r).acosh());
        let value = if s.is_finite() {
            let top = (s / r).acosh();
            let mut br = vec![0.0];
            if let Some(wk) = kink.filter(|&w| w < top) {
                br.push(wk);
            }
            br.push(top);
            integrate_breaks(g, &br, tol, 0.0)?.value
        } else {
            let start = kink.unwrap_or(0.0);
            let head = if start > 0.0 { integrate(g, 0.0, start, tol, 0.0)?.value } else { 0.0 };
            head + integrate_decaying(|v| g(start + v), f64::INFINITY, tol)?.value
        };
        Ok(sphere_area(d - 1) * value / r)
    }

    fn build_cache(&self) -> Result<FCache> {
        let s = self.kernel.support();
        let hi = if s.is_finite() { 0.5 * s } else { 1e4 };
        let lo = 1e-9 * hi.min(1.0);
        let x0 = lo.ln();
        let h = (hi.ln() - x0) / (CACHE_NODES - 1) as f64;
        let ln_f: Result<Vec<f64>> = (0..CACHE_NODES)
            .into_par_iter()
            .map(|k| self.radial_density_direct((x0 + h * k as f64).exp()).map(f64::ln))
            .collect();
        Ok(FCache { x0, h, ln_f: ln_f? })
    }

    /// ψ(ξ).
    pub fn psi(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.kernel.dim() {
            return Err(Error::domain(format!("ξ has {} components, dimension is {}", xi.len(), self.kernel.dim())));
        }
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("ξ must be finite"));
        }
        let k = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.psi_radial(k)
    }

    /// ψ as a function of |ξ|.
    pub fn psi_radial(&self, k: f64) -> Result<f64> {
        if k == 0.0 {
            return Ok(0.0);
        }
        let s = self.kernel.support();
        let kink = self.kernel.kink().filter(|&c| c < s);
        let tol = self.quad_tol;
        let zero = |m: usize| (0.5 * PI + PI * m as f64) / k;
        let f = |r: f64| self.radial_density(r).unwrap_or(f64::NAN);
        let osc = |r: f64| 2.0 * (0.5 * k * r).sin().powi(2) * f(r);

        // [0, b0]: log substitution r = b0 e^{-v}
        let z0 = zero(0);
        let b0 = z0.min(s).min(kink.unwrap_or(f64::INFINITY));
        let mut total = integrate_decaying(
            |v| {
                let r = b0 * (-v).exp();
                osc(r) * r
            },
            f64::INFINITY,
            tol * 0.1,
        )?
        .value;
        let mut pos = b0;
        // Some(m) when pos is exactly the m-th cosine zero
        let mut pos_zero = if b0 == z0 { Some(0usize) } else { None };
        let m_start = loop {
            if s.is_finite() {
                if pos >= s {
                    break 0;
                }
            } else if let Some(mz) = pos_zero {
                if kink.map_or(true, |c| c <= pos) {
                    break mz;
                }
            }
            let mut mn = ((pos * k - 0.5 * PI) / PI).floor().max(0.0) as usize;
            while zero(mn) <= pos {
                mn += 1;
            }
            let (mut end, mut end_zero) = (zero(mn), Some(mn));
            if let Some(c) = kink {
                if c > pos && c < end {
                    end = c;
                    end_zero = None;
                }
            }
            if end > s {
                end = s;
                end_zero = None;
            }
            total += integrate(osc, pos, end, tol * 0.1, 0.0)?.value;
            pos = end;
            pos_zero = end_zero;
        };
        if s.is_finite() {
            return finite_or_err(2.0 * total);
        }
        let m = m_start;
        // pos is now a cosine zero: tail = ∫F − Σ ∫cos(kr) F
        let start = pos;
        let plain = integrate_decaying(
            |v| {
                let r = start * v.exp();
                f(r) * r
            },
            f64::INFINITY,
            tol * 0.1,
        )?
        .value;
        let mut sums = Vec::new();
        let mut acc = 0.0;
        let mut prev_est = f64::NAN;
        let mut lo = start;
        let mut converged = false;
        let mut est = 0.0;
        let mut err_est = f64::INFINITY;
        for i in 0..MAX_TAIL_TERMS {
            let hi = zero(m + i + 1);
            acc += integrate(|r| (k * r).cos() * f(r), lo, hi, tol * 0.1, 0.0)?.value;
            lo = hi;
            sums.push(acc);
            if sums.len() >= 4 {
                let (e, _) = wynn_epsilon(&sums);
                est = e;
                err_est = (e - prev_est).abs();
                if err_est <= 0.01 * tol * (total + plain).abs().max(f64::MIN_POSITIVE) {
                    converged = true;
                    break;
                }
                prev_est = e;
            }
        }
        if !converged {
            return Err(Error::numeric("oscillatory tail did not converge", err_est));
        }
        finite_or_err(2.0 * (total + plain - est))
    }

    /// ψ/L(1/|ξ|) over a grid of magnitudes; evaluated in parallel, reduced
    /// in grid order.
    pub fn comparability_report(&self, xi_grid: &[f64]) -> Result<ComparabilityReport> {
        if xi_grid.is_empty() {
            return Err(Error::domain("empty ξ grid"));
        }
        let calc = self.kernel.calculus();
        let rows: Result<Vec<SymbolRow>> = xi_grid
            .par_iter()
            .map(|&xi| {
                let psi = self.psi_radial(xi)?;
                let l = calc.eval_l(1.0 / xi)?;
                Ok(SymbolRow { xi, psi, l_inv_xi: l, ratio: psi / l })
            })
            .collect();
        let rows = rows?;
        let mut rep = ComparabilityReport {
            ratio_min: f64::INFINITY,
            ratio_max: f64::NEG_INFINITY,
            argmin: f64::NAN,
            argmax: f64::NAN,
            rows: Vec::new(),
        };
        for row in &rows {
            if row.ratio < rep.ratio_min {
                rep.ratio_min = row.ratio;
                rep.argmin = row.xi;
            }
            if row.ratio > rep.ratio_max {
                rep.ratio_max = row.ratio;
                rep.argmax = row.xi;
            }
        }
        rep.rows = rows;
        Ok(rep)
    }

    /// Constant c₄ with ψ(ξ) ≤ c₄ L(1/|ξ|) for all |ξ| ≥ xi_min, from the
    /// splitting at |h| = 1/|ξ|, the weak lower scaling bound and
    /// L(r) ≥ c_L ℓ(r)(1 − (r/R₀)^γ)/γ.
    pub fn chain_constant(&self, xi_min: f64) -> Result<f64> {
        let p = self.kernel.calculus().profile();
        let (cl, g) = (p.c_lower(), p.gamma());
        let r0 = p.r0();
        if !(xi_min * r0 > 1.0) {
            return Err(Error::domain("chain constant needs 1/|ξ| < R₀"));
        }
        let trunc = 1.0 - (xi_min * r0).powf(-g);
        Ok(self.kernel.sphere_area() * (g / (2.0 * cl * cl * (2.0 - g) * trunc) + 2.0))
    }
}

/// 40 log-spaced magnitudes on [10, 10⁴].
pub fn default_xi_grid() -> Vec<f64> {
    log_grid(10.0, 1e4, 40)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn finite_or_err(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v.max(0.0))
    } else {
        Err(Error::numeric("non-finite symbol value", f64::INFINITY))
    }
}
