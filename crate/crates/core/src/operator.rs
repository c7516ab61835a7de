//! Evaluation of Au(x) = ½∫(u(x+h) + u(x−h) − 2u(x)) K(x,h) dh for explicit
//! smooth functions, and the Gaussian barrier report.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::JumpKernel;
use crate::process::LevyModel;
use crate::quadrature::{integrate_breaks, integrate_split};

pub const DEFAULT_QUAD_TOL: f64 = 1e-7;
/// Taylor region radius in units of the function scale.
pub const DEFAULT_INNER_CUT: f64 = 1e-3;
/// Finite-difference step in units of the function scale.
pub const FD_STEP: f64 = 1e-5;

/// A function with optional derivatives. Missing derivatives are replaced
/// by central differences at step 1e-5·scale, which costs roughly half
/// the significant digits of the Taylor term.
pub trait TestFunction: Sync {
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Row-major d×d Hessian.
    fn hessian(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Length over which the function changes appreciably.
    fn scale(&self) -> f64 {
        1.0
    }
}

/// A closure with a length scale and no derivatives.
pub struct FnFunction<F> {
    pub f: F,
    pub scale: f64,
}

impl<F: Fn(&[f64]) -> f64 + Sync> TestFunction for FnFunction<F> {
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn scale(&self) -> f64 {
        self.scale
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConstantFunction(pub f64);

impl TestFunction for ConstantFunction {
    fn value(&self, _x: &[f64]) -> f64 {
        self.0
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; x.len()])
    }
    fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; x.len() * x.len()])
    }
}

/// b_r(x) = exp(−|x − c|²/r²).
#[derive(Clone, Debug)]
pub struct GaussianBump {
    pub center: Vec<f64>,
    pub r: f64,
}

impl GaussianBump {
    pub fn new(center: Vec<f64>, r: f64) -> Self {
        GaussianBump { center, r }
    }
}

impl TestFunction for GaussianBump {
    fn value(&self, x: &[f64]) -> f64 {
        let q: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        (-q / (self.r * self.r)).exp()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let b = self.value(x);
        let r2 = self.r * self.r;
        Some(x.iter().zip(&self.center).map(|(a, c)| -2.0 * (a - c) / r2 * b).collect())
    }
    fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        let d = x.len();
        let b = self.value(x);
        let r2 = self.r * self.r;
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let delta = if i == j { 1.0 } else { 0.0 };
                h[i * d + j] = b * (4.0 * y[i] * y[j] / (r2 * r2) - 2.0 * delta / r2);
            }
        }
        Some(h)
    }
    fn scale(&self) -> f64 {
        self.r
    }
}

/// ρ² q(|x − c|²/ρ²) with q(t) = t for t ≤ 9, a C² quintic blend on
/// [9, 16] and q ≡ 12.5 beyond: |x − c|² inside radius 3ρ, constant
/// outside 4ρ.
#[derive(Clone, Debug)]
pub struct CappedQuadratic {
    pub center: Vec<f64>,
    pub rho: f64,
}

impl CappedQuadratic {
    pub fn new(center: Vec<f64>, rho: f64) -> Self {
        CappedQuadratic { center, rho }
    }

    fn q(t: f64) -> (f64, f64, f64) {
        if t <= 9.0 {
            (t, 1.0, 0.0)
        } else if t >= 16.0 {
            (12.5, 0.0, 0.0)
        } else {
            let w = (t - 9.0) / 7.0;
            let p = w - w * w * w + 0.5 * w * w * w * w;
            let dp = 1.0 - 3.0 * w * w + 2.0 * w * w * w;
            let ddp = -6.0 * w + 6.0 * w * w;
            (9.0 + 7.0 * p, dp, ddp / 7.0)
        }
    }
}

impl TestFunction for CappedQuadratic {
    fn value(&self, x: &[f64]) -> f64 {
        let r2 = self.rho * self.rho;
        let t: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / r2;
        r2 * Self::q(t).0
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let r2 = self.rho * self.rho;
        let t: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / r2;
        let (_, dq, _) = Self::q(t);
        Some(x.iter().zip(&self.center).map(|(a, c)| 2.0 * (a - c) * dq).collect())
    }
    fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        let d = x.len();
        let r2 = self.rho * self.rho;
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let t = y.iter().map(|v| v * v).sum::<f64>() / r2;
        let (_, dq, ddq) = Self::q(t);
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let delta = if i == j { 1.0 } else { 0.0 };
                h[i * d + j] = 2.0 * delta * dq + 4.0 * y[i] * y[j] / r2 * ddq;
            }
        }
        Some(h)
    }
    fn scale(&self) -> f64 {
        self.rho
    }
}

fn fd_gradient(u: &dyn TestFunction, x: &[f64]) -> Vec<f64> {
    let h = FD_STEP * u.scale();
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let p = u.value(&y);
            y[i] = x[i] - h;
            let m = u.value(&y);
            y[i] = x[i];
            (p - m) / (2.0 * h)
        })
        .collect()
}

fn fd_hessian(u: &dyn TestFunction, x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let h = FD_STEP * u.scale();
    let u0 = u.value(x);
    let mut y = x.to_vec();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        y[i] = x[i] + h;
        let p = u.value(&y);
        y[i] = x[i] - h;
        let m = u.value(&y);
        y[i] = x[i];
        out[i * d + i] = (p - 2.0 * u0 + m) / (h * h);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                y[i] = x[i] + si * h;
                y[j] = x[j] + sj * h;
                let v = u.value(&y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0)) / (4.0 * h * h);
            out[i * d + j] = v;
            out[j * d + i] = v;
        }
    }
    out
}

/// ∫ g over the unit sphere S^{d−1} (d ≤ 3). With `even` set, g is
/// assumed even and only a half sphere is integrated (the result is still
/// the full-sphere integral divided by two).
fn sphere_integral<G: Fn(&[f64]) -> f64>(d: usize, even: bool, g: G, tol: f64, abs_tol: f64) -> Result<f64> {
    match d {
        1 => Ok(if even { g(&[1.0]) } else { g(&[1.0]) + g(&[-1.0]) }),
        2 => {
            let top = if even { PI } else { 2.0 * PI };
            let f = |t: f64| g(&[t.cos(), t.sin()]);
            Ok(integrate_split(f, 0.0, top, 8, tol, abs_tol)?.value)
        }
        3 => {
            let top = if even { 0.5 * PI } else { PI };
            let outer = |psi: f64| {
                let (sp, cp) = psi.sin_cos();
                let inner = |phi: f64| {
                    let (s, c) = phi.sin_cos();
                    g(&[s * cp, s * sp, c]) * s
                };
                integrate_split(inner, 0.0, top, 4, tol, abs_tol).map(|i| i.value).unwrap_or(f64::NAN)
            };
            let v = integrate_split(outer, 0.0, 2.0 * PI, 8, tol, abs_tol)?.value;
            if v.is_nan() {
                return Err(Error::numeric("angular quadrature failed", f64::INFINITY));
            }
            Ok(v)
        }
        _ => Err(Error::domain(format!("operator evaluation supports d ≤ 3, got {d}"))),
    }
}

/// Quadrature evaluator for A.
#[derive(Clone, Debug)]
pub struct OperatorEvaluator {
    kernel: JumpKernel,
    inner_cut: f64,
    quad_tol: f64,
}

#[derive(Clone, Copy, Debug)]
enum Form {
    Symmetrized,
    Compensated,
}

impl OperatorEvaluator {
    pub fn new(kernel: JumpKernel) -> Self {
        OperatorEvaluator { kernel, inner_cut: DEFAULT_INNER_CUT, quad_tol: DEFAULT_QUAD_TOL }
    }

    pub fn from_model(model: &LevyModel) -> Self {
        Self::new(model.kernel().clone())
    }

    /// Taylor region |h| < inner_cut·scale(u).
    pub fn with_inner_cut(mut self, inner_cut: f64) -> Result<Self> {
        if !(inner_cut > 0.0 && inner_cut < 1.0) {
            return Err(Error::Config(format!("inner cut {inner_cut} outside (0,1)")));
        }
        self.inner_cut = inner_cut;
        Ok(self)
    }

    pub fn with_quad_tol(mut self, quad_tol: f64) -> Result<Self> {
        if !(quad_tol > 0.0 && quad_tol < 1.0) {
            return Err(Error::Config(format!("quadrature tolerance {quad_tol} outside (0,1)")));
        }
        self.quad_tol = quad_tol;
        Ok(self)
    }

    pub fn kernel(&self) -> &JumpKernel {
        &self.kernel
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    /// Au(x) in the symmetrized second-difference form.
    pub fn apply(&self, u: &dyn TestFunction, x: &[f64]) -> Result<f64> {
        self.evaluate(u, x, Form::Symmetrized)
    }

    /// Au(x) as ∫(u(x+h) − u(x) − ∇u(x)·h 1{|h| ≤ 1}) K(x,h) dh.
    pub fn apply_compensated(&self, u: &dyn TestFunction, x: &[f64]) -> Result<f64> {
        self.evaluate(u, x, Form::Compensated)
    }

    /// Au at each point, in parallel.
    pub fn apply_many(&self, u: &dyn TestFunction, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        points.par_iter().map(|x| self.apply(u, x)).collect()
    }

    fn evaluate(&self, u: &dyn TestFunction, x: &[f64], form: Form) -> Result<f64> {
        let d = self.kernel.dim();
        if x.len() != d {
            return Err(Error::domain("point dimension does not match the kernel"));
        }
        let calc = self.kernel.calculus();
        let support = self.kernel.support();
        let scale = u.scale();
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain("test function scale must be positive"));
        }
        let s_t = (self.inner_cut * scale).min(0.5 * support).max(10.0 * calc.r_min());
        let tol = self.quad_tol;
        let u0 = u.value(x);

        let hess = u.hessian(x).unwrap_or_else(|| fd_hessian(u, x));
        let quad_form = |th: &[f64]| -> f64 {
            let mut acc = 0.0;
            for i in 0..d {
                for j in 0..d {
                    acc += th[i] * hess[i * d + j] * th[j];
                }
            }
            acc
        };
        // cancelling angular integrals only need to resolve the scale of u
        let hess_abs = 1e-14 * (1.0 + hess.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
        let ang_abs = 1e-14 * (1.0 + u0.abs());
        let m2 = calc.second_moment(s_t)?;
        let inner = match form {
            Form::Symmetrized => {
                let g = |th: &[f64]| {
                    let h: Vec<f64> = th.iter().map(|t| t * s_t).collect();
                    quad_form(th) * self.kernel.symmetric_coefficient(x, &h)
                };
                m2 * sphere_integral(d, true, g, tol, hess_abs)?
            }
            Form::Compensated => {
                let g = |th: &[f64]| {
                    let h: Vec<f64> = th.iter().map(|t| t * s_t).collect();
                    0.5 * quad_form(th) * self.kernel.coefficient(x, &h)
                };
                m2 * sphere_integral(d, false, g, tol, hess_abs)?
            }
        };

        let grad = match form {
            Form::Compensated => u.gradient(x).unwrap_or_else(|| fd_gradient(u, x)),
            Form::Symmetrized => Vec::new(),
        };
        // radial integrand in t = ln s: ℓ̂(s) × angular integral of the difference
        let radial = |t: f64| -> f64 {
            let s = t.exp();
            let w = self.kernel.ell_hat(s);
            if w == 0.0 {
                return 0.0;
            }
            let ang = match form {
                Form::Symmetrized => sphere_integral(
                    d,
                    true,
                    |th: &[f64]| {
                        let h: Vec<f64> = th.iter().map(|v| s * v).collect();
                        let p: Vec<f64> = x.iter().zip(&h).map(|(a, b)| a + b).collect();
                        let m: Vec<f64> = x.iter().zip(&h).map(|(a, b)| a - b).collect();
                        (u.value(&p) + u.value(&m) - 2.0 * u0) * self.kernel.symmetric_coefficient(x, &h)
                    },
                    tol * 0.1,
                    ang_abs,
                ),
                Form::Compensated => sphere_integral(
                    d,
                    false,
                    |th: &[f64]| {
                        let h: Vec<f64> = th.iter().map(|v| s * v).collect();
                        let p: Vec<f64> = x.iter().zip(&h).map(|(a, b)| a + b).collect();
                        let lin: f64 = if s <= 1.0 { grad.iter().zip(&h).map(|(g, v)| g * v).sum() } else { 0.0 };
                        (u.value(&p) - u0 - lin) * self.kernel.coefficient(x, &h)
                    },
                    tol * 0.1,
                    ang_abs,
                ),
            };
            w * ang.unwrap_or(f64::NAN)
        };

        let lo = s_t.ln();
        let s_top = if support.is_finite() {
            support
        } else {
            // L(S) below a 1e-3·tol fraction of L(s_t) bounds the neglected tail
            calc.invert_l(calc.eval_l(s_t)? * 1e-3 * tol)?
        };
        let hi = s_top.ln();
        let mut breaks = vec![lo];
        let mut marks: Vec<f64> = [0.5, 1.0, 2.0, 4.0].iter().map(|k| (k * scale).ln()).collect();
        if let Some(k) = self.kernel.kink() {
            marks.push(k.ln());
        }
        if matches!(form, Form::Compensated) {
            marks.push(0.0);
        }
        let n = ((hi - lo) / 1.0).ceil().max(1.0) as usize;
        for k in 1..n {
            breaks.push(lo + (hi - lo) * k as f64 / n as f64);
        }
        breaks.extend(marks.into_iter().filter(|m| *m > lo && *m < hi));
        breaks.push(hi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let natural = (1.0 + u0.abs()) * (1.0 + calc.eval_l(s_t)?);
        let outer = integrate_breaks(radial, &breaks, tol, 1e-13 * natural)?;
        if !outer.value.is_finite() {
            return Err(Error::numeric("angular quadrature failed", f64::INFINITY));
        }
        Ok(inner + outer.value)
    }

    /// For each r: max over x of −A b_r(x)/L(r), with x on `x_grid` given in
    /// units of r (the default grid is 64 points in (−2, 2) for d = 1).
    pub fn barrier_report(&self, r_grid: &[f64], x_grid: Option<&[Vec<f64>]>) -> Result<BarrierReport> {
        let d = self.kernel.dim();
        let calc = self.kernel.calculus();
        let default_grid: Vec<Vec<f64>>;
        let grid = match x_grid {
            Some(g) => g,
            None => {
                if d != 1 {
                    return Err(Error::Config("an explicit x grid is required for d > 1".into()));
                }
                default_grid = (0..64).map(|k| vec![-2.0 + 4.0 * (k as f64 + 0.5) / 64.0]).collect();
                &default_grid
            }
        };
        let mut rows = Vec::with_capacity(r_grid.len());
        for &r in r_grid {
            if !(r > 0.0 && r <= 0.5 * self.kernel.support()) {
                return Err(Error::domain(format!("barrier radius {r} must lie in (0, R₀/2]")));
            }
            let lr = calc.eval_l(r)?;
            let bump = GaussianBump::new(vec![0.0; d], r);
            let values: Vec<f64> = grid
                .par_iter()
                .map(|p| {
                    let x: Vec<f64> = p.iter().map(|v| v * r).collect();
                    self.apply(&bump, &x).map(|a| -a / lr)
                })
                .collect::<Result<_>>()?;
            let (k, max) = values
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            rows.push(BarrierRow { r, max_ratio: max, argmax_x: grid[k].iter().map(|v| v * r).collect() });
        }
        let lo = rows.iter().map(|r| r.max_ratio).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r.max_ratio).fold(f64::NEG_INFINITY, f64::max);
        Ok(BarrierReport { rows, spread: hi / lo })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierRow {
    pub r: f64,
    pub max_ratio: f64,
    pub argmax_x: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierReport {
    pub rows: Vec<BarrierRow>,
    /// max over r / min over r of the normalized maxima.
    pub spread: f64,
}

/// r ∈ {2⁻², …, 2⁻¹⁰}.
pub fn default_barrier_radii() -> Vec<f64> {
    (2..=10).map(|k| 0.5f64.powi(k)).collect()
}
