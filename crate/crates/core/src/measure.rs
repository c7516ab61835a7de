//! The intrinsic measure μ(dy) = ℓ(|y|) / (L(|y|) |y|^d) dy.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scale::ScaleCalculus;

/// |∂B₁| in dimension d, from |∂B₁|_{d+2} = 2π |∂B₁|_d / d.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        d => 2.0 * PI * sphere_area(d - 2) / (d - 2) as f64,
    }
}

#[derive(Clone, Debug)]
pub struct IntrinsicMeasure {
    calculus: ScaleCalculus,
    dim: usize,
    sphere_area: f64,
}

impl IntrinsicMeasure {
    pub fn new(calculus: ScaleCalculus, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        Ok(IntrinsicMeasure { calculus, dim, sphere_area: sphere_area(dim) })
    }

    pub fn calculus(&self) -> &ScaleCalculus {
        &self.calculus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sphere_area(&self) -> f64 {
        self.sphere_area
    }

    /// Density of μ at radius |y|.
    pub fn density(&self, radius: f64) -> Result<f64> {
        let l = self.calculus.eval_l(radius)?;
        Ok(self.calculus.ell(radius)? / (l * radius.powi(self.dim as i32)))
    }

    /// μ(B_{r_out} ∖ B_{r_in}) = |∂B₁| ln(L(r_in)/L(r_out)).
    pub fn mu_annulus(&self, r_in: f64, r_out: f64) -> Result<f64> {
        if !(r_in > 0.0 && r_in <= r_out) {
            return Err(Error::domain(format!("annulus needs 0 < r_in ≤ r_out, got ({r_in}, {r_out})")));
        }
        if r_out >= self.calculus.r0() {
            return Err(Error::domain("outer radius reaches R₀ where L vanishes"));
        }
        if r_in == r_out {
            return Ok(0.0);
        }
        let a = self.calculus.eval_l(r_in)?;
        let b = self.calculus.eval_l(r_out)?;
        Ok(self.sphere_area * (a / b).ln())
    }
}
