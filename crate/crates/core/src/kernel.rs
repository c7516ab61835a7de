//! The jump kernel K(x,h) = a(x,h) |h|^{-d} ℓ̂(|h|) shared by the symbol,
//! the process, the operator and the discretization.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::sphere_area;
use crate::scale::ScaleCalculus;

/// What the kernel does for |h| ≥ R₀.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    /// Jumps longer than R₀ are removed.
    #[default]
    None,
    /// Use the extended profile (s − R₀/2)^{-γ} beyond R₀.
    ExtendedProfile,
}

/// Bounded multiplicative coefficient a(x,h) ∈ [κ⁻¹, κ].
pub trait CoefficientField: Send + Sync + fmt::Debug {
    fn value(&self, x: &[f64], h: &[f64]) -> f64;
    fn kappa(&self) -> f64;
}

/// a(x,h) ≡ c.
#[derive(Clone, Copy, Debug)]
pub struct ConstantCoefficient(pub f64);

impl CoefficientField for ConstantCoefficient {
    fn value(&self, _x: &[f64], _h: &[f64]) -> f64 {
        self.0
    }
    fn kappa(&self) -> f64 {
        self.0.max(1.0 / self.0)
    }
}

#[derive(Clone)]
pub struct JumpKernel {
    calculus: ScaleCalculus,
    dim: usize,
    tail: TailRule,
    coeff: Option<Arc<dyn CoefficientField>>,
    sphere_area: f64,
}

impl fmt::Debug for JumpKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JumpKernel")
            .field("profile", &self.calculus.profile().label())
            .field("dim", &self.dim)
            .field("tail", &self.tail)
            .field("coeff", &self.coeff)
            .finish()
    }
}

impl JumpKernel {
    /// With `TailRule::ExtendedProfile` a finite-R₀ profile is replaced by
    /// its extension; the calculus then describes the extended L.
    pub fn new(calculus: ScaleCalculus, dim: usize, tail: TailRule) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        let calculus = match tail {
            TailRule::ExtendedProfile if calculus.r0().is_finite() => {
                let ext = calculus.profile().extend()?;
                ScaleCalculus::with_options(ext, calculus.mode(), calculus.tol(), calculus.r_min())?
            }
            _ => calculus,
        };
        Ok(JumpKernel { calculus, dim, tail, coeff: None, sphere_area: sphere_area(dim) })
    }

    pub fn with_coefficient(mut self, field: Arc<dyn CoefficientField>) -> Result<Self> {
        let k = field.kappa();
        if !(k >= 1.0 && k.is_finite()) {
            return Err(Error::Config(format!("coefficient bound κ = {k} must be finite and ≥ 1")));
        }
        self.coeff = Some(field);
        Ok(self)
    }

    pub fn calculus(&self) -> &ScaleCalculus {
        &self.calculus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tail(&self) -> TailRule {
        self.tail
    }

    pub fn sphere_area(&self) -> f64 {
        self.sphere_area
    }

    pub fn coefficient_field(&self) -> Option<&Arc<dyn CoefficientField>> {
        self.coeff.as_ref()
    }

    /// κ (1 without a coefficient field).
    pub fn kappa(&self) -> f64 {
        self.coeff.as_ref().map_or(1.0, |c| c.kappa())
    }

    /// Radius beyond which the kernel vanishes (∞ for extended tails).
    pub fn support(&self) -> f64 {
        self.calculus.r0()
    }

    /// Location of a discontinuity of ℓ̂ inside the support, if any.
    pub fn kink(&self) -> Option<f64> {
        self.calculus.profile().tail_from()
    }

    /// ℓ̂(s): ℓ on the support, 0 outside.
    pub fn ell_hat(&self, s: f64) -> f64 {
        if s >= self.support() || s <= 0.0 {
            0.0
        } else {
            self.calculus.profile().ell_unchecked(s)
        }
    }

    /// j(s) = ℓ̂(s) s^{-d}.
    pub fn j(&self, s: f64) -> f64 {
        self.ell_hat(s) / s.powi(self.dim as i32)
    }

    /// a(x,h) (1 without a field).
    pub fn coefficient(&self, x: &[f64], h: &[f64]) -> f64 {
        self.coeff.as_ref().map_or(1.0, |c| c.value(x, h))
    }

    /// (a(x,h) + a(x,−h))/2.
    pub fn symmetric_coefficient(&self, x: &[f64], h: &[f64]) -> f64 {
        match &self.coeff {
            None => 1.0,
            Some(c) => {
                let neg: Vec<f64> = h.iter().map(|v| -v).collect();
                0.5 * (c.value(x, h) + c.value(x, &neg))
            }
        }
    }
}
