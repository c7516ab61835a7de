//! Intrinsic scaling toolkit for nonlocal operators whose kernels are only
//! weakly singular, K(x,h) ≍ |h|^{-d} ℓ(|h|).
//!
//! The building blocks are a [`profile::KernelProfile`] ℓ and the scale
//! L(r) = ∫_r^{R₀} ℓ(s)/s ds evaluated by [`scale::ScaleCalculus`]. On top of
//! these sit the characteristic exponent ([`symbol`]), a Monte Carlo engine
//! for the jump process ([`process`]), a quadrature evaluator for the
//! operator ([`operator`]) and a dense Dirichlet solver with Hölder-modulus
//! measurements ([`regularity`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod error;
pub mod experiment;
pub mod kernel;
pub mod measure;
pub mod operator;
pub mod process;
pub mod profile;
pub mod quadrature;
pub mod regularity;
pub mod regvar;
pub mod scale;
pub mod symbol;

pub use error::{Error, Result};
pub use kernel::{CoefficientField, JumpKernel, TailRule};
pub use measure::{sphere_area, IntrinsicMeasure};
pub use profile::{Family, KernelProfile, ProfileDocument, ScalingConstants};
pub use scale::{EvalMode, ScaleCalculus};
