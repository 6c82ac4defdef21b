//! Exact causal mediation analysis on the odds-ratio scale for a binary
//! outcome `Y` with a binary mediator `W`, both modelled by logistic
//! regression.
//!
//! The natural direct and indirect effects are expressed through a single
//! quantity, the A-term, and do not rely on the rare-outcome assumption.
//! The crate also fits the two logistic models, propagates their
//! variance-covariance matrices to the effects by the delta method, and
//! ships the rare-outcome approximations and an independent
//! mediation-formula oracle for comparison.
//!
//! All numerical code is generic over the scalar type (`f32` or `f64`);
//! the `*64` aliases at the crate root name the usual double-precision
//! instantiations.

pub mod delta;
mod effect_set;
pub mod effects;
pub mod error;
pub mod linalg;
pub mod logit;
pub mod model;
pub mod oracle;
pub mod sim;
pub mod verify;

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

pub use effect_set::{EffectKind, EffectSet};
pub use error::{MediationError, Result};

/// Floating-point scalar the whole crate is generic over.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Largest linear predictor magnitude that `exp` accepts without
    /// overflowing (709 for `f64`, 88 for `f32`).
    fn max_linear_predictor() -> Self {
        Self::max_value().ln().floor()
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn lit<T: Scalar>(value: f64) -> T {
    T::from_f64(value).expect("literal representable in scalar type")
}

pub type ModelSpec = model::ModelSpec;
pub type OutcomeParams64 = model::OutcomeParams<f64>;
pub type MediatorParams64 = model::MediatorParams<f64>;
pub type CovariateProfile64 = model::CovariateProfile<f64>;
pub type Contrast64 = model::Contrast<f64>;
pub type Dataset64 = model::Dataset<f64>;
pub type Design64 = model::Design<f64>;
pub type EffectSet64 = EffectSet<f64>;
pub type FittedModel64 = logit::FittedModel<f64>;
pub type InferenceResult64 = delta::InferenceResult<f64>;
pub type Matrix64 = linalg::Matrix<f64>;

pub type OutcomeParams32 = model::OutcomeParams<f32>;
pub type MediatorParams32 = model::MediatorParams<f32>;
pub type EffectSet32 = EffectSet<f32>;
