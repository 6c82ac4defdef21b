//! Closed forms of the diagonal A-term `A(x, x)` in the model without
//! confounders: through the log odds of the mediator given the outcome,
//!
//! ```text
//! g_y(x) = y(βw + βxw x) + log[(1 + exp(β0 + βx x)) / (1 + exp(β0 + βx x + βw + βxw x))] + γ0 + γx x
//! A(x, x) = (1 + exp g_1(x)) / (1 + exp g_0(x))
//! ```
//!
//! and as the inverse risk ratio `P(W=0 | Y=0, x) / P(W=0 | Y=1, x)` of the
//! joint law of `(Y, W)` given `X = x`.

use crate::effects::a_term;
use crate::error::{MediationError, Result};
use crate::model::{CovariateProfile, MediatorParams, OutcomeParams};
use crate::{lit, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GyCheck<T> {
    pub g0: T,
    pub g1: T,
    pub a_term: T,
    /// `|(1 + e^g1)/(1 + e^g0) - A| / max(1, A)`.
    pub residual_g: T,
    /// `|inverse risk ratio - A| / max(1, A)`.
    pub residual_risk_ratio: T,
    pub passed: bool,
}

pub const GY_TOLERANCE: f64 = 1e-12;

fn logistic<T: Scalar>(eta: T) -> T {
    if eta >= T::zero() {
        T::one() / (T::one() + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (T::one() + e)
    }
}

pub fn g_y_check<T: Scalar>(outcome: &OutcomeParams<T>, mediator: &MediatorParams<T>, x: T) -> Result<GyCheck<T>> {
    if outcome.p() != 0 || mediator.q() != 0 {
        return Err(MediationError::Schema("the g_y identity is stated for models without confounders".into()));
    }
    let one = T::one();
    let base = outcome.beta0() + outcome.beta_x() * x;
    let shift = outcome.beta_w() + outcome.beta_xw() * x;
    let mediator_eta = mediator.gamma0() + mediator.gamma_x() * x;
    let common = ((one + base.exp()) / (one + (base + shift).exp())).ln() + mediator_eta;
    let g0 = common;
    let g1 = shift + common;
    let a = a_term(outcome, mediator, x, x, &CovariateProfile::empty())?;
    let via_g = (one + g1.exp()) / (one + g0.exp());

    // joint law of (Y, W) given X = x
    let pw = [logistic(-mediator_eta), logistic(mediator_eta)];
    let py1 = [logistic(base), logistic(base + shift)];
    let py0 = [logistic(-base), logistic(-(base + shift))];
    let w0_given_y0 = pw[0] * py0[0] / (pw[0] * py0[0] + pw[1] * py0[1]);
    let w0_given_y1 = pw[0] * py1[0] / (pw[0] * py1[0] + pw[1] * py1[1]);
    let inverse_rr = w0_given_y0 / w0_given_y1;

    let scale = a.abs().max(one);
    let residual_g = (via_g - a).abs() / scale;
    let residual_risk_ratio = (inverse_rr - a).abs() / scale;
    let tol: T = lit(GY_TOLERANCE);
    Ok(GyCheck {
        g0,
        g1,
        a_term: a,
        residual_g,
        residual_risk_ratio,
        passed: residual_g < tol && residual_risk_ratio < tol,
    })
}
