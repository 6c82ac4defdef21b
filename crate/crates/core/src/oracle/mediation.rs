//! Effects from the mediation formula: each counterfactual odds is a ratio
//! of mediator-weighted sums of outcome probabilities,
//!
//! ```text
//! Q(a, m) = Σ_w P(Y=1 | a, w) P(W=w | m) / Σ_w P(Y=0 | a, w) P(W=w | m)
//! ```
//!
//! with `a` the exposure level in the outcome model and `m` the level in
//! the mediator model. Only the model types are used here.

use crate::error::{MediationError, Result};
use crate::model::{Contrast, MediatorParams, OutcomeParams};
use crate::{lit, EffectSet, Scalar};

/// Minimum distance of any table probability from 0 or 1.
pub const BOUNDARY_GUARD: f64 = 1e-15;

/// Conditional probabilities at a contrast's profile. Index 0 is the
/// reference level `x*`, index 1 the active level `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTables<T> {
    /// `p_y[a][w] = P(Y=1 | X=a, W=w, c)`.
    pub p_y: [[T; 2]; 2],
    /// `P(Y=0 | X=a, W=w, c)`, evaluated directly rather than as `1 - p_y`.
    pub q_y: [[T; 2]; 2],
    /// `p_w[a] = P(W=1 | X=a, c)`.
    pub p_w: [T; 2],
    /// `P(W=0 | X=a, c)`.
    pub q_w: [T; 2],
    pub contrast: Contrast<T>,
}

fn logistic<T: Scalar>(eta: T) -> T {
    if eta >= T::zero() {
        T::one() / (T::one() + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (T::one() + e)
    }
}

fn interior<T: Scalar>(p: T, q: T, context: impl FnOnce() -> String) -> Result<()> {
    let guard: T = lit(BOUNDARY_GUARD);
    if !(p > guard && q > guard) {
        return Err(MediationError::DegenerateProbability {
            context: context(),
            value: p.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

pub fn tables_from_params<T: Scalar>(
    outcome: &OutcomeParams<T>,
    mediator: &MediatorParams<T>,
    contrast: &Contrast<T>,
) -> Result<ProbabilityTables<T>> {
    let levels = [contrast.x_star, contrast.x];
    let (z, v) = (&contrast.profile.z, &contrast.profile.v);
    let zero = T::zero();
    let mut t = ProbabilityTables {
        p_y: [[zero; 2]; 2],
        q_y: [[zero; 2]; 2],
        p_w: [zero; 2],
        q_w: [zero; 2],
        contrast: contrast.clone(),
    };
    for (a, &xa) in levels.iter().enumerate() {
        for (wi, w) in [false, true].into_iter().enumerate() {
            let eta = outcome.linear_predictor(xa, w, z)?;
            t.p_y[a][wi] = logistic(eta);
            t.q_y[a][wi] = logistic(-eta);
            interior(t.p_y[a][wi], t.q_y[a][wi], || format!("P(Y=1 | x={xa}, w={wi})"))?;
        }
        let eta = mediator.linear_predictor(xa, v)?;
        t.p_w[a] = logistic(eta);
        t.q_w[a] = logistic(-eta);
        interior(t.p_w[a], t.q_w[a], || format!("P(W=1 | x={xa})"))?;
    }
    Ok(t)
}

impl<T: Scalar> ProbabilityTables<T> {
    /// Log of the counterfactual odds with the outcome model at exposure
    /// index `a` and the mediator distribution at exposure index `m`.
    pub fn log_counterfactual_odds(&self, a: usize, m: usize) -> T {
        let ones = self.p_y[a][1] * self.p_w[m] + self.p_y[a][0] * self.q_w[m];
        let zeros = self.q_y[a][1] * self.p_w[m] + self.q_y[a][0] * self.q_w[m];
        (ones / zeros).ln()
    }

    fn log_odds(p: T, q: T) -> T {
        (p / q).ln()
    }
}

pub fn mediation_formula_effects<T: Scalar>(tables: &ProbabilityTables<T>) -> Result<EffectSet<T>> {
    for a in 0..2 {
        for w in 0..2 {
            interior(tables.p_y[a][w], tables.q_y[a][w], || format!("P(Y=1 | a={a}, w={w})"))?;
        }
        interior(tables.p_w[a], tables.q_w[a], || format!("P(W=1 | a={a})"))?;
    }
    let q = |a, m| tables.log_counterfactual_odds(a, m);
    let (q00, q10, q01, q11) = (q(0, 0), q(1, 0), q(0, 1), q(1, 1));
    let cde = |w: usize| {
        ProbabilityTables::log_odds(tables.p_y[1][w], tables.q_y[1][w])
            - ProbabilityTables::log_odds(tables.p_y[0][w], tables.q_y[0][w])
    };
    Ok(EffectSet {
        log_pnde: q10 - q00,
        log_tnie: q11 - q10,
        log_tnde: q11 - q01,
        log_pnie: q01 - q00,
        log_te: q11 - q00,
        log_cde_at: [cde(0), cde(1)],
        contrast: tables.contrast.clone(),
    })
}
