//! Synthetic data from a fully specified pair of logistic models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MediationError, Result};
use crate::model::{Dataset, MediatorParams, ModelSpec, OutcomeParams};
use crate::Scalar;

/// Distribution of one exposure or covariate column. Columns are drawn
/// independently of each other.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    Bernoulli { prevalence: f64 },
    Uniform { low: f64, high: f64 },
}

impl Marginal {
    pub fn validate(&self, column: &str) -> Result<()> {
        let ok = match *self {
            Marginal::Bernoulli { prevalence } => (0.0..=1.0).contains(&prevalence),
            Marginal::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
        };
        if ok {
            Ok(())
        } else {
            Err(MediationError::InvalidArgument(format!("invalid marginal {self:?} for '{column}'")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::Bernoulli { prevalence } => prevalence,
            Marginal::Uniform { low, high } => 0.5 * (low + high),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Bernoulli { prevalence } => {
                if rng.random::<f64>() < prevalence {
                    1.0
                } else {
                    0.0
                }
            }
            Marginal::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
        }
    }
}

/// True parameters plus the marginals of every exogenous column.
#[derive(Clone, Debug)]
pub struct SimulationPlan<T> {
    pub spec: ModelSpec,
    pub outcome: OutcomeParams<T>,
    pub mediator: MediatorParams<T>,
    pub exposure: Marginal,
    /// One entry per name of [`ModelSpec::covariate_names`].
    pub covariates: Vec<(String, Marginal)>,
}

impl<T: Scalar> SimulationPlan<T> {
    pub fn validate(&self) -> Result<()> {
        if self.outcome.layout() != self.spec.outcome_layout() || self.mediator.layout() != self.spec.mediator_layout() {
            return Err(MediationError::Schema("parameter layouts do not match the model specification".into()));
        }
        self.exposure.validate("exposure")?;
        for name in self.spec.covariate_names() {
            match self.covariates.iter().find(|(n, _)| *n == name) {
                Some((n, m)) => m.validate(n)?,
                None => return Err(MediationError::Schema(format!("no marginal for covariate '{name}'"))),
            }
        }
        Ok(())
    }
}

fn bernoulli<T: Scalar>(rng: &mut ChaCha8Rng, eta: T) -> bool {
    let p = T::one() / (T::one() + (-eta).exp());
    T::from_f64(rng.random::<f64>()).unwrap_or_else(T::zero) < p
}

/// Draws `n` independent rows: covariates in declaration order, then the
/// exposure, the mediator and the outcome. The result depends only on
/// `seed`.
pub fn simulate<T: Scalar>(plan: &SimulationPlan<T>, n: usize, seed: u64) -> Result<Dataset<T>> {
    plan.validate()?;
    let names = plan.spec.covariate_names();
    let marginals: Vec<Marginal> = names
        .iter()
        .map(|name| plan.covariates.iter().find(|(n, _)| n == name).expect("validated").1)
        .collect();
    let z_idx: Vec<usize> =
        plan.spec.z_names().iter().map(|z| names.iter().position(|n| n == z).expect("covariate")).collect();
    let v_idx: Vec<usize> =
        plan.spec.v_names().iter().map(|v| names.iter().position(|n| n == v).expect("covariate")).collect();
    let cast = |v: f64| T::from_f64(v).ok_or_else(|| MediationError::InvalidArgument(format!("{v} is not representable")));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<T>> = vec![Vec::with_capacity(n); names.len()];
    let (mut x, mut w, mut y) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let mut row = vec![T::zero(); names.len()];
    for _ in 0..n {
        for (slot, m) in row.iter_mut().zip(&marginals) {
            *slot = cast(m.sample(&mut rng))?;
        }
        let xi = cast(plan.exposure.sample(&mut rng))?;
        let z: Vec<T> = z_idx.iter().map(|&j| row[j]).collect();
        let v: Vec<T> = v_idx.iter().map(|&j| row[j]).collect();
        let wi = bernoulli(&mut rng, plan.mediator.linear_predictor(xi, &v)?);
        let yi = bernoulli(&mut rng, plan.outcome.linear_predictor(xi, wi, &z)?);
        for (col, &val) in columns.iter_mut().zip(&row) {
            col.push(val);
        }
        x.push(xi);
        w.push(wi);
        y.push(yi);
    }
    Dataset::new(y, w, x, names.into_iter().zip(columns).collect())
}
