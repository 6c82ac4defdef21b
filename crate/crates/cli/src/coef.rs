//! Coefficient files: a model specification plus the estimates (and
//! optionally the covariance blocks) of both regressions, with optional
//! marginals for simulation and saved covariate profiles.

use std::collections::BTreeMap;
use std::path::Path;

use binmed::linalg::Matrix;
use binmed::logit::{FittedModel, FittedPair};
use binmed::model::{MediatorParams, ModelSpec, OutcomeParams};
use binmed::sim::{Marginal, SimulationPlan};
use binmed::MediationError;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

const BUNDLED: &[(&str, &str)] = &[("microcredit_table1", include_str!("../fixtures/microcredit_table1.json"))];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientBlock {
    pub terms: Vec<String>,
    pub estimates: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vcov: Option<Vec<Vec<f64>>>,
}

impl CoefficientBlock {
    pub fn from_fit(fit: &FittedModel<f64>) -> Self {
        Self { terms: fit.names.clone(), estimates: fit.coefficients.clone(), vcov: Some(fit.vcov.to_rows()) }
    }

    fn check(&self, expected: &[String], side: &str) -> CliResult<()> {
        if self.terms != expected {
            return Err(MediationError::Schema(format!(
                "{side} terms {:?} do not match the specification's layout {:?}",
                self.terms, expected
            ))
            .into());
        }
        if self.estimates.len() != expected.len() {
            return Err(MediationError::Dimension(format!(
                "{side} block has {} estimates for {} terms",
                self.estimates.len(),
                expected.len()
            ))
            .into());
        }
        Ok(())
    }

    fn covariance(&self, side: &str) -> CliResult<Option<Matrix<f64>>> {
        let Some(rows) = &self.vcov else { return Ok(None) };
        let k = self.terms.len();
        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
            return Err(MediationError::Dimension(format!("{side} covariance must be {k}x{k}")).into());
        }
        Ok(Matrix::from_rows(rows))
    }
}

/// A saved covariate profile, by confounder name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SavedProfile {
    pub label: String,
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub spec: ModelSpec,
    pub outcome: CoefficientBlock,
    pub mediator: CoefficientBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exposure: Option<Marginal>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub covariates: BTreeMap<String, Marginal>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub profiles: Vec<SavedProfile>,
}

/// Parameters and, when both blocks carry one, their covariances.
pub struct LoadedModel {
    pub outcome: OutcomeParams<f64>,
    pub mediator: MediatorParams<f64>,
    pub covariance: Option<(Matrix<f64>, Matrix<f64>)>,
}

impl CoefficientFile {
    pub fn from_fits(spec: &ModelSpec, fits: &FittedPair<f64>) -> Self {
        Self {
            name: None,
            description: None,
            spec: spec.clone(),
            outcome: CoefficientBlock::from_fit(&fits.outcome),
            mediator: CoefficientBlock::from_fit(&fits.mediator),
            exposure: None,
            covariates: BTreeMap::new(),
            profiles: Vec::new(),
        }
    }

    /// Reads a coefficient file, or the `model` section of a report
    /// written by `fit`. A name of a bundled fixture is accepted in place
    /// of a path that does not exist.
    pub fn load(source: &str) -> CliResult<Self> {
        let path = Path::new(source);
        let text = if path.exists() {
            std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?
        } else if let Some((_, text)) = BUNDLED.iter().find(|(name, _)| *name == source) {
            (*text).to_owned()
        } else {
            return Err(CliError::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled fixture"),
            ));
        };
        Self::parse(&text, source)
    }

    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::json(source, e))?;
        if let Some(model) = value.get_mut("model") {
            value = model.take();
        }
        serde_json::from_value(value).map_err(|e| CliError::json(source, e))
    }

    pub fn bundled_names() -> impl Iterator<Item = &'static str> {
        BUNDLED.iter().map(|(n, _)| *n)
    }

    pub fn model(&self) -> CliResult<LoadedModel> {
        self.outcome.check(&self.spec.outcome_column_names(), "outcome")?;
        self.mediator.check(&self.spec.mediator_column_names(), "mediator")?;
        let outcome = OutcomeParams::from_active(self.spec.outcome_layout(), &self.outcome.estimates)?;
        let mediator = MediatorParams::from_active(self.spec.mediator_layout(), &self.mediator.estimates)?;
        let covariance = match (self.outcome.covariance("outcome")?, self.mediator.covariance("mediator")?) {
            (Some(b), Some(g)) => Some((b, g)),
            (None, None) => None,
            _ => {
                return Err(MediationError::Schema(
                    "covariance given for only one of the two regressions".into(),
                )
                .into())
            }
        };
        Ok(LoadedModel { outcome, mediator, covariance })
    }

    pub fn simulation_plan(&self) -> CliResult<SimulationPlan<f64>> {
        let model = self.model()?;
        let exposure = self
            .exposure
            .ok_or_else(|| MediationError::Schema("coefficient file has no exposure marginal".into()))?;
        let covariates = self
            .spec
            .covariate_names()
            .into_iter()
            .map(|name| match self.covariates.get(&name) {
                Some(&m) => Ok((name, m)),
                None => Err(MediationError::Schema(format!("coefficient file has no marginal for '{name}'"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SimulationPlan { spec: self.spec.clone(), outcome: model.outcome, mediator: model.mediator, exposure, covariates })
    }

    /// Means of the declared covariate marginals, by name.
    pub fn marginal_means(&self) -> Option<Vec<(String, f64)>> {
        self.spec
            .covariate_names()
            .into_iter()
            .map(|name| self.covariates.get(&name).map(|m| (name, m.mean())))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixture_loads() {
        let f = CoefficientFile::load("microcredit_table1").unwrap();
        let m = f.model().unwrap();
        assert_eq!(m.outcome.beta_x(), 1.903);
        assert_eq!(m.mediator.gamma_x(), 0.262);
        assert!(m.covariance.is_none());
        assert_eq!(f.simulation_plan().unwrap().covariates.len(), 3);
    }

    #[test]
    fn mismatched_terms_are_rejected() {
        let mut f = CoefficientFile::load("microcredit_table1").unwrap();
        f.outcome.terms.swap(0, 1);
        assert_eq!(f.model().err().unwrap().exit_code(), 2);
    }

    #[test]
    fn report_model_section_is_accepted() {
        let f = CoefficientFile::load("microcredit_table1").unwrap();
        let wrapped = serde_json::json!({ "command": "fit", "model": f });
        let back = CoefficientFile::parse(&wrapped.to_string(), "report").unwrap();
        assert_eq!(back, f);
    }
}
