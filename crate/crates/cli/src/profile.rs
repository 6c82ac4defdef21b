//! Covariate profiles given on the command line.

use std::collections::BTreeMap;

use binmed::model::{CovariateProfile, Dataset, ModelSpec};
use binmed::MediationError;

use crate::coef::{CoefficientFile, SavedProfile};
use crate::error::CliResult;

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileRequest {
    /// Sample means of the confounders, or the means of their declared
    /// marginals when there is no data.
    Mean,
    /// Median of each confounder, or its most frequent value when it takes
    /// at most two values.
    Typical,
    Values(Vec<(String, f64)>),
}

pub fn parse_profile(text: &str) -> CliResult<ProfileRequest> {
    match text.trim() {
        "mean" => return Ok(ProfileRequest::Mean),
        "typical" => return Ok(ProfileRequest::Typical),
        _ => {}
    }
    let mut values = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| MediationError::Schema(format!("profile entry '{item}' is not name=value")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| MediationError::Schema(format!("profile value '{value}' for '{name}' is not a number")))?;
        values.push((name.trim().to_owned(), v));
    }
    Ok(ProfileRequest::Values(values))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedProfile {
    pub label: String,
    pub profile: CovariateProfile<f64>,
    pub values: BTreeMap<String, f64>,
}

impl ResolvedProfile {
    fn new(label: String, spec: &ModelSpec, profile: CovariateProfile<f64>) -> Self {
        let mut values = BTreeMap::new();
        for (n, &v) in spec.z_names().iter().zip(&profile.z).chain(spec.v_names().iter().zip(&profile.v)) {
            values.insert(n.clone(), v);
        }
        Self { label, profile, values }
    }

    fn from_pairs(label: String, spec: &ModelSpec, pairs: &[(String, f64)]) -> CliResult<Self> {
        Ok(Self::new(label, spec, CovariateProfile::from_named(spec, pairs)?))
    }

    pub fn saved(&self) -> SavedProfile {
        SavedProfile { label: self.label.clone(), values: self.values.clone() }
    }
}

/// Profiles for a fitted data set; `mean` when none are requested.
pub fn resolve_with_data(spec: &ModelSpec, data: &Dataset<f64>, requests: &[String]) -> CliResult<Vec<ResolvedProfile>> {
    let default = ["mean".to_owned()];
    let requests = if requests.is_empty() { &default[..] } else { requests };
    requests
        .iter()
        .map(|text| {
            let label = text.trim().to_owned();
            match parse_profile(text)? {
                ProfileRequest::Mean => Ok(ResolvedProfile::new(label, spec, data.mean_profile(spec)?)),
                ProfileRequest::Typical => Ok(ResolvedProfile::new(label, spec, data.typical_profile(spec)?)),
                ProfileRequest::Values(pairs) => ResolvedProfile::from_pairs(label, spec, &pairs),
            }
        })
        .collect()
}

/// Profiles for coefficient mode. Without requests: the profiles saved in
/// the file, else the marginal means, else the empty profile of a model
/// without confounders.
pub fn resolve_from_file(file: &CoefficientFile, requests: &[String]) -> CliResult<Vec<ResolvedProfile>> {
    let spec = &file.spec;
    if requests.is_empty() {
        if !file.profiles.is_empty() {
            return file
                .profiles
                .iter()
                .map(|p| {
                    let pairs: Vec<(String, f64)> = p.values.iter().map(|(k, &v)| (k.clone(), v)).collect();
                    ResolvedProfile::from_pairs(p.label.clone(), spec, &pairs)
                })
                .collect();
        }
        if spec.covariate_names().is_empty() {
            return Ok(vec![ResolvedProfile::new("(no confounders)".into(), spec, CovariateProfile::empty())]);
        }
    }
    let default = ["mean".to_owned()];
    let requests = if requests.is_empty() { &default[..] } else { requests };
    requests
        .iter()
        .map(|text| {
            let label = text.trim().to_owned();
            let request = parse_profile(text)?;
            // A fit report keeps the data-derived profiles under their labels.
            if matches!(request, ProfileRequest::Mean | ProfileRequest::Typical) {
                if let Some(saved) = file.profiles.iter().find(|p| p.label == label) {
                    let pairs: Vec<(String, f64)> = saved.values.iter().map(|(k, &v)| (k.clone(), v)).collect();
                    return ResolvedProfile::from_pairs(label, spec, &pairs);
                }
            }
            match request {
                ProfileRequest::Mean => {
                    let pairs = file.marginal_means().ok_or_else(|| {
                        MediationError::Schema("profile 'mean' needs data or covariate marginals; pass --profile name=value".into())
                    })?;
                    ResolvedProfile::from_pairs(label, spec, &pairs)
                }
                ProfileRequest::Typical => Err(MediationError::Schema("profile 'typical' needs data".into()).into()),
                ProfileRequest::Values(pairs) => ResolvedProfile::from_pairs(label, spec, &pairs),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_named_values() {
        assert_eq!(
            parse_profile("age=37, university=0").unwrap(),
            ProfileRequest::Values(vec![("age".into(), 37.0), ("university".into(), 0.0)])
        );
        assert_eq!(parse_profile("mean").unwrap(), ProfileRequest::Mean);
        assert!(parse_profile("age:37").is_err());
        assert!(parse_profile("age=old").is_err());
    }

    #[test]
    fn fixture_means_and_unknown_names() {
        let f = CoefficientFile::load("microcredit_table1").unwrap();
        let p = resolve_from_file(&f, &[]).unwrap();
        assert_eq!(p[0].profile.z, vec![43.5, 0.05, 1.5]);
        assert!(resolve_from_file(&f, &["age=37,height=2".into()]).is_err());
        assert!(resolve_from_file(&f, &["age=37".into()]).is_err());
    }

    #[test]
    fn named_requests_use_saved_profiles() {
        let mut f = CoefficientFile::load("microcredit_table1").unwrap();
        f.covariates.clear();
        assert!(resolve_from_file(&f, &["mean".into()]).is_err());
        let values = [("age", 30.0), ("loans", 1.0), ("university", 0.0)];
        f.profiles.push(SavedProfile {
            label: "mean".into(),
            values: values.iter().map(|&(k, v)| (k.to_owned(), v)).collect(),
        });
        let p = resolve_from_file(&f, &["mean".into()]).unwrap();
        assert_eq!(p[0].profile.z, vec![30.0, 0.0, 1.0]);
        assert!(resolve_from_file(&f, &["typical".into()]).is_err());
    }
}
