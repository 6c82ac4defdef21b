//! Structured reports and their text rendering.

use std::collections::BTreeMap;
use std::fmt::Write;

use binmed::delta::{infer_with, EffectInference};
use binmed::effects::{natural_effects, special_case_report, PathwayCase};
use binmed::logit::FittedModel;
use binmed::model::Contrast;
use binmed::EffectKind;
use serde::Serialize;

use crate::coef::LoadedModel;
use crate::error::CliResult;
use crate::profile::ResolvedProfile;

/// Row order of the effect tables.
pub const TABLE_ORDER: [EffectKind; 7] = [
    EffectKind::Pnde,
    EffectKind::Tnde,
    EffectKind::Pnie,
    EffectKind::Tnie,
    EffectKind::Te,
    EffectKind::Cde0,
    EffectKind::Cde1,
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectRow {
    pub effect: &'static str,
    /// Odds ratio.
    pub estimate: f64,
    pub log_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se_log: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

impl From<&EffectInference<f64>> for EffectRow {
    fn from(e: &EffectInference<f64>) -> Self {
        Self {
            effect: e.kind.label(),
            estimate: e.estimate,
            log_estimate: e.log_estimate,
            se: Some(e.se),
            se_log: Some(e.se_log),
            ci_lower: Some(e.ci_lower),
            ci_upper: Some(e.ci_upper),
            p_value: Some(e.p_value),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileReport {
    pub label: String,
    pub values: BTreeMap<String, f64>,
    pub x: f64,
    pub x_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    pub effects: Vec<EffectRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn case_note(case: PathwayCase) -> &'static str {
    match case {
        PathwayCase::DirectNull => "no direct path: PNDE = TNDE = CDE(0) = 1 and TE = TNIE = PNIE",
        PathwayCase::MediatorOutcomeNull => "mediator does not enter the outcome model: TNIE = PNIE = 1 and TE = PNDE = TNDE = CDE(0)",
        PathwayCase::ExposureMediatorNull => "exposure does not enter the mediator model: TNIE = PNIE = 1 and TE = PNDE = TNDE",
    }
}

/// Effect table of one profile; with covariances, full delta-method
/// inference at `level`.
pub fn profile_report(
    model: &LoadedModel,
    profile: &ResolvedProfile,
    x: f64,
    x_star: f64,
    level: f64,
) -> CliResult<ProfileReport> {
    let contrast = Contrast::new(x, x_star, profile.profile.clone())?;
    let (effects, level) = match &model.covariance {
        Some((sb, sg)) => {
            let r = infer_with(&model.outcome, &model.mediator, sb, sg, &contrast, level)?;
            (TABLE_ORDER.iter().map(|&k| EffectRow::from(r.get(k))).collect(), Some(level))
        }
        None => {
            let e = natural_effects(&model.outcome, &model.mediator, &contrast)?;
            let rows = TABLE_ORDER
                .iter()
                .map(|&k| EffectRow {
                    effect: k.label(),
                    estimate: e.odds_ratio(k),
                    log_estimate: e.log(k),
                    se: None,
                    se_log: None,
                    ci_lower: None,
                    ci_upper: None,
                    p_value: None,
                })
                .collect();
            (rows, None)
        }
    };
    let notes = special_case_report(&model.outcome, &model.mediator, &contrast)
        .notes
        .iter()
        .map(|n| case_note(n.case).to_owned())
        .collect();
    Ok(ProfileReport { label: profile.label.clone(), values: profile.values.clone(), x, x_star, level, effects, notes })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub term: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionReport {
    pub n: usize,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub coefficients: Vec<CoefficientRow>,
}

impl RegressionReport {
    pub fn new(fit: &FittedModel<f64>, level: f64) -> Self {
        Self {
            n: fit.n,
            iterations: fit.iterations,
            log_likelihood: fit.log_likelihood,
            coefficients: fit
                .summary(level)
                .into_iter()
                .map(|s| CoefficientRow {
                    term: s.name,
                    estimate: s.estimate,
                    se: s.std_error,
                    ci_lower: s.ci_lower,
                    ci_upper: s.ci_upper,
                    p_value: s.p_value,
                })
                .collect(),
        }
    }
}

pub fn render_regression(title: &str, r: &RegressionReport, level: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{title} (n = {}, {} iterations, log-likelihood {:.3})", r.n, r.iterations, r.log_likelihood);
    let ci = format!("{:.0}% CI", level * 100.0);
    let _ = writeln!(s, "  {:<14} {:>9} {:>9} {:>21} {:>8}", "term", "estimate", "SE", ci, "p-value");
    for c in &r.coefficients {
        let _ = writeln!(
            s,
            "  {:<14} {:>9.3} {:>9.3} {:>21} {:>8.3}",
            c.term,
            c.estimate,
            c.se,
            format!("[{:.3}, {:.3}]", c.ci_lower, c.ci_upper),
            c.p_value
        );
    }
    s
}

pub fn render_profile(p: &ProfileReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "profile {} (x = {} vs x* = {})", p.label, p.x, p.x_star);
    if !p.values.is_empty() {
        let vals: Vec<String> = p.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "  at {}", vals.join(", "));
    }
    match p.level {
        Some(level) => {
            let ci = format!("{:.0}% CI", level * 100.0);
            let _ = writeln!(s, "  {:<8} {:>9} {:>9} {:>21} {:>8}", "effect", "OR", "SE", ci, "p-value");
            for e in &p.effects {
                let _ = writeln!(
                    s,
                    "  {:<8} {:>9.3} {:>9.3} {:>21} {:>8.3}",
                    e.effect,
                    e.estimate,
                    e.se.unwrap_or(f64::NAN),
                    format!("[{:.3}, {:.3}]", e.ci_lower.unwrap_or(f64::NAN), e.ci_upper.unwrap_or(f64::NAN)),
                    e.p_value.unwrap_or(f64::NAN)
                );
            }
        }
        None => {
            let _ = writeln!(s, "  {:<8} {:>9} {:>10}", "effect", "OR", "log OR");
            for e in &p.effects {
                let _ = writeln!(s, "  {:<8} {:>9.3} {:>10.4}", e.effect, e.estimate, e.log_estimate);
            }
        }
    }
    for n in &p.notes {
        let _ = writeln!(s, "  note: {n}");
    }
    s
}
