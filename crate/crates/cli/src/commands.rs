use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;

use binmed::effects::{approx_effects, natural_effects};
use binmed::logit::{fit_models, FitOptions};
use binmed::model::{Contrast, OutcomeTerm};
use binmed::sim::simulate;
use binmed::verify::{self, VerifyOptions};
use binmed::EffectKind;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{CompareArgs, EffectsArgs, FitArgs, SimulateArgs, VerifyArgs};
use crate::coef::{CoefficientFile, LoadedModel};
use crate::data::{read_dataset, write_dataset};
use crate::error::{CliError, CliResult};
use crate::profile::{resolve_from_file, resolve_with_data};
use crate::report::{profile_report, render_profile, render_regression, ProfileReport, RegressionReport};

/// What a command produced. `failure` is set when the command ran to the
/// end but its result must still be reported as an error.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub json: Option<Value>,
    pub failure: Option<CliError>,
}

fn to_json<T: Serialize>(value: &T) -> CliResult<Value> {
    serde_json::to_value(value).map_err(|e| CliError::json("report", e))
}

pub fn fit(args: &FitArgs) -> CliResult<Output> {
    args.contrast.check()?;
    let spec = args.model.spec()?;
    let file = File::open(&args.input).map_err(|e| CliError::io(&args.input, e))?;
    let data = read_dataset(BufReader::new(file), &args.columns.bindings(), &spec)?;
    let fits = fit_models(&data, &spec, &FitOptions::default())?;
    let profiles = resolve_with_data(&spec, &data, &args.contrast.profiles)?;

    let mut model = CoefficientFile::from_fits(&spec, &fits);
    model.profiles = profiles.iter().map(|p| p.saved()).collect();
    let loaded = model.model()?;
    let tables = profiles
        .iter()
        .map(|p| profile_report(&loaded, p, args.contrast.x, args.contrast.x_star, args.contrast.level))
        .collect::<CliResult<Vec<_>>>()?;

    let level = args.contrast.level;
    let outcome = RegressionReport::new(&fits.outcome, level);
    let mediator = RegressionReport::new(&fits.mediator, level);
    let mut text = String::new();
    text.push_str(&render_regression(&format!("outcome model for {}", args.columns.outcome), &outcome, level));
    text.push('\n');
    text.push_str(&render_regression(&format!("mediator model for {}", args.columns.mediator), &mediator, level));
    for t in &tables {
        text.push('\n');
        text.push_str(&render_profile(t));
    }
    let json = json!({
        "command": "fit",
        "config": to_json(args)?,
        "regressions": { "outcome": to_json(&outcome)?, "mediator": to_json(&mediator)? },
        "profiles": to_json(&tables)?,
        "model": to_json(&model)?,
    });
    Ok(Output { text, json: Some(json), failure: None })
}

fn effect_tables(model: &LoadedModel, file: &CoefficientFile, args: &crate::args::ContrastArgs) -> CliResult<Vec<ProfileReport>> {
    resolve_from_file(file, &args.profiles)?
        .iter()
        .map(|p| profile_report(model, p, args.x, args.x_star, args.level))
        .collect()
}

pub fn effects(args: &EffectsArgs) -> CliResult<Output> {
    args.contrast.check()?;
    let file = CoefficientFile::load(&args.coef_file)?;
    let model = file.model()?;
    let tables = effect_tables(&model, &file, &args.contrast)?;
    let mut text = String::new();
    if model.covariance.is_none() {
        text.push_str("no covariance blocks in the coefficient file: point estimates only\n\n");
    }
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            text.push('\n');
        }
        text.push_str(&render_profile(t));
    }
    let json = json!({
        "command": "effects",
        "config": to_json(args)?,
        "profiles": to_json(&tables)?,
        "model": to_json(&file)?,
    });
    Ok(Output { text, json: Some(json), failure: None })
}

pub fn simulate_cmd(args: &SimulateArgs) -> CliResult<Output> {
    let file = CoefficientFile::load(&args.coef_file)?;
    let plan = file.simulation_plan()?;
    let data = simulate(&plan, args.n, args.seed)?;
    let bindings = args.columns.bindings();
    match &args.output {
        Some(path) => {
            let f = File::create(path).map_err(|e| CliError::io(path, e))?;
            write_dataset(std::io::BufWriter::new(f), &data, &bindings)?;
            Ok(Output {
                text: format!("wrote {} rows to {} (seed {})\n", args.n, path.display(), args.seed),
                json: None,
                failure: None,
            })
        }
        None => {
            let mut buf = Vec::new();
            write_dataset(&mut buf, &data, &bindings)?;
            let text = String::from_utf8(buf).expect("csv output is UTF-8");
            Ok(Output { text, json: None, failure: None })
        }
    }
}

#[derive(Debug, Serialize)]
struct CompareRow {
    beta0: f64,
    profile: String,
    effect: &'static str,
    exact: f64,
    approx: f64,
    /// `|log exact - log approx|`.
    log_gap: f64,
}

pub fn compare(args: &CompareArgs) -> CliResult<Output> {
    args.contrast.check()?;
    let file = CoefficientFile::load(&args.coef_file)?;
    let model = file.model()?;
    let profiles = resolve_from_file(&file, &args.contrast.profiles)?;
    let grid = if args.grid.is_empty() { vec![model.outcome.beta0()] } else { args.grid.clone() };
    let kinds = [EffectKind::Pnde, EffectKind::Tnde, EffectKind::Pnie, EffectKind::Tnie, EffectKind::Te];

    let mut rows = Vec::new();
    for &b0 in &grid {
        let outcome = model.outcome.with(OutcomeTerm::Intercept, b0);
        for p in &profiles {
            let contrast = Contrast::new(args.contrast.x, args.contrast.x_star, p.profile.clone())?;
            let exact = natural_effects(&outcome, &model.mediator, &contrast)?;
            let approx = approx_effects(&outcome, &model.mediator, &contrast)?;
            for k in kinds {
                rows.push(CompareRow {
                    beta0: b0,
                    profile: p.label.clone(),
                    effect: k.label(),
                    exact: exact.odds_ratio(k),
                    approx: approx.odds_ratio(k),
                    log_gap: (exact.log(k) - approx.log(k)).abs(),
                });
            }
        }
    }

    let mut text = String::new();
    let _ = writeln!(text, "approximate TE is approximate PNDE x approximate TNIE");
    let _ = writeln!(text, "{:>9}  {:<30} {:<6} {:>10} {:>10} {:>12}", "beta0", "profile", "effect", "exact", "approx", "log gap");
    for r in &rows {
        let _ = writeln!(
            text,
            "{:>9.3}  {:<30} {:<6} {:>10.4} {:>10.4} {:>12.3e}",
            r.beta0, r.profile, r.effect, r.exact, r.approx, r.log_gap
        );
    }
    let json = json!({ "command": "compare", "config": to_json(args)?, "rows": to_json(&rows)? });
    Ok(Output { text, json: Some(json), failure: None })
}

#[derive(Debug, Serialize)]
struct SuiteJson {
    suite: &'static str,
    passed: bool,
    checked: usize,
    failures: usize,
    max_error: f64,
    tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_failure: Option<String>,
}

pub fn verify_cmd(args: &VerifyArgs) -> CliResult<Output> {
    let options = VerifyOptions { seed: args.seed, count: args.count, perturb: args.perturb, ..Default::default() };
    let report = verify::run(&options);
    let mut text = String::new();
    let _ = writeln!(text, "seed {}, {} draws per suite", report.seed, report.count);
    let mut suites = Vec::new();
    for s in &report.suites {
        let status = if s.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            text,
            "{status} {:<28} checked {:>5}  failures {:>5}  max error {:.3e}  tolerance {:.0e}",
            s.name, s.checked, s.failures, s.max_error, s.tolerance
        );
        let first_failure = s.first_failure.as_ref().map(|(i, m)| format!("draw {i}: {m}"));
        if let Some(f) = &first_failure {
            let _ = writeln!(text, "     first failure at {f}");
        }
        suites.push(SuiteJson {
            suite: s.name,
            passed: s.passed(),
            checked: s.checked,
            failures: s.failures,
            max_error: s.max_error,
            tolerance: s.tolerance,
            first_failure,
        });
    }
    let failed: Vec<&str> = report.suites.iter().filter(|s| !s.passed()).map(|s| s.name).collect();
    let failure = (!failed.is_empty()).then(|| CliError::Verification(format!("failed suites: {}", failed.join(", "))));
    let json = json!({
        "command": "verify",
        "config": to_json(args)?,
        "passed": failure.is_none(),
        "suites": to_json(&suites)?,
    });
    Ok(Output { text, json: Some(json), failure })
}
