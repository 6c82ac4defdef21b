use binmed::delta::infer;
use binmed::effects::natural_effects;
use binmed::logit::{fit_models, FitOptions};
use binmed::model::{Contrast, CovariateProfile, MediatorBlocks, MediatorParams, ModelSpec, OutcomeBlocks, OutcomeParams};
use binmed::sim::{simulate, Marginal, SimulationPlan};
use binmed::EffectKind;

fn simple_plan() -> SimulationPlan<f64> {
    SimulationPlan {
        spec: ModelSpec::without_covariates(),
        outcome: OutcomeParams::simple(-1.0, 1.5, 0.8, 0.1),
        mediator: MediatorParams::simple(-0.3, 0.9),
        exposure: Marginal::Bernoulli { prevalence: 0.5 },
        covariates: vec![],
    }
}

#[test]
fn logistic_fits_recover_simulation_truth() {
    let plan = simple_plan();
    let data = simulate(&plan, 5000, 11).unwrap();
    let fits = fit_models(&data, &plan.spec, &FitOptions::default()).unwrap();
    let truth_y = plan.outcome.active();
    for ((b, se), t) in fits.outcome.coefficients.iter().zip(fits.outcome.std_errors()).zip(&truth_y) {
        assert!((b - t).abs() < 4.0 * se, "{b} vs {t} (se {se})");
    }
    let truth_w = plan.mediator.active();
    for ((g, se), t) in fits.mediator.coefficients.iter().zip(fits.mediator.std_errors()).zip(&truth_w) {
        assert!((g - t).abs() < 4.0 * se, "{g} vs {t} (se {se})");
    }
}

#[test]
fn simulated_frequencies_follow_the_models() {
    let plan = simple_plan();
    let n = 40_000;
    let data = simulate(&plan, n, 5).unwrap();
    let logistic = |eta: f64| 1.0 / (1.0 + (-eta).exp());
    for x in [0.0, 1.0] {
        let rows: Vec<usize> = (0..n).filter(|&i| data.x()[i] == x).collect();
        let m = rows.len() as f64;
        let p = logistic(plan.mediator.linear_predictor(x, &[]).unwrap());
        let freq = rows.iter().filter(|&&i| data.w()[i]).count() as f64 / m;
        assert!((freq - p).abs() < 4.0 * (p * (1.0 - p) / m).sqrt(), "P(W=1|x={x}): {freq} vs {p}");
        for w in [false, true] {
            let cell: Vec<usize> = rows.iter().copied().filter(|&i| data.w()[i] == w).collect();
            let m = cell.len() as f64;
            let p = logistic(plan.outcome.linear_predictor(x, w, &[]).unwrap());
            let freq = cell.iter().filter(|&&i| data.y()[i]).count() as f64 / m;
            assert!((freq - p).abs() < 4.0 * (p * (1.0 - p) / m).sqrt(), "P(Y=1|x={x},w={w}): {freq} vs {p}");
        }
    }
    let treated = data.x().iter().filter(|&&x| x == 1.0).count() as f64 / n as f64;
    assert!((treated - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
}

#[test]
fn covariate_model_estimates_total_effect_near_truth() {
    let spec = ModelSpec::new(vec!["age".into(), "loans".into()], vec!["age".into()], OutcomeBlocks::default(), MediatorBlocks::default()).unwrap();
    let outcome = OutcomeParams::<f64>::from_active(spec.outcome_layout(), &[-2.0, 1.2, 0.03, -0.4, 0.7, 0.2]).unwrap();
    let mediator = MediatorParams::from_active(spec.mediator_layout(), &[-0.5, 0.6, 0.01]).unwrap();
    let plan = SimulationPlan {
        spec: spec.clone(),
        outcome: outcome.clone(),
        mediator: mediator.clone(),
        exposure: Marginal::Bernoulli { prevalence: 0.4 },
        covariates: vec![
            ("age".into(), Marginal::Uniform { low: 20.0, high: 60.0 }),
            ("loans".into(), Marginal::Bernoulli { prevalence: 0.3 }),
        ],
    };
    let data = simulate(&plan, 5000, 42).unwrap();
    let fits = fit_models(&data, &spec, &FitOptions::default()).unwrap();
    let contrast = Contrast::binary(CovariateProfile::new(vec![40.0, 0.0], vec![40.0]).unwrap());
    let r = infer(&spec, &fits.outcome, &fits.mediator, &contrast, 0.95).unwrap();
    let truth = natural_effects(&outcome, &mediator, &contrast).unwrap();
    for kind in EffectKind::NATURAL {
        let e = r.get(kind);
        assert!((e.log_estimate - truth.log(kind)).abs() < 4.0 * e.se_log, "{kind}");
    }
}
