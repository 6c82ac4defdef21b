//! Seeded self-checks of the effect formulas against the independent
//! oracles. Shared by the `verify` command and the test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::delta::jacobian_log_effects;
use crate::effects::{natural_effects, ATermInputs};
use crate::error::Result;
use crate::model::{Contrast, CovariateProfile, MediatorBlocks, MediatorParams, ModelSpec, OutcomeBlocks, OutcomeParams};
use crate::oracle::finite_diff::{finite_diff, max_relative_error, StepPolicy};
use crate::oracle::{g_y_check, mediation_formula_effects, tables_from_params};
use crate::EffectKind;

pub const ORACLE_TOLERANCE: f64 = 1e-10;
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-12;
pub const BRACKETING_TOLERANCE: f64 = 1e-12;
pub const JACOBIAN_TOLERANCE: f64 = 1e-5;
pub const JACOBIAN_ROW_TOLERANCE: f64 = 1e-12;
pub const GY_TOLERANCE: f64 = crate::oracle::identity::GY_TOLERANCE;

/// Ranges of the random parameter draws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DrawConfig {
    pub max_p: usize,
    pub max_q: usize,
    /// Coefficients are uniform in `[-coef_bound, coef_bound]`.
    pub coef_bound: f64,
    /// `x`, `x*` and the profile values are uniform in
    /// `[-value_bound, value_bound]`.
    pub value_bound: f64,
}

impl Default for DrawConfig {
    fn default() -> Self {
        Self { max_p: 2, max_q: 2, coef_bound: 2.0, value_bound: 1.0 }
    }
}

/// One random model with every interaction block included.
#[derive(Clone, Debug)]
pub struct Draw {
    pub spec: ModelSpec,
    pub outcome: OutcomeParams<f64>,
    pub mediator: MediatorParams<f64>,
    pub contrast: Contrast<f64>,
}

fn uniform(rng: &mut ChaCha8Rng, bound: f64) -> f64 {
    rng.random_range(-bound..=bound)
}

pub fn random_draw(rng: &mut ChaCha8Rng, config: &DrawConfig) -> Draw {
    let p = rng.random_range(0..=config.max_p);
    let q = rng.random_range(0..=config.max_q);
    let spec = ModelSpec::new(
        (0..p).map(|j| format!("z{}", j + 1)).collect(),
        (0..q).map(|j| format!("v{}", j + 1)).collect(),
        OutcomeBlocks::full(),
        MediatorBlocks::full(),
    )
    .expect("generated names are distinct");
    let theta: Vec<f64> = (0..spec.theta_len()).map(|_| uniform(rng, config.coef_bound)).collect();
    let (outcome, mediator) = spec.params_from_theta(&theta).expect("theta has the model's length");
    let x = uniform(rng, config.value_bound);
    let x_star = uniform(rng, config.value_bound);
    let z = (0..p).map(|_| uniform(rng, config.value_bound)).collect();
    let v = (0..q).map(|_| uniform(rng, config.value_bound)).collect();
    let profile = CovariateProfile::new(z, v).expect("finite profile");
    let contrast = Contrast::new(x, x_star, profile).expect("finite contrast");
    Draw { spec, outcome, mediator, contrast }
}

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checked: usize,
    pub failures: usize,
    /// Largest observed error, compared against `tolerance`.
    pub max_error: f64,
    pub tolerance: f64,
    /// Draw index and message of the first failure, if any.
    pub first_failure: Option<(usize, String)>,
}

impl SuiteResult {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, checked: 0, failures: 0, max_error: 0.0, tolerance, first_failure: None }
    }

    fn record(&mut self, index: usize, error: f64) {
        self.checked += 1;
        if error.is_nan() || error > self.max_error {
            self.max_error = error;
        }
        let within = error < self.tolerance;
        if !within {
            self.fail(index, format!("error {error:e} exceeds {:e}", self.tolerance));
        }
    }

    fn fail(&mut self, index: usize, message: String) {
        self.failures += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some((index, message));
        }
    }

    fn record_result(&mut self, index: usize, outcome: Result<f64>) {
        match outcome {
            Ok(e) => self.record(index, e),
            Err(err) => {
                self.checked += 1;
                self.fail(index, err.to_string());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub count: usize,
    /// Added to the exact log total effect, its Jacobian row and the
    /// identity residuals before comparison. Zero in normal use; a nonzero
    /// value is a negative control under which every suite but bracketing
    /// fails.
    pub perturb: f64,
    pub draws: DrawConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 20_240_601, count: 1000, perturb: 0.0, draws: DrawConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub count: usize,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

/// Random stream per suite family so suites can run in any order. The
/// formula suites (oracle, decomposition, bracketing) share stream 1 and
/// so see the same draws.
fn suite_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draws(options: &VerifyOptions, stream: u64) -> impl Iterator<Item = (usize, Draw)> {
    let mut rng = suite_rng(options.seed, stream);
    let config = options.draws;
    (0..options.count).map(move |i| (i, random_draw(&mut rng, &config)))
}

/// `max |log exact - log mediation formula|` over the five effects and
/// both controlled direct effects.
pub fn oracle_error(draw: &Draw, perturb: f64) -> Result<f64> {
    let exact = natural_effects(&draw.outcome, &draw.mediator, &draw.contrast)?;
    let tables = tables_from_params(&draw.outcome, &draw.mediator, &draw.contrast)?;
    let oracle = mediation_formula_effects(&tables)?;
    let kinds = EffectKind::NATURAL.iter().chain(&[EffectKind::Cde0, EffectKind::Cde1]);
    let shift = |k| if k == EffectKind::Te { perturb } else { 0.0 };
    Ok(kinds.map(|&k| (exact.log(k) + shift(k) - oracle.log(k)).abs()).fold(0.0, f64::max))
}

pub fn oracle_suite(options: &VerifyOptions) -> SuiteResult {
    let mut suite = SuiteResult::new("oracle equivalence", ORACLE_TOLERANCE);
    for (i, d) in draws(options, 1) {
        suite.record_result(i, oracle_error(&d, options.perturb));
    }
    suite
}

pub fn decomposition_suite(options: &VerifyOptions) -> SuiteResult {
    let mut suite = SuiteResult::new("decomposition", DECOMPOSITION_TOLERANCE);
    for (i, d) in draws(options, 1) {
        let r = natural_effects(&d.outcome, &d.mediator, &d.contrast).map(|mut e| {
            e.log_te += options.perturb;
            e.decomposition_residual()
        });
        suite.record_result(i, r);
    }
    suite
}

/// Distance of every A-term of the contrast outside `[min(k,1), max(k,1)]`,
/// relative to the bracket's scale.
pub fn bracketing_error(draw: &Draw) -> Result<f64> {
    let (x, xs) = (draw.contrast.x, draw.contrast.x_star);
    let mut worst = 0.0f64;
    for (x1, x2) in [(x, xs), (xs, xs), (x, x), (xs, x)] {
        let inputs = ATermInputs::new(&draw.outcome, &draw.mediator, x1, x2, &draw.contrast.profile)?;
        let a = inputs.value();
        let (lo, hi) = (inputs.k.min(1.0), inputs.k.max(1.0));
        let outside = (lo - a).max(a - hi).max(0.0) / hi;
        worst = worst.max(outside);
    }
    Ok(worst)
}

pub fn bracketing_suite(options: &VerifyOptions) -> SuiteResult {
    let mut suite = SuiteResult::new("bracketing", BRACKETING_TOLERANCE);
    for (i, d) in draws(options, 1) {
        suite.record_result(i, bracketing_error(&d));
    }
    suite
}

/// Errors of the analytic Jacobian: the largest relative deviation from
/// central finite differences, and the largest violation of
/// `row5 = row1 + row2 = row3 + row4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobianCheck {
    pub finite_difference: f64,
    pub row_identity: f64,
}

pub fn jacobian_check(draw: &Draw, perturb: f64) -> Result<JacobianCheck> {
    let theta = draw.spec.theta(&draw.outcome, &draw.mediator);
    let mut jac = jacobian_log_effects(&draw.outcome, &draw.mediator, &draw.contrast)?;
    jac.row_mut(4).iter_mut().for_each(|v| *v += perturb);
    let mut fd_err = 0.0f64;
    for (r, &kind) in EffectKind::NATURAL.iter().enumerate() {
        let target = |t: &[f64]| -> Result<f64> {
            let (b, g) = draw.spec.params_from_theta(t)?;
            Ok(natural_effects(&b, &g, &draw.contrast)?.log(kind))
        };
        let numeric = finite_diff(target, &theta, StepPolicy::default())?;
        fd_err = fd_err.max(max_relative_error(jac.row(r), &numeric));
    }
    let mut row_err = 0.0f64;
    for j in 0..jac.cols() {
        let te = jac[(4, j)];
        row_err = row_err.max((te - jac[(0, j)] - jac[(1, j)]).abs());
        row_err = row_err.max((te - jac[(2, j)] - jac[(3, j)]).abs());
    }
    Ok(JacobianCheck { finite_difference: fd_err, row_identity: row_err })
}

pub fn jacobian_suites(options: &VerifyOptions) -> [SuiteResult; 2] {
    let mut fd = SuiteResult::new("jacobian finite differences", JACOBIAN_TOLERANCE);
    let mut rows = SuiteResult::new("jacobian row identities", JACOBIAN_ROW_TOLERANCE);
    for (i, d) in draws(options, 2) {
        match jacobian_check(&d, options.perturb) {
            Ok(c) => {
                fd.record(i, c.finite_difference);
                rows.record(i, c.row_identity);
            }
            Err(e) => {
                fd.record_result(i, Err(e.clone()));
                rows.record_result(i, Err(e));
            }
        }
    }
    [fd, rows]
}

/// Largest residual of the two diagonal A-term identities at
/// `x ∈ {0, 0.5, 1}` for a random model without covariates.
pub fn g_y_error(rng: &mut ChaCha8Rng, bound: f64, perturb: f64) -> Result<f64> {
    let mut c = || uniform(rng, bound);
    let outcome = OutcomeParams::simple(c(), c(), c(), c());
    let mediator = MediatorParams::simple(c(), c());
    let mut worst = 0.0f64;
    for x in [0.0, 0.5, 1.0] {
        let check = g_y_check(&outcome, &mediator, x)?;
        worst = worst.max(check.residual_g + perturb).max(check.residual_risk_ratio + perturb);
    }
    Ok(worst)
}

pub fn g_y_suite(options: &VerifyOptions) -> SuiteResult {
    let mut suite = SuiteResult::new("g_y identity", GY_TOLERANCE);
    let mut rng = suite_rng(options.seed, 3);
    for i in 0..options.count {
        let r = g_y_error(&mut rng, options.draws.coef_bound, options.perturb);
        suite.record_result(i, r);
    }
    suite
}

/// Runs every suite. Suites are evaluated concurrently; the report lists
/// them in a fixed order.
pub fn run(options: &VerifyOptions) -> VerifyReport {
    let (oracle, decomposition, bracketing, [fd, rows], g_y) = std::thread::scope(|s| {
        let oracle = s.spawn(|| oracle_suite(options));
        let decomposition = s.spawn(|| decomposition_suite(options));
        let bracketing = s.spawn(|| bracketing_suite(options));
        let jacobian = s.spawn(|| jacobian_suites(options));
        let g_y = g_y_suite(options);
        let join = |h: std::thread::ScopedJoinHandle<'_, SuiteResult>| h.join().expect("suite thread");
        (join(oracle), join(decomposition), join(bracketing), jacobian.join().expect("suite thread"), g_y)
    });
    VerifyReport {
        seed: options.seed,
        count: options.count,
        suites: vec![oracle, decomposition, bracketing, fd, rows, g_y],
    }
}
