//! First-order delta-method inference for the effect estimators.
//!
//! The gradient of an A-term with respect to θ = (β', γ')' is assembled
//! from three scalar derivatives (with respect to β0, βw and γ0): every
//! other coefficient multiplies one of those three through the covariate
//! vector `d(a, b) = (1, a)[(1, b) ⊗ I2]`. The Jacobian `D` of the log
//! effects then follows from differences of `d/A` between A-terms, and
//!
//! ```text
//! V(log ê)  = D Σ D'
//! V(ê)      = E D Σ D' E,   E = diag(ê)
//! ```
//!
//! with Σ block diagonal in the two fitted models' covariance matrices.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::effects::{natural_effects, ATermInputs};
use crate::error::{MediationError, Result};
use crate::linalg::{dot, Matrix};
use crate::logit::FittedModel;
use crate::model::{
    Contrast, CovariateProfile, MediatorParams, MediatorTerm, ModelSpec, OutcomeParams, OutcomeTerm,
};
use crate::{lit, EffectKind, EffectSet, Scalar};

/// Partial derivatives of A(x1, x2 | c) with respect to β0, βw and γ0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyDerivatives<T> {
    pub d_beta0: T,
    pub d_beta_w: T,
    pub d_gamma0: T,
}

pub fn a_term_key_derivatives<T: Scalar>(inputs: &ATermInputs<T>) -> KeyDerivatives<T> {
    let ATermInputs { k, p2, p3, p4 } = *inputs;
    let one = T::one();
    let den = p2 * p3 + p4;
    let num = k * p2 * p3 + p4;
    let den2 = den * den;
    KeyDerivatives {
        d_beta0: ((k * p2 * (p3 - one) + p4 - one) * den - num * (p2 * (p3 - one) + p4 - one)) / den2,
        d_beta_w: ((k * p2 * p3 + p4 - one) * den - num * (p4 - one)) / den2,
        d_gamma0: ((k * p2 * p3) * den - num * (p2 * p3)) / den2,
    }
}

/// `(1, a)[(1, b') ⊗ I2] = (1, a, b1, a b1, ..., bm, a bm)`.
pub fn d_vector<T: Scalar>(a: T, b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(2 * (1 + b.len()));
    out.push(T::one());
    out.push(a);
    for &bj in b {
        out.push(bj);
        out.push(a * bj);
    }
    out
}

/// Outcome terms receiving, in order, the entries of `d(x, z)` for the
/// β0-driven block and the βw-driven block.
fn outcome_kronecker_terms(p: usize) -> [Vec<OutcomeTerm>; 2] {
    let mut base = vec![OutcomeTerm::Intercept, OutcomeTerm::X];
    let mut medi = vec![OutcomeTerm::W, OutcomeTerm::XW];
    for j in 0..p {
        base.extend([OutcomeTerm::Z(j), OutcomeTerm::XZ(j)]);
        medi.extend([OutcomeTerm::WZ(j), OutcomeTerm::XWZ(j)]);
    }
    [base, medi]
}

fn mediator_kronecker_terms(q: usize) -> Vec<MediatorTerm> {
    let mut terms = vec![MediatorTerm::Intercept, MediatorTerm::X];
    for j in 0..q {
        terms.extend([MediatorTerm::V(j), MediatorTerm::XV(j)]);
    }
    terms
}

/// Gradient of A(x1, x2 | c) with respect to the included coefficients
/// θ = (β', γ')', in layout order.
pub fn grad_a_term<T: Scalar>(
    outcome: &OutcomeParams<T>,
    mediator: &MediatorParams<T>,
    x1: T,
    x2: T,
    profile: &CovariateProfile<T>,
) -> Result<Vec<T>> {
    let (ol, ml) = (outcome.layout(), mediator.layout());
    if profile.z.len() != ol.p || profile.v.len() != ml.q {
        return Err(MediationError::Schema(format!(
            "profile arity ({}, {}) does not match parameter layouts ({}, {})",
            profile.z.len(),
            profile.v.len(),
            ol.p,
            ml.q
        )));
    }
    let keys = a_term_key_derivatives(&ATermInputs::new(outcome, mediator, x1, x2, profile)?);

    let mut beta_grad = vec![T::zero(); ol.full_len()];
    let dz = d_vector(x1, &profile.z);
    let [base, medi] = outcome_kronecker_terms(ol.p);
    for ((&d, b), m) in dz.iter().zip(base).zip(medi) {
        beta_grad[b.full_index(ol.p)] = keys.d_beta0 * d;
        beta_grad[m.full_index(ol.p)] = keys.d_beta_w * d;
    }
    let mut gamma_grad = vec![T::zero(); ml.full_len()];
    let dv = d_vector(x2, &profile.v);
    for (&d, t) in dv.iter().zip(mediator_kronecker_terms(ml.q)) {
        gamma_grad[t.full_index(ml.q)] = keys.d_gamma0 * d;
    }

    let mut grad: Vec<T> = ol.active_indices().into_iter().map(|i| beta_grad[i]).collect();
    grad.extend(ml.active_indices().into_iter().map(|i| gamma_grad[i]));
    Ok(grad)
}

fn linear_term_row<T: Scalar>(
    outcome: &OutcomeParams<T>,
    mediator: &MediatorParams<T>,
    terms: &[(OutcomeTerm, T)],
) -> Vec<T> {
    let ol = outcome.layout();
    let mut full = vec![T::zero(); ol.full_len()];
    for &(t, v) in terms {
        full[t.full_index(ol.p)] = v;
    }
    let mut row: Vec<T> = ol.active_indices().into_iter().map(|i| full[i]).collect();
    row.extend(std::iter::repeat_n(T::zero(), mediator.layout().active_indices().len()));
    row
}

/// Gradient of `(βx + βxz'z)(x - x*)`.
fn direct_row<T: Scalar>(outcome: &OutcomeParams<T>, mediator: &MediatorParams<T>, contrast: &Contrast<T>) -> Vec<T> {
    let delta = contrast.delta();
    let mut terms = vec![(OutcomeTerm::X, delta)];
    terms.extend(contrast.profile.z.iter().enumerate().map(|(j, &z)| (OutcomeTerm::XZ(j), z * delta)));
    linear_term_row(outcome, mediator, &terms)
}

/// Gradient of log CDE(w) = (βx + βxw w + βxz'z + βxwz'wz)(x - x*).
pub fn cde_gradient<T: Scalar>(
    outcome: &OutcomeParams<T>,
    mediator: &MediatorParams<T>,
    contrast: &Contrast<T>,
    w: bool,
) -> Vec<T> {
    let delta = contrast.delta();
    let wv = if w { T::one() } else { T::zero() };
    let mut terms = vec![(OutcomeTerm::X, delta), (OutcomeTerm::XW, wv * delta)];
    for (j, &z) in contrast.profile.z.iter().enumerate() {
        terms.push((OutcomeTerm::XZ(j), z * delta));
        terms.push((OutcomeTerm::XWZ(j), wv * z * delta));
    }
    linear_term_row(outcome, mediator, &terms)
}

fn scaled_diff<T: Scalar>(a: &[T], a_val: T, b: &[T], b_val: T) -> Vec<T> {
    a.iter().zip(b).map(|(&ga, &gb)| ga / a_val - gb / b_val).collect()
}

fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

/// `D = ∂ log e / ∂θ'`, rows ordered (PNDE, TNIE, TNDE, PNIE, TE).
pub fn jacobian_log_effects<T: Scalar>(
    outcome: &OutcomeParams<T>,
    mediator: &MediatorParams<T>,
    contrast: &Contrast<T>,
) -> Result<Matrix<T>> {
    let (x, xs, c) = (contrast.x, contrast.x_star, &contrast.profile);
    let grad_and_value = |x1: T, x2: T| -> Result<(Vec<T>, T)> {
        Ok((
            grad_a_term(outcome, mediator, x1, x2, c)?,
            ATermInputs::new(outcome, mediator, x1, x2, c)?.value(),
        ))
    };
    let (g_ar, a_ar) = grad_and_value(x, xs)?;
    let (g_rr, a_rr) = grad_and_value(xs, xs)?;
    let (g_aa, a_aa) = grad_and_value(x, x)?;
    let (g_ra, a_ra) = grad_and_value(xs, x)?;
    let dim = g_ar.len();
    if contrast.is_degenerate() {
        return Ok(Matrix::zeros(5, dim));
    }

    let d1 = direct_row(outcome, mediator, contrast);
    let d2 = scaled_diff(&g_ar, a_ar, &g_rr, a_rr);
    let d3 = scaled_diff(&g_aa, a_aa, &g_ar, a_ar);
    let d4 = scaled_diff(&g_aa, a_aa, &g_ra, a_ra);
    let d5 = scaled_diff(&g_ra, a_ra, &g_rr, a_rr);
    let d6 = scaled_diff(&g_aa, a_aa, &g_rr, a_rr);
    let rows = [add(&d1, &d2), d3, add(&d1, &d4), d5, add(&d1, &d6)];
    Ok(Matrix::from_rows(&rows).expect("equal-length Jacobian rows"))
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Two-sided Wald p-value for `estimate / se` against a standard normal.
pub fn two_sided_p(estimate: f64, se: f64) -> f64 {
    if se == 0.0 {
        return if estimate == 0.0 { 1.0 } else { 0.0 };
    }
    let t = (estimate / se).abs();
    statrs::function::erf::erfc(t / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Inference for one effect; interval and test are built on the log scale.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectInference<T> {
    pub kind: EffectKind,
    /// Odds-ratio point estimate.
    pub estimate: T,
    pub log_estimate: T,
    pub se_log: T,
    /// Standard error of the odds-ratio estimator, `estimate * se_log`.
    pub se: T,
    pub ci_lower: T,
    pub ci_upper: T,
    pub p_value: T,
}

impl<T: Scalar> EffectInference<T> {
    fn new(kind: EffectKind, log_estimate: T, var_log: T, z: T) -> Result<Self> {
        if var_log < T::zero() || !var_log.is_finite() {
            return Err(MediationError::NegativeVariance {
                effect: kind.label().to_owned(),
                value: var_log.to_f64().unwrap_or(f64::NAN),
            });
        }
        let se_log = var_log.sqrt();
        let estimate = log_estimate.exp();
        Ok(Self {
            kind,
            estimate,
            log_estimate,
            se_log,
            se: estimate * se_log,
            ci_lower: (log_estimate - z * se_log).exp(),
            ci_upper: (log_estimate + z * se_log).exp(),
            p_value: lit(two_sided_p(
                log_estimate.to_f64().unwrap_or(f64::NAN),
                se_log.to_f64().unwrap_or(f64::NAN),
            )),
        })
    }

    /// Whether the interval excludes an odds ratio of 1.
    pub fn excludes_null(&self) -> bool {
        self.ci_lower > T::one() || self.ci_upper < T::one()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InferenceResult<T> {
    pub level: f64,
    pub effects: EffectSet<T>,
    /// PNDE, TNIE, TNDE, PNIE, TE.
    pub natural: Vec<EffectInference<T>>,
    /// CDE(0), CDE(1).
    pub controlled: Vec<EffectInference<T>>,
    /// `D Σ D'`.
    pub log_covariance: Matrix<T>,
    /// `E D Σ D' E`.
    pub covariance: Matrix<T>,
    pub jacobian: Matrix<T>,
}

impl<T: Scalar> InferenceResult<T> {
    pub fn get(&self, kind: EffectKind) -> &EffectInference<T> {
        self.natural
            .iter()
            .chain(&self.controlled)
            .find(|e| e.kind == kind)
            .expect("all effect kinds are reported")
    }
}

fn check_dims<T: Scalar>(m: &Matrix<T>, n: usize, what: &str) -> Result<()> {
    if m.rows() != n || m.cols() != n {
        return Err(MediationError::Dimension(format!(
            "{what} covariance is {}x{}, expected {n}x{n}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Delta-method inference from point estimates and the covariance blocks
/// of the included outcome (`sigma_beta`) and mediator (`sigma_gamma`)
/// coefficients.
pub fn infer_with<T: Scalar>(
    outcome: &OutcomeParams<T>,
    mediator: &MediatorParams<T>,
    sigma_beta: &Matrix<T>,
    sigma_gamma: &Matrix<T>,
    contrast: &Contrast<T>,
    level: f64,
) -> Result<InferenceResult<T>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(MediationError::InvalidArgument(format!("confidence level {level} is not in (0, 1)")));
    }
    check_dims(sigma_beta, outcome.layout().active_indices().len(), "outcome")?;
    check_dims(sigma_gamma, mediator.layout().active_indices().len(), "mediator")?;

    let effects = natural_effects(outcome, mediator, contrast)?;
    let jacobian = jacobian_log_effects(outcome, mediator, contrast)?;
    let sigma = Matrix::block_diag(sigma_beta, sigma_gamma);
    let mut log_covariance = jacobian.sandwich(&sigma);
    log_covariance.symmetrize();
    let e = Matrix::diagonal(&effects.log_vector().map(|l| l.exp()));
    let mut covariance = e.sandwich(&log_covariance);
    covariance.symmetrize();

    let z: T = lit(normal_quantile(0.5 + level / 2.0));
    let natural = EffectKind::NATURAL
        .iter()
        .enumerate()
        .map(|(i, &kind)| EffectInference::new(kind, effects.log(kind), log_covariance[(i, i)], z))
        .collect::<Result<Vec<_>>>()?;
    let controlled = [(EffectKind::Cde0, false), (EffectKind::Cde1, true)]
        .iter()
        .map(|&(kind, w)| {
            let g = cde_gradient(outcome, mediator, contrast, w);
            let var = dot(&sigma.matvec(&g), &g);
            EffectInference::new(kind, effects.log(kind), var, z)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(InferenceResult { level, effects, natural, controlled, log_covariance, covariance, jacobian })
}

/// Delta-method inference from two fitted models whose coefficients are
/// laid out according to `spec`.
pub fn infer<T: Scalar>(
    spec: &ModelSpec,
    fit_y: &FittedModel<T>,
    fit_w: &FittedModel<T>,
    contrast: &Contrast<T>,
    level: f64,
) -> Result<InferenceResult<T>> {
    if !fit_y.converged || !fit_w.converged {
        return Err(MediationError::InvalidArgument("inference requires converged fits".into()));
    }
    contrast.profile.check(spec)?;
    let outcome = OutcomeParams::from_active(spec.outcome_layout(), &fit_y.coefficients)?;
    let mediator = MediatorParams::from_active(spec.mediator_layout(), &fit_w.coefficients)?;
    infer_with(&outcome, &mediator, &fit_y.vcov, &fit_w.vcov, contrast, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::a_term;
    use crate::model::{MediatorBlocks, ModelSpec, OutcomeBlocks};
    use crate::oracle::finite_diff::{finite_diff, StepPolicy};

    fn table1() -> (OutcomeParams<f64>, MediatorParams<f64>, CovariateProfile<f64>) {
        let spec = ModelSpec::new(
            vec!["a".into(), "u".into(), "l".into()],
            vec![],
            OutcomeBlocks::default(),
            MediatorBlocks::default(),
        )
        .unwrap();
        let beta = OutcomeParams::from_active(
            spec.outcome_layout(),
            &[-1.542, 1.903, 0.008, -1.001, 0.185, 0.758, 0.137],
        )
        .unwrap();
        let gamma = MediatorParams::from_active(spec.mediator_layout(), &[0.027, 0.262]).unwrap();
        (beta, gamma, CovariateProfile::new(vec![37.0, 0.0, 0.0], vec![]).unwrap())
    }

    #[test]
    fn key_derivatives_with_unit_k() {
        let inputs = ATermInputs { k: 1.0f64, p2: 0.7, p3: 2.5, p4: 1.8 };
        let d = a_term_key_derivatives(&inputs);
        assert_eq!(d.d_gamma0, 0.0);
        let m = 0.7 * 2.5;
        assert!((d.d_beta_w - m / (m + 1.8)).abs() < 1e-15);
    }

    #[test]
    fn key_derivatives_match_finite_differences() {
        let (beta, gamma, c) = table1();
        let inputs = ATermInputs::new(&beta, &gamma, 1.0, 0.0, &c).unwrap();
        let keys = a_term_key_derivatives(&inputs);
        let h = 1e-6;
        let bump_b = |t: OutcomeTerm| {
            let f = |s: f64| a_term(&beta.with(t, beta.get(t) + s), &gamma, 1.0, 0.0, &c).unwrap();
            (f(h) - f(-h)) / (2.0 * h)
        };
        let fd_g0 = {
            let f = |s: f64| {
                a_term(&beta, &gamma.with(MediatorTerm::Intercept, 0.027 + s), 1.0, 0.0, &c).unwrap()
            };
            (f(h) - f(-h)) / (2.0 * h)
        };
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(keys.d_beta0, bump_b(OutcomeTerm::Intercept)) < 1e-6);
        assert!(rel(keys.d_beta_w, bump_b(OutcomeTerm::W)) < 1e-6);
        assert!(rel(keys.d_gamma0, fd_g0) < 1e-6);
    }

    #[test]
    fn degenerate_mediator_limit() {
        let inputs = ATermInputs { k: 2.4f64, p2: 1e-300, p3: 1.6, p4: 3.1 };
        assert!(a_term_key_derivatives(&inputs).d_gamma0.abs() < 1e-290);
        assert!((inputs.value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn d_vector_examples() {
        assert_eq!(d_vector(0.0, &[0.0]), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(d_vector(1.0, &[37.0, 0.0, 0.0]), vec![1.0, 1.0, 37.0, 37.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(d_vector(2.0, &[3.0]), vec![1.0, 2.0, 3.0, 6.0]);
    }

    #[test]
    fn gradient_without_covariates_is_scalar_assembly() {
        let beta = OutcomeParams::<f64>::simple(-0.3, 0.9, 0.5, -0.2);
        let gamma = MediatorParams::<f64>::simple(0.4, 0.8);
        let (x1, x2) = (0.7, -0.4);
        let g = grad_a_term(&beta, &gamma, x1, x2, &CovariateProfile::empty()).unwrap();
        let k = a_term_key_derivatives(
            &ATermInputs::new(&beta, &gamma, x1, x2, &CovariateProfile::empty()).unwrap(),
        );
        assert_eq!(g.len(), 6);
        assert_eq!(
            g,
            vec![k.d_beta0, k.d_beta0 * x1, k.d_beta_w, k.d_beta_w * x1, k.d_gamma0, k.d_gamma0 * x2]
        );
    }

    #[test]
    fn gradient_nonzero_at_zero_mediator_coefficients() {
        let beta = OutcomeParams::<f64>::simple(-0.3, 0.9, 0.0, 0.0);
        let gamma = MediatorParams::<f64>::simple(0.4, 0.8);
        let g = grad_a_term(&beta, &gamma, 1.0, 0.0, &CovariateProfile::empty()).unwrap();
        assert!(g[2].abs() > 0.1);
        let fd = finite_diff(
            |t: &[f64]| {
                let b = OutcomeParams::<f64>::simple(t[0], t[1], t[2], t[3]);
                let m = MediatorParams::<f64>::simple(t[4], t[5]);
                a_term(&b, &m, 1.0, 0.0, &CovariateProfile::empty())
            },
            &[-0.3, 0.9, 0.0, 0.0, 0.4, 0.8],
            StepPolicy::default(),
        )
        .unwrap();
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn multi_confounder_gradient_uses_layout_order() {
        let spec = ModelSpec::saturated(vec!["a".into(), "b".into()], vec!["c".into(), "d".into()]).unwrap();
        let theta: Vec<f64> = (0..spec.theta_len()).map(|i| 0.1 * ((i as f64) * 0.7).sin()).collect();
        let (beta, gamma) = spec.params_from_theta(&theta).unwrap();
        let c = CovariateProfile::new(vec![0.5, -1.2], vec![0.3, 0.9]).unwrap();
        let g = grad_a_term(&beta, &gamma, 0.8, -0.6, &c).unwrap();
        let fd = finite_diff(
            |t: &[f64]| {
                let (b, m) = spec.params_from_theta(t)?;
                a_term(&b, &m, 0.8, -0.6, &c)
            },
            &theta,
            StepPolicy::default(),
        )
        .unwrap();
        for (i, (a, b)) in g.iter().zip(&fd).enumerate() {
            assert!((a - b).abs() / b.abs().max(1.0) < 1e-8, "θ[{i}]: {a} vs {b}");
        }
    }

    #[test]
    fn jacobian_zero_for_degenerate_contrast() {
        let (beta, gamma, c) = table1();
        let contrast = Contrast::new(0.5, 0.5, c).unwrap();
        let d = jacobian_log_effects(&beta, &gamma, &contrast).unwrap();
        assert!(d.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(d.rows(), 5);
        assert_eq!(d.cols(), 9);
    }

    #[test]
    fn jacobian_indirect_rows_vanish_without_mediator_block() {
        let blocks = OutcomeBlocks { w: false, xw: false, ..OutcomeBlocks::default() };
        let spec = ModelSpec::new(vec!["a".into()], vec![], blocks, MediatorBlocks::default()).unwrap();
        let beta = OutcomeParams::from_active(spec.outcome_layout(), &[-0.5, 1.1, 0.3]).unwrap();
        let gamma = MediatorParams::from_active(spec.mediator_layout(), &[0.2, 0.7]).unwrap();
        let contrast = Contrast::new(1.0, 0.0, CovariateProfile::new(vec![0.4], vec![]).unwrap()).unwrap();
        let d = jacobian_log_effects(&beta, &gamma, &contrast).unwrap();
        assert!(d.row(1).iter().all(|&v| v == 0.0));
        assert!(d.row(3).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_covariance_collapses_intervals() {
        let (beta, gamma, c) = table1();
        let contrast = Contrast::binary(c);
        let r = infer_with(&beta, &gamma, &Matrix::zeros(7, 7), &Matrix::zeros(2, 2), &contrast, 0.95).unwrap();
        for e in r.natural.iter().chain(&r.controlled) {
            assert_eq!(e.se, 0.0);
            assert_eq!(e.ci_lower, e.estimate);
            assert_eq!(e.ci_upper, e.estimate);
        }
    }

    #[test]
    fn dimension_and_level_errors() {
        let (beta, gamma, c) = table1();
        let contrast = Contrast::binary(c);
        assert!(matches!(
            infer_with(&beta, &gamma, &Matrix::zeros(6, 6), &Matrix::zeros(2, 2), &contrast, 0.95),
            Err(MediationError::Dimension(_))
        ));
        assert!(infer_with(&beta, &gamma, &Matrix::zeros(7, 7), &Matrix::zeros(2, 2), &contrast, 1.0).is_err());
    }

    #[test]
    fn negative_variance_is_an_error() {
        let beta = OutcomeParams::<f64>::simple(-0.3, 0.9, 0.5, -0.2);
        let gamma = MediatorParams::<f64>::simple(0.4, 0.8);
        let mut sb = Matrix::identity(4);
        sb[(1, 1)] = -1.0;
        let r = infer_with(&beta, &gamma, &sb, &Matrix::identity(2), &Contrast::binary(CovariateProfile::empty()), 0.95);
        assert!(matches!(r, Err(MediationError::NegativeVariance { .. })), "{r:?}");
    }

    #[test]
    fn wald_interval_test_duality() {
        let beta = OutcomeParams::<f64>::simple(-0.3, 0.9, 0.5, -0.2);
        let gamma = MediatorParams::<f64>::simple(0.4, 0.8);
        let sb = Matrix::diagonal(&[0.04, 0.05, 0.03, 0.06]);
        let sg = Matrix::diagonal(&[0.02, 0.03]);
        for level in [0.8, 0.9, 0.95, 0.99] {
            let r = infer_with(&beta, &gamma, &sb, &sg, &Contrast::binary(CovariateProfile::empty()), level).unwrap();
            for e in r.natural.iter().chain(&r.controlled) {
                assert!(e.ci_lower > 0.0 && e.ci_lower < e.ci_upper);
                assert!((0.0..=1.0).contains(&e.p_value));
                assert_eq!(e.excludes_null(), e.p_value < 1.0 - level, "{} at {level}", e.kind);
            }
            assert!(r.log_covariance.max_asymmetry() < 1e-12);
        }
    }

    #[test]
    fn quantile_and_p_value() {
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-9);
        let p = two_sided_p(1.959963984540054, 1.0);
        assert!((p - 0.05).abs() < 1e-10, "{p:e}");
        assert_eq!(two_sided_p(0.0, 0.0), 1.0);
    }
}
