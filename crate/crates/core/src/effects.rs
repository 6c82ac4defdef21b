//! Exact natural, controlled and total effects on the odds-ratio scale.
//!
//! Every natural-effect contrast is a ratio of A-terms,
//!
//! ```text
//! A(x1, x2 | c) = (k p2 p3 + p4) / (p2 p3 + p4)
//! k  = exp(βw + βxw x1 + βwz'z + βxwz'x1 z)
//! p2 = e_w(x2, v),  p3 = 1 + e_y(x1, 0, z),  p4 = 1 + e_y(x1, 1, z)
//! ```
//!
//! where `x1` is the exposure level in the outcome model and `x2` the level
//! in the mediator model. With `s = βx + βxz'z` and `Δ = x - x*`:
//!
//! ```text
//! log PNDE = sΔ + log A(x, x*)  - log A(x*, x*)
//! log TNIE =      log A(x, x)   - log A(x, x*)
//! log TNDE = sΔ + log A(x, x)   - log A(x*, x)
//! log PNIE =      log A(x*, x)  - log A(x*, x*)
//! log TE   = sΔ + log A(x, x)   - log A(x*, x*)
//! ```
//!
//! None of this needs the outcome to be rare. [`approx_effects`] gives the
//! rare-outcome limits of the same quantities for comparison.

use crate::error::Result;
use crate::model::{checked_exp, e_w, e_y, Contrast, CovariateProfile, MediatorParams, OutcomeParams};
use crate::{EffectKind, EffectSet, Scalar};

/// The four factors of an A-term at one `(x1, x2, c)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ATermInputs<T> {
    /// Odds ratio of the mediator in the outcome model at `x1`.
    pub k: T,
    /// Mediator odds `e_w(x2, v)`.
    pub p2: T,
    /// `1 + e_y(x1, 0, z)`.
    pub p3: T,
    /// `1 + e_y(x1, 1, z)`.
    pub p4: T,
}

impl<T: Scalar> ATermInputs<T> {
    pub fn new(
        outcome: &OutcomeParams<T>,
        mediator: &MediatorParams<T>,
        x1: T,
        x2: T,
        profile: &CovariateProfile<T>,
    ) -> Result<Self> {
        let z = &profile.z;
        Ok(Self {
            k: checked_exp(outcome.mediator_log_or(x1, z)?, "mediator odds ratio")?,
            p2: e_w(mediator, x2, &profile.v)?,
            p3: T::one() + e_y(outcome, x1, false, z)?,
            p4: T::one() + e_y(outcome, x1, true, z)?,
        })
    }

    pub fn value(&self) -> T {
        let m = self.p2 * self.p3;
        (self.k * m + self.p4) / (m + self.p4)
    }
}

/// `A(x1, x2 | c)`.
pub fn a_term<T: Scalar>(
    outcome: &OutcomeParams<T>,
    mediator: &MediatorParams<T>,
    x1: T,
    x2: T,
    profile: &CovariateProfile<T>,
) -> Result<T> {
    Ok(ATermInputs::new(outcome, mediator, x1, x2, profile)?.value())
}

/// The four A-terms of a contrast.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ATerms<T> {
    /// A(x, x*)
    pub active_reference: T,
    /// A(x*, x*)
    pub reference_reference: T,
    /// A(x, x)
    pub active_active: T,
    /// A(x*, x)
    pub reference_active: T,
}

impl<T: Scalar> ATerms<T> {
    pub fn new(outcome: &OutcomeParams<T>, mediator: &MediatorParams<T>, contrast: &Contrast<T>) -> Result<Self> {
        let (x, xs, c) = (contrast.x, contrast.x_star, &contrast.profile);
        Ok(Self {
            active_reference: a_term(outcome, mediator, x, xs, c)?,
            reference_reference: a_term(outcome, mediator, xs, xs, c)?,
            active_active: a_term(outcome, mediator, x, x, c)?,
            reference_active: a_term(outcome, mediator, xs, x, c)?,
        })
    }
}

fn log_cde<T: Scalar>(outcome: &OutcomeParams<T>, contrast: &Contrast<T>) -> Result<[T; 2]> {
    let z = &contrast.profile.z;
    let slope = outcome.exposure_slope(z)?;
    // the mediator-interaction slope βxw + βxwz'z
    let extra = outcome
        .beta_xwz()
        .iter()
        .zip(z)
        .fold(outcome.beta_xw(), |acc, (&b, &zj)| acc + b * zj);
    let delta = contrast.delta();
    Ok([slope * delta, (slope + extra) * delta])
}

fn unit_effects<T: Scalar>(contrast: &Contrast<T>) -> EffectSet<T> {
    let zero = T::zero();
    EffectSet {
        log_pnde: zero,
        log_tnie: zero,
        log_tnde: zero,
        log_pnie: zero,
        log_te: zero,
        log_cde_at: [zero, zero],
        contrast: contrast.clone(),
    }
}

/// Exact conditional natural effects, total effect and `CDE(w)`.
pub fn natural_effects<T: Scalar>(
    outcome: &OutcomeParams<T>,
    mediator: &MediatorParams<T>,
    contrast: &Contrast<T>,
) -> Result<EffectSet<T>> {
    let direct = outcome.exposure_slope(&contrast.profile.z)? * contrast.delta();
    let a = ATerms::new(outcome, mediator, contrast)?;
    if contrast.is_degenerate() {
        return Ok(unit_effects(contrast));
    }
    let ln_ar = a.active_reference.ln();
    let ln_rr = a.reference_reference.ln();
    let ln_aa = a.active_active.ln();
    let ln_ra = a.reference_active.ln();
    Ok(EffectSet {
        log_pnde: direct + (ln_ar - ln_rr),
        log_tnie: ln_aa - ln_ar,
        log_tnde: direct + (ln_aa - ln_ra),
        log_pnie: ln_ra - ln_rr,
        log_te: direct + (ln_aa - ln_rr),
        log_cde_at: log_cde(outcome, contrast)?,
        contrast: contrast.clone(),
    })
}

/// Rare-outcome approximations of the four natural effects, obtained by
/// letting the relevant `e_y` terms go to zero in the exact expressions.
/// Confounders enter through the same conditional predictors as in
/// [`natural_effects`].
///
/// The approximate total effect is `PNDE x TNIE`;
/// [`EffectSet::log_te_via_total_direct`] gives `TNDE x PNIE`. `CDE(w)`
/// is exact.
pub fn approx_effects<T: Scalar>(
    outcome: &OutcomeParams<T>,
    mediator: &MediatorParams<T>,
    contrast: &Contrast<T>,
) -> Result<EffectSet<T>> {
    let (x, xs) = (contrast.x, contrast.x_star);
    let z = &contrast.profile.z;
    let v = &contrast.profile.v;
    let one = T::one();
    let direct = outcome.exposure_slope(z)? * contrast.delta();
    let k_x = checked_exp(outcome.mediator_log_or(x, z)?, "mediator odds ratio")?;
    let k_xs = checked_exp(outcome.mediator_log_or(xs, z)?, "mediator odds ratio")?;
    let ew_x = e_w(mediator, x, v)?;
    let ew_xs = e_w(mediator, xs, v)?;
    if contrast.is_degenerate() {
        return Ok(unit_effects(contrast));
    }

    let log_pnde = direct + ((one + k_x * ew_xs) / (one + k_xs * ew_xs)).ln();
    let log_tnde = direct + ((one + k_x * ew_x) / (one + k_xs * ew_x)).ln();
    let indirect = |k: T| (((one + ew_xs) * (one + ew_x * k)) / ((one + ew_x) * (one + ew_xs * k))).ln();
    let log_tnie = indirect(k_x);
    let log_pnie = indirect(k_xs);
    Ok(EffectSet {
        log_pnde,
        log_tnie,
        log_tnde,
        log_pnie,
        log_te: log_pnde + log_tnie,
        log_cde_at: log_cde(outcome, contrast)?,
        contrast: contrast.clone(),
    })
}

/// Pathway whose coefficients are all exactly zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathwayCase {
    /// `βx = βxw = 0` (and `βxz = βxwz = 0`): no direct exposure-outcome path.
    DirectNull,
    /// `βw = βxw = 0` (and `βwz = βxwz = 0`): the mediator does not affect the outcome.
    MediatorOutcomeNull,
    /// `γx = 0` (and `γxv = 0`): the exposure does not affect the mediator.
    ExposureMediatorNull,
}

/// Identities implied by one null pathway.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialCaseNote {
    pub case: PathwayCase,
    /// Effects whose log is exactly zero.
    pub null_effects: Vec<EffectKind>,
    /// Effects that coincide on the log scale.
    pub equal_effects: Vec<EffectKind>,
}

/// Diagnostic summary of which pathway-null identities hold for a
/// parameter configuration.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SpecialCaseReport {
    pub notes: Vec<SpecialCaseNote>,
    /// `x* = 0`: CDE(0), PNIE and PNDE are TE re-evaluated with the
    /// corresponding pathway switched off (see [`reference_zero_substitutions`]).
    pub reference_at_zero: bool,
}

impl SpecialCaseReport {
    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    pub fn applies(&self, case: PathwayCase) -> bool {
        self.notes.iter().any(|n| n.case == case)
    }
}

fn all_zero<T: Scalar>(values: &[T]) -> bool {
    values.iter().all(|v| v.is_zero())
}

pub fn special_case_report<T: Scalar>(
    outcome: &OutcomeParams<T>,
    mediator: &MediatorParams<T>,
    contrast: &Contrast<T>,
) -> SpecialCaseReport {
    use EffectKind::*;
    let mut notes = Vec::new();
    if outcome.beta_x().is_zero()
        && outcome.beta_xw().is_zero()
        && all_zero(outcome.beta_xz())
        && all_zero(outcome.beta_xwz())
    {
        notes.push(SpecialCaseNote {
            case: PathwayCase::DirectNull,
            null_effects: vec![Pnde, Tnde, Cde0],
            equal_effects: vec![Te, Tnie, Pnie],
        });
    }
    if outcome.beta_w().is_zero()
        && outcome.beta_xw().is_zero()
        && all_zero(outcome.beta_wz())
        && all_zero(outcome.beta_xwz())
    {
        notes.push(SpecialCaseNote {
            case: PathwayCase::MediatorOutcomeNull,
            null_effects: vec![Tnie, Pnie],
            equal_effects: vec![Te, Cde0, Pnde, Tnde],
        });
    }
    if mediator.gamma_x().is_zero() && all_zero(mediator.gamma_xv()) {
        notes.push(SpecialCaseNote {
            case: PathwayCase::ExposureMediatorNull,
            null_effects: vec![Tnie, Pnie],
            equal_effects: vec![Te, Pnde, Tnde],
        });
    }
    SpecialCaseReport { notes, reference_at_zero: contrast.x_star.is_zero() }
}

/// For `x* = 0`, the total effect re-evaluated with one pathway removed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceZeroSubstitutions<T> {
    /// log TE with the mediator-outcome path removed; equals log CDE(0).
    pub te_without_mediator_outcome: T,
    /// log TE with the direct path removed; equals log PNIE.
    pub te_without_direct: T,
    /// log TE with the exposure-mediator path removed; equals log PNDE.
    pub te_without_exposure_mediator: T,
}

pub fn reference_zero_substitutions<T: Scalar>(
    outcome: &OutcomeParams<T>,
    mediator: &MediatorParams<T>,
    contrast: &Contrast<T>,
) -> Result<ReferenceZeroSubstitutions<T>> {
    use crate::model::{MediatorTerm, OutcomeTerm};
    let p = outcome.p();
    let zero = T::zero();
    let strip = |terms: &[OutcomeTerm]| terms.iter().fold(outcome.clone(), |acc, &t| acc.with(t, zero));

    let mut mo = vec![OutcomeTerm::W, OutcomeTerm::XW];
    mo.extend((0..p).flat_map(|j| [OutcomeTerm::WZ(j), OutcomeTerm::XWZ(j)]));
    let mut direct = vec![OutcomeTerm::X, OutcomeTerm::XW];
    direct.extend((0..p).flat_map(|j| [OutcomeTerm::XZ(j), OutcomeTerm::XWZ(j)]));
    let no_xm = (0..mediator.q())
        .fold(mediator.with(MediatorTerm::X, zero), |acc, j| acc.with(MediatorTerm::XV(j), zero));

    Ok(ReferenceZeroSubstitutions {
        te_without_mediator_outcome: natural_effects(&strip(&mo), mediator, contrast)?.log_te,
        te_without_direct: natural_effects(&strip(&direct), mediator, contrast)?.log_te,
        te_without_exposure_mediator: natural_effects(outcome, &no_xm, contrast)?.log_te,
    })
}
