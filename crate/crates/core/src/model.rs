//! Model structure: coefficient layouts, covariate profiles, linear
//! predictors and design matrices for the outcome and mediator regressions.
//!
//! The outcome model is
//!
//! ```text
//! logit P(Y=1 | x, w, z) = β0 + βx x + βz'z + βxz'xz + βw w + βxw xw + βwz'wz + βxwz'xwz
//! ```
//!
//! and the mediator model is
//!
//! ```text
//! logit P(W=1 | x, v) = γ0 + γx x + γv'v + γxv'xv
//! ```
//!
//! Coefficients are always stored in that order, one entry per position of
//! the full layout. Blocks a [`ModelSpec`] excludes are held at zero, so
//! they are inert in every formula and are dropped when the model is
//! fitted or differentiated.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{MediationError, Result};
use crate::{lit, Scalar};

/// Optional blocks of the outcome model. `β0` and `βx` are always present.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutcomeBlocks {
    pub w: bool,
    pub xw: bool,
    pub z: bool,
    pub xz: bool,
    pub wz: bool,
    pub xwz: bool,
}

impl Default for OutcomeBlocks {
    fn default() -> Self {
        Self { w: true, xw: true, z: true, xz: false, wz: false, xwz: false }
    }
}

impl OutcomeBlocks {
    /// Every block switched on.
    pub fn full() -> Self {
        Self { w: true, xw: true, z: true, xz: true, wz: true, xwz: true }
    }
}

/// Optional blocks of the mediator model. `γ0` and `γx` are always present.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MediatorBlocks {
    pub v: bool,
    pub xv: bool,
}

impl Default for MediatorBlocks {
    fn default() -> Self {
        Self { v: true, xv: false }
    }
}

impl MediatorBlocks {
    pub fn full() -> Self {
        Self { v: true, xv: true }
    }
}

/// One coefficient position of the outcome model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutcomeTerm {
    Intercept,
    X,
    Z(usize),
    XZ(usize),
    W,
    XW,
    WZ(usize),
    XWZ(usize),
}

impl OutcomeTerm {
    /// Position in the full layout for `p` outcome-side confounders.
    pub fn full_index(self, p: usize) -> usize {
        match self {
            Self::Intercept => 0,
            Self::X => 1,
            Self::Z(j) => 2 + j,
            Self::XZ(j) => 2 + p + j,
            Self::W => 2 + 2 * p,
            Self::XW => 3 + 2 * p,
            Self::WZ(j) => 4 + 2 * p + j,
            Self::XWZ(j) => 4 + 3 * p + j,
        }
    }

    /// Design-matrix entry of this term for one observation.
    pub fn value<T: Scalar>(self, x: T, w: bool, z: &[T]) -> T {
        let wv = if w { T::one() } else { T::zero() };
        match self {
            Self::Intercept => T::one(),
            Self::X => x,
            Self::Z(j) => z[j],
            Self::XZ(j) => x * z[j],
            Self::W => wv,
            Self::XW => x * wv,
            Self::WZ(j) => wv * z[j],
            Self::XWZ(j) => x * wv * z[j],
        }
    }

    pub fn name(self, z_names: &[String]) -> String {
        match self {
            Self::Intercept => "(Intercept)".to_owned(),
            Self::X => "x".to_owned(),
            Self::Z(j) => z_names[j].clone(),
            Self::XZ(j) => format!("x:{}", z_names[j]),
            Self::W => "w".to_owned(),
            Self::XW => "x:w".to_owned(),
            Self::WZ(j) => format!("w:{}", z_names[j]),
            Self::XWZ(j) => format!("x:w:{}", z_names[j]),
        }
    }
}

/// One coefficient position of the mediator model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MediatorTerm {
    Intercept,
    X,
    V(usize),
    XV(usize),
}

impl MediatorTerm {
    pub fn full_index(self, q: usize) -> usize {
        match self {
            Self::Intercept => 0,
            Self::X => 1,
            Self::V(j) => 2 + j,
            Self::XV(j) => 2 + q + j,
        }
    }

    pub fn value<T: Scalar>(self, x: T, v: &[T]) -> T {
        match self {
            Self::Intercept => T::one(),
            Self::X => x,
            Self::V(j) => v[j],
            Self::XV(j) => x * v[j],
        }
    }

    pub fn name(self, v_names: &[String]) -> String {
        match self {
            Self::Intercept => "(Intercept)".to_owned(),
            Self::X => "x".to_owned(),
            Self::V(j) => v_names[j].clone(),
            Self::XV(j) => format!("x:{}", v_names[j]),
        }
    }
}

/// Shape of the outcome coefficient vector: number of confounders and
/// which blocks are included.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutcomeLayout {
    pub p: usize,
    pub blocks: OutcomeBlocks,
}

impl OutcomeLayout {
    pub fn full_len(&self) -> usize {
        4 + 4 * self.p
    }

    pub fn includes(&self, term: OutcomeTerm) -> bool {
        let b = &self.blocks;
        match term {
            OutcomeTerm::Intercept | OutcomeTerm::X => true,
            OutcomeTerm::W => b.w,
            OutcomeTerm::XW => b.xw,
            OutcomeTerm::Z(_) => b.z,
            OutcomeTerm::XZ(_) => b.xz,
            OutcomeTerm::WZ(_) => b.wz,
            OutcomeTerm::XWZ(_) => b.xwz,
        }
    }

    /// Every position of the full layout, in storage order.
    pub fn all_terms(&self) -> Vec<OutcomeTerm> {
        let p = self.p;
        let mut terms = vec![OutcomeTerm::Intercept, OutcomeTerm::X];
        terms.extend((0..p).map(OutcomeTerm::Z));
        terms.extend((0..p).map(OutcomeTerm::XZ));
        terms.push(OutcomeTerm::W);
        terms.push(OutcomeTerm::XW);
        terms.extend((0..p).map(OutcomeTerm::WZ));
        terms.extend((0..p).map(OutcomeTerm::XWZ));
        terms
    }

    /// Included positions, in storage order. This is also the column order
    /// of the outcome design matrix.
    pub fn terms(&self) -> Vec<OutcomeTerm> {
        self.all_terms().into_iter().filter(|&t| self.includes(t)).collect()
    }

    /// Full-layout index of every included term.
    pub fn active_indices(&self) -> Vec<usize> {
        self.terms().into_iter().map(|t| t.full_index(self.p)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MediatorLayout {
    pub q: usize,
    pub blocks: MediatorBlocks,
}

impl MediatorLayout {
    pub fn full_len(&self) -> usize {
        2 + 2 * self.q
    }

    pub fn includes(&self, term: MediatorTerm) -> bool {
        match term {
            MediatorTerm::Intercept | MediatorTerm::X => true,
            MediatorTerm::V(_) => self.blocks.v,
            MediatorTerm::XV(_) => self.blocks.xv,
        }
    }

    pub fn all_terms(&self) -> Vec<MediatorTerm> {
        let q = self.q;
        let mut terms = vec![MediatorTerm::Intercept, MediatorTerm::X];
        terms.extend((0..q).map(MediatorTerm::V));
        terms.extend((0..q).map(MediatorTerm::XV));
        terms
    }

    pub fn terms(&self) -> Vec<MediatorTerm> {
        self.all_terms().into_iter().filter(|&t| self.includes(t)).collect()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        self.terms().into_iter().map(|t| t.full_index(self.q)).collect()
    }
}

/// Which regression a design matrix is built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Outcome,
    Mediator,
}

/// Structure of the two regressions: the confounders entering each model
/// and the optional blocks each includes.
///
/// `z_names` are the outcome-side confounders (exposure-outcome and
/// mediator-outcome), `v_names` the mediator-side (exposure-mediator)
/// confounders. A name may appear in both lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawModelSpec", into = "RawModelSpec")]
pub struct ModelSpec {
    z_names: Vec<String>,
    v_names: Vec<String>,
    outcome_blocks: OutcomeBlocks,
    mediator_blocks: MediatorBlocks,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelSpec {
    #[serde(default)]
    z: Vec<String>,
    #[serde(default)]
    v: Vec<String>,
    #[serde(default)]
    outcome_blocks: OutcomeBlocks,
    #[serde(default)]
    mediator_blocks: MediatorBlocks,
}

impl TryFrom<RawModelSpec> for ModelSpec {
    type Error = MediationError;

    fn try_from(raw: RawModelSpec) -> Result<Self> {
        ModelSpec::new(raw.z, raw.v, raw.outcome_blocks, raw.mediator_blocks)
    }
}

impl From<ModelSpec> for RawModelSpec {
    fn from(spec: ModelSpec) -> Self {
        Self {
            z: spec.z_names,
            v: spec.v_names,
            outcome_blocks: spec.outcome_blocks,
            mediator_blocks: spec.mediator_blocks,
        }
    }
}

fn check_unique(names: &[String], side: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(MediationError::Schema(format!(
                "confounder '{name}' listed twice on the {side} side"
            )));
        }
    }
    Ok(())
}

impl ModelSpec {
    pub fn new(
        z_names: Vec<String>,
        v_names: Vec<String>,
        outcome_blocks: OutcomeBlocks,
        mediator_blocks: MediatorBlocks,
    ) -> Result<Self> {
        check_unique(&z_names, "outcome")?;
        check_unique(&v_names, "mediator")?;
        let ob = &outcome_blocks;
        let nesting = [
            (ob.xwz && !(ob.xz && ob.wz && ob.z), "xwz requires xz, wz and z"),
            (ob.xz && !ob.z, "xz requires z"),
            (ob.wz && !ob.z, "wz requires z"),
            (mediator_blocks.xv && !mediator_blocks.v, "xv requires v"),
        ];
        if let Some((_, msg)) = nesting.iter().find(|(violated, _)| *violated) {
            return Err(MediationError::Schema(format!("block nesting violated: {msg}")));
        }
        Ok(Self { z_names, v_names, outcome_blocks, mediator_blocks })
    }

    /// No confounders; outcome `(1, x, w, xw)` and mediator `(1, x)`.
    pub fn without_covariates() -> Self {
        Self {
            z_names: Vec::new(),
            v_names: Vec::new(),
            outcome_blocks: OutcomeBlocks::default(),
            mediator_blocks: MediatorBlocks::default(),
        }
    }

    /// Every block on for the given confounders.
    pub fn saturated(z_names: Vec<String>, v_names: Vec<String>) -> Result<Self> {
        Self::new(z_names, v_names, OutcomeBlocks::full(), MediatorBlocks::full())
    }

    pub fn z_names(&self) -> &[String] {
        &self.z_names
    }

    pub fn v_names(&self) -> &[String] {
        &self.v_names
    }

    pub fn outcome_blocks(&self) -> OutcomeBlocks {
        self.outcome_blocks
    }

    pub fn mediator_blocks(&self) -> MediatorBlocks {
        self.mediator_blocks
    }

    pub fn p(&self) -> usize {
        self.z_names.len()
    }

    pub fn q(&self) -> usize {
        self.v_names.len()
    }

    pub fn outcome_layout(&self) -> OutcomeLayout {
        OutcomeLayout { p: self.p(), blocks: self.outcome_blocks }
    }

    pub fn mediator_layout(&self) -> MediatorLayout {
        MediatorLayout { q: self.q(), blocks: self.mediator_blocks }
    }

    /// Included outcome terms in design-column order.
    pub fn outcome_terms(&self) -> Vec<OutcomeTerm> {
        self.outcome_layout().terms()
    }

    pub fn mediator_terms(&self) -> Vec<MediatorTerm> {
        self.mediator_layout().terms()
    }

    pub fn outcome_column_names(&self) -> Vec<String> {
        self.outcome_terms().into_iter().map(|t| t.name(&self.z_names)).collect()
    }

    pub fn mediator_column_names(&self) -> Vec<String> {
        self.mediator_terms().into_iter().map(|t| t.name(&self.v_names)).collect()
    }

    /// Distinct confounder names, outcome side first.
    pub fn covariate_names(&self) -> Vec<String> {
        let mut names = self.z_names.clone();
        for v in &self.v_names {
            if !names.contains(v) {
                names.push(v.clone());
            }
        }
        names
    }

    /// Number of included outcome plus mediator coefficients, the length
    /// of the parameter vector θ = (β', γ')'.
    pub fn theta_len(&self) -> usize {
        self.outcome_terms().len() + self.mediator_terms().len()
    }

    /// Splits θ = (β', γ')' over the included terms into the two parameter
    /// containers.
    pub fn params_from_theta<T: Scalar>(
        &self,
        theta: &[T],
    ) -> Result<(OutcomeParams<T>, MediatorParams<T>)> {
        let nb = self.outcome_terms().len();
        if theta.len() != self.theta_len() {
            return Err(MediationError::Dimension(format!(
                "θ has {} entries, model has {}",
                theta.len(),
                self.theta_len()
            )));
        }
        Ok((
            OutcomeParams::from_active(self.outcome_layout(), &theta[..nb])?,
            MediatorParams::from_active(self.mediator_layout(), &theta[nb..])?,
        ))
    }

    pub fn theta<T: Scalar>(&self, outcome: &OutcomeParams<T>, mediator: &MediatorParams<T>) -> Vec<T> {
        let mut theta = outcome.active();
        theta.extend(mediator.active());
        theta
    }
}

/// Outcome-model coefficients in the full layout
/// `(β0, βx, βz, βxz, βw, βxw, βwz, βxwz)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeParams<T> {
    layout: OutcomeLayout,
    coef: Vec<T>,
}

impl<T: Scalar> OutcomeParams<T> {
    /// Takes a full-length coefficient vector. Entries of excluded blocks
    /// are replaced by zero.
    pub fn new(layout: OutcomeLayout, mut coef: Vec<T>) -> Result<Self> {
        if coef.len() != layout.full_len() {
            return Err(MediationError::Dimension(format!(
                "outcome coefficients: expected {} (full layout, p = {}), got {}",
                layout.full_len(),
                layout.p,
                coef.len()
            )));
        }
        for term in layout.all_terms() {
            if !layout.includes(term) {
                coef[term.full_index(layout.p)] = T::zero();
            }
        }
        if let Some(index) = coef.iter().position(|c| !c.is_finite()) {
            return Err(MediationError::NonFinite { context: "outcome coefficients", index });
        }
        Ok(Self { layout, coef })
    }

    /// Scatters the included coefficients (design-column order) into the
    /// full layout.
    pub fn from_active(layout: OutcomeLayout, active: &[T]) -> Result<Self> {
        let idx = layout.active_indices();
        if active.len() != idx.len() {
            return Err(MediationError::Dimension(format!(
                "outcome coefficients: expected {} included terms, got {}",
                idx.len(),
                active.len()
            )));
        }
        let mut coef = vec![T::zero(); layout.full_len()];
        for (&i, &c) in idx.iter().zip(active) {
            coef[i] = c;
        }
        Self::new(layout, coef)
    }

    pub fn zeros(layout: OutcomeLayout) -> Self {
        Self { layout, coef: vec![T::zero(); layout.full_len()] }
    }

    /// No-covariate model `β0 + βx x + βw w + βxw xw`.
    pub fn simple(beta0: T, beta_x: T, beta_w: T, beta_xw: T) -> Self {
        let layout = OutcomeLayout { p: 0, blocks: OutcomeBlocks::default() };
        Self { layout, coef: vec![beta0, beta_x, beta_w, beta_xw] }
    }

    pub fn layout(&self) -> OutcomeLayout {
        self.layout
    }

    pub fn p(&self) -> usize {
        self.layout.p
    }

    pub fn full(&self) -> &[T] {
        &self.coef
    }

    pub fn active(&self) -> Vec<T> {
        self.layout.active_indices().into_iter().map(|i| self.coef[i]).collect()
    }

    pub fn get(&self, term: OutcomeTerm) -> T {
        self.coef[term.full_index(self.layout.p)]
    }

    /// Returns a copy with `term` set to `value`; setting an excluded term
    /// is a no-op.
    pub fn with(&self, term: OutcomeTerm, value: T) -> Self {
        let mut out = self.clone();
        if self.layout.includes(term) {
            out.coef[term.full_index(self.layout.p)] = value;
        }
        out
    }

    pub fn beta0(&self) -> T {
        self.coef[0]
    }

    pub fn beta_x(&self) -> T {
        self.coef[1]
    }

    pub fn beta_w(&self) -> T {
        self.get(OutcomeTerm::W)
    }

    pub fn beta_xw(&self) -> T {
        self.get(OutcomeTerm::XW)
    }

    pub fn beta_z(&self) -> &[T] {
        let p = self.layout.p;
        &self.coef[2..2 + p]
    }

    pub fn beta_xz(&self) -> &[T] {
        let p = self.layout.p;
        &self.coef[2 + p..2 + 2 * p]
    }

    pub fn beta_wz(&self) -> &[T] {
        let p = self.layout.p;
        &self.coef[4 + 2 * p..4 + 3 * p]
    }

    pub fn beta_xwz(&self) -> &[T] {
        let p = self.layout.p;
        &self.coef[4 + 3 * p..4 + 4 * p]
    }

    fn check_z(&self, z: &[T]) -> Result<()> {
        if z.len() != self.layout.p {
            return Err(MediationError::Dimension(format!(
                "outcome confounders: expected {} values, got {}",
                self.layout.p,
                z.len()
            )));
        }
        Ok(())
    }

    /// Outcome linear predictor at `(x, w, z)`.
    pub fn linear_predictor(&self, x: T, w: bool, z: &[T]) -> Result<T> {
        self.check_z(z)?;
        let wv = if w { T::one() } else { T::zero() };
        let mut eta = self.beta0() + self.beta_x() * x + self.beta_w() * wv + self.beta_xw() * x * wv;
        for j in 0..self.layout.p {
            eta = eta
                + self.beta_z()[j] * z[j]
                + self.beta_xz()[j] * x * z[j]
                + self.beta_wz()[j] * wv * z[j]
                + self.beta_xwz()[j] * x * wv * z[j];
        }
        Ok(eta)
    }

    /// `βx + βxz'z`, the exposure slope of the outcome log-odds at `w = 0`.
    pub fn exposure_slope(&self, z: &[T]) -> Result<T> {
        self.check_z(z)?;
        Ok(self
            .beta_xz()
            .iter()
            .zip(z)
            .fold(self.beta_x(), |acc, (&b, &zj)| acc + b * zj))
    }

    /// `βw + βxw x + βwz'z + βxwz'xz`, the log odds ratio of the mediator in
    /// the outcome model at exposure `x`.
    pub fn mediator_log_or(&self, x: T, z: &[T]) -> Result<T> {
        self.check_z(z)?;
        let mut s = self.beta_w() + self.beta_xw() * x;
        for j in 0..self.layout.p {
            s = s + self.beta_wz()[j] * z[j] + self.beta_xwz()[j] * x * z[j];
        }
        Ok(s)
    }
}

/// Mediator-model coefficients `(γ0, γx, γv, γxv)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MediatorParams<T> {
    layout: MediatorLayout,
    coef: Vec<T>,
}

impl<T: Scalar> MediatorParams<T> {
    pub fn new(layout: MediatorLayout, mut coef: Vec<T>) -> Result<Self> {
        if coef.len() != layout.full_len() {
            return Err(MediationError::Dimension(format!(
                "mediator coefficients: expected {} (full layout, q = {}), got {}",
                layout.full_len(),
                layout.q,
                coef.len()
            )));
        }
        for term in layout.all_terms() {
            if !layout.includes(term) {
                coef[term.full_index(layout.q)] = T::zero();
            }
        }
        if let Some(index) = coef.iter().position(|c| !c.is_finite()) {
            return Err(MediationError::NonFinite { context: "mediator coefficients", index });
        }
        Ok(Self { layout, coef })
    }

    pub fn from_active(layout: MediatorLayout, active: &[T]) -> Result<Self> {
        let idx = layout.active_indices();
        if active.len() != idx.len() {
            return Err(MediationError::Dimension(format!(
                "mediator coefficients: expected {} included terms, got {}",
                idx.len(),
                active.len()
            )));
        }
        let mut coef = vec![T::zero(); layout.full_len()];
        for (&i, &c) in idx.iter().zip(active) {
            coef[i] = c;
        }
        Self::new(layout, coef)
    }

    pub fn zeros(layout: MediatorLayout) -> Self {
        Self { layout, coef: vec![T::zero(); layout.full_len()] }
    }

    /// No-covariate model `γ0 + γx x`.
    pub fn simple(gamma0: T, gamma_x: T) -> Self {
        let layout = MediatorLayout { q: 0, blocks: MediatorBlocks::default() };
        Self { layout, coef: vec![gamma0, gamma_x] }
    }

    pub fn layout(&self) -> MediatorLayout {
        self.layout
    }

    pub fn q(&self) -> usize {
        self.layout.q
    }

    pub fn full(&self) -> &[T] {
        &self.coef
    }

    pub fn active(&self) -> Vec<T> {
        self.layout.active_indices().into_iter().map(|i| self.coef[i]).collect()
    }

    pub fn get(&self, term: MediatorTerm) -> T {
        self.coef[term.full_index(self.layout.q)]
    }

    pub fn with(&self, term: MediatorTerm, value: T) -> Self {
        let mut out = self.clone();
        if self.layout.includes(term) {
            out.coef[term.full_index(self.layout.q)] = value;
        }
        out
    }

    pub fn gamma0(&self) -> T {
        self.coef[0]
    }

    pub fn gamma_x(&self) -> T {
        self.coef[1]
    }

    pub fn gamma_v(&self) -> &[T] {
        &self.coef[2..2 + self.layout.q]
    }

    pub fn gamma_xv(&self) -> &[T] {
        let q = self.layout.q;
        &self.coef[2 + q..2 + 2 * q]
    }

    pub fn linear_predictor(&self, x: T, v: &[T]) -> Result<T> {
        if v.len() != self.layout.q {
            return Err(MediationError::Dimension(format!(
                "mediator confounders: expected {} values, got {}",
                self.layout.q,
                v.len()
            )));
        }
        let mut eta = self.gamma0() + self.gamma_x() * x;
        for j in 0..self.layout.q {
            eta = eta + self.gamma_v()[j] * v[j] + self.gamma_xv()[j] * x * v[j];
        }
        Ok(eta)
    }
}

/// `exp(eta)`, refusing linear predictors whose exponential would saturate.
pub(crate) fn checked_exp<T: Scalar>(eta: T, context: &'static str) -> Result<T> {
    if !eta.is_finite() || eta.abs() > T::max_linear_predictor() {
        return Err(MediationError::Overflow { context, value: eta.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(eta.exp())
}

/// Exponentiated outcome linear predictor `e_y(x, w, z)`.
pub fn e_y<T: Scalar>(params: &OutcomeParams<T>, x: T, w: bool, z: &[T]) -> Result<T> {
    checked_exp(params.linear_predictor(x, w, z)?, "outcome")
}

/// Exponentiated mediator linear predictor `e_w(x, v)`.
pub fn e_w<T: Scalar>(params: &MediatorParams<T>, x: T, v: &[T]) -> Result<T> {
    checked_exp(params.linear_predictor(x, v)?, "mediator")
}

/// Values of the confounders at which conditional effects are evaluated,
/// aligned with `z_names` and `v_names`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CovariateProfile<T> {
    pub z: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> CovariateProfile<T> {
    pub fn new(z: Vec<T>, v: Vec<T>) -> Result<Self> {
        if let Some(index) = z.iter().chain(&v).position(|c| !c.is_finite()) {
            return Err(MediationError::NonFinite { context: "covariate profile", index });
        }
        Ok(Self { z, v })
    }

    pub fn empty() -> Self {
        Self { z: Vec::new(), v: Vec::new() }
    }

    /// Builds a profile from `name = value` pairs. A covariate present on
    /// both sides is given once and copied into both lists.
    pub fn from_named(spec: &ModelSpec, values: &[(String, T)]) -> Result<Self> {
        for (name, _) in values {
            if !spec.z_names().contains(name) && !spec.v_names().contains(name) {
                return Err(MediationError::Schema(format!(
                    "profile names '{name}', which is not a model confounder"
                )));
            }
        }
        let lookup = |name: &String| -> Result<T> {
            values
                .iter()
                .find(|(n, _)| n == name)
                .map(|&(_, v)| v)
                .ok_or_else(|| MediationError::Schema(format!("profile is missing a value for '{name}'")))
        };
        let z = spec.z_names().iter().map(lookup).collect::<Result<Vec<_>>>()?;
        let v = spec.v_names().iter().map(lookup).collect::<Result<Vec<_>>>()?;
        Self::new(z, v)
    }

    pub fn check(&self, spec: &ModelSpec) -> Result<()> {
        if self.z.len() != spec.p() || self.v.len() != spec.q() {
            return Err(MediationError::Dimension(format!(
                "profile has {} outcome-side and {} mediator-side values, model needs {} and {}",
                self.z.len(),
                self.v.len(),
                spec.p(),
                spec.q()
            )));
        }
        Ok(())
    }
}

/// Exposure change from the reference level `x_star` to `x` at a profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Contrast<T> {
    pub x: T,
    pub x_star: T,
    pub profile: CovariateProfile<T>,
}

impl<T: Scalar> Contrast<T> {
    pub fn new(x: T, x_star: T, profile: CovariateProfile<T>) -> Result<Self> {
        if !x.is_finite() || !x_star.is_finite() {
            return Err(MediationError::InvalidArgument("exposure levels must be finite".into()));
        }
        Ok(Self { x, x_star, profile })
    }

    /// `x = 1` versus `x* = 0`.
    pub fn binary(profile: CovariateProfile<T>) -> Self {
        Self { x: T::one(), x_star: T::zero(), profile }
    }

    pub fn delta(&self) -> T {
        self.x - self.x_star
    }

    pub fn is_degenerate(&self) -> bool {
        self.x == self.x_star
    }

    /// The same contrast with `x` and `x*` exchanged.
    pub fn reversed(&self) -> Self {
        Self { x: self.x_star, x_star: self.x, profile: self.profile.clone() }
    }
}

/// Observations of `(y, w, x)` plus named numeric covariate columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    y: Vec<bool>,
    w: Vec<bool>,
    x: Vec<T>,
    columns: Vec<(String, Vec<T>)>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(y: Vec<bool>, w: Vec<bool>, x: Vec<T>, columns: Vec<(String, Vec<T>)>) -> Result<Self> {
        let n = y.len();
        if w.len() != n || x.len() != n {
            return Err(MediationError::Dimension(format!(
                "columns differ in length: y {}, w {}, x {}",
                n,
                w.len(),
                x.len()
            )));
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(MediationError::NonFinite { context: "exposure column", index });
        }
        let mut seen = HashSet::new();
        for (name, col) in &columns {
            if !seen.insert(name.as_str()) {
                return Err(MediationError::Schema(format!("duplicate column '{name}'")));
            }
            if col.len() != n {
                return Err(MediationError::Dimension(format!(
                    "column '{name}' has {} rows, expected {n}",
                    col.len()
                )));
            }
            if let Some(index) = col.iter().position(|v| !v.is_finite()) {
                return Err(MediationError::Schema(format!(
                    "column '{name}' has a missing or non-finite value at row {index}"
                )));
            }
        }
        Ok(Self { y, w, x, columns })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    pub fn w(&self) -> &[bool] {
        &self.w
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn columns(&self) -> &[(String, Vec<T>)] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&[T]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_slice())
            .ok_or_else(|| MediationError::Schema(format!("missing column '{name}'")))
    }

    /// Rows selected by index (with repetition), e.g. for resampling.
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            y: rows.iter().map(|&i| self.y[i]).collect(),
            w: rows.iter().map(|&i| self.w[i]).collect(),
            x: rows.iter().map(|&i| self.x[i]).collect(),
            columns: self
                .columns
                .iter()
                .map(|(n, c)| (n.clone(), rows.iter().map(|&i| c[i]).collect()))
                .collect(),
        }
    }

    /// Checks that every confounder resolves and there are at least as many
    /// rows as outcome coefficients.
    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        for name in spec.covariate_names() {
            self.column(&name)?;
        }
        let k = spec.outcome_terms().len();
        if self.len() < k {
            return Err(MediationError::Schema(format!(
                "{} rows cannot identify {k} outcome coefficients",
                self.len()
            )));
        }
        Ok(())
    }

    /// Column means of the named covariates, as a profile.
    pub fn mean_profile(&self, spec: &ModelSpec) -> Result<CovariateProfile<T>> {
        let n = T::from_usize(self.len().max(1)).expect("row count representable");
        let mean = |name: &String| -> Result<T> {
            Ok(self.column(name)?.iter().fold(T::zero(), |a, &b| a + b) / n)
        };
        CovariateProfile::new(
            spec.z_names().iter().map(mean).collect::<Result<_>>()?,
            spec.v_names().iter().map(mean).collect::<Result<_>>()?,
        )
    }

    /// Median for columns with more than two distinct values, most frequent
    /// value otherwise (ties resolved to the smaller value).
    pub fn typical_profile(&self, spec: &ModelSpec) -> Result<CovariateProfile<T>> {
        let typical = |name: &String| -> Result<T> {
            let mut col = self.column(name)?.to_vec();
            if col.is_empty() {
                return Ok(T::zero());
            }
            col.sort_by(|a, b| a.partial_cmp(b).expect("finite column"));
            let mut distinct: Vec<(T, usize)> = Vec::new();
            for &v in &col {
                match distinct.last_mut() {
                    Some((last, count)) if *last == v => *count += 1,
                    _ => distinct.push((v, 1)),
                }
            }
            if distinct.len() <= 2 {
                let best = distinct.iter().fold(distinct[0], |b, &c| if c.1 > b.1 { c } else { b });
                return Ok(best.0);
            }
            let m = col.len();
            Ok(if m % 2 == 1 { col[m / 2] } else { (col[m / 2 - 1] + col[m / 2]) * lit(0.5) })
        };
        CovariateProfile::new(
            spec.z_names().iter().map(typical).collect::<Result<_>>()?,
            spec.v_names().iter().map(typical).collect::<Result<_>>()?,
        )
    }
}

/// Row-major design matrix with named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Design<T> {
    names: Vec<String>,
    rows: usize,
    data: Vec<T>,
}

impl<T: Scalar> Design<T> {
    pub fn new(names: Vec<String>, rows: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * names.len() {
            return Err(MediationError::Dimension(format!(
                "design data has {} entries, expected {rows} x {}",
                data.len(),
                names.len()
            )));
        }
        Ok(Self { names, rows, data })
    }

    pub fn from_rows(names: Vec<String>, rows: &[Vec<T>]) -> Result<Self> {
        let cols = names.len();
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(MediationError::Dimension(format!("design row {i} does not have {cols} entries")));
        }
        Self::new(names, rows.len(), rows.iter().flatten().copied().collect())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        let c = self.ncols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.row(i)[j]).collect()
    }
}

/// Design matrix and response for one of the two regressions. Columns
/// follow the coefficient layout of the corresponding parameter container.
pub fn build_design<T: Scalar>(
    dataset: &Dataset<T>,
    spec: &ModelSpec,
    target: Target,
) -> Result<(Design<T>, Vec<bool>)> {
    let n = dataset.len();
    match target {
        Target::Outcome => {
            let z_cols = spec
                .z_names()
                .iter()
                .map(|name| dataset.column(name))
                .collect::<Result<Vec<_>>>()?;
            let terms = spec.outcome_terms();
            let mut data = Vec::with_capacity(n * terms.len());
            let mut z = vec![T::zero(); spec.p()];
            for i in 0..n {
                for (zj, col) in z.iter_mut().zip(&z_cols) {
                    *zj = col[i];
                }
                data.extend(terms.iter().map(|t| t.value(dataset.x[i], dataset.w[i], &z)));
            }
            Ok((Design::new(spec.outcome_column_names(), n, data)?, dataset.y.clone()))
        }
        Target::Mediator => {
            let v_cols = spec
                .v_names()
                .iter()
                .map(|name| dataset.column(name))
                .collect::<Result<Vec<_>>>()?;
            let terms = spec.mediator_terms();
            let mut data = Vec::with_capacity(n * terms.len());
            let mut v = vec![T::zero(); spec.q()];
            for i in 0..n {
                for (vj, col) in v.iter_mut().zip(&v_cols) {
                    *vj = col[i];
                }
                data.extend(terms.iter().map(|t| t.value(dataset.x[i], &v)));
            }
            Ok((Design::new(spec.mediator_column_names(), n, data)?, dataset.w.clone()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn microcredit_spec() -> ModelSpec {
        ModelSpec::new(names(&["a", "u", "l"]), vec![], OutcomeBlocks::default(), MediatorBlocks::default())
            .unwrap()
    }

    fn table1_outcome() -> OutcomeParams<f64> {
        let layout = microcredit_spec().outcome_layout();
        OutcomeParams::from_active(layout, &[-1.542, 1.903, 0.008, -1.001, 0.185, 0.758, 0.137]).unwrap()
    }

    #[test]
    fn e_y_zero_coefficients_is_one() {
        let spec = ModelSpec::saturated(names(&["a", "b"]), names(&["c"])).unwrap();
        let beta = OutcomeParams::<f64>::zeros(spec.outcome_layout());
        for &(x, w) in &[(0.0, false), (1.0, true), (-3.5, true)] {
            assert_eq!(e_y(&beta, x, w, &[2.0, -7.0]).unwrap(), 1.0);
        }
        let gamma = MediatorParams::<f64>::zeros(spec.mediator_layout());
        assert_eq!(e_w(&gamma, 0.3, &[4.0]).unwrap(), 1.0);
    }

    #[test]
    fn e_y_table1_values() {
        let beta = table1_outcome();
        // η(1,1,(37,0,0)) = -1.542 + 1.903 + 0.758 + 0.137 + 0.296 = 1.552
        let v = e_y(&beta, 1.0, true, &[37.0, 0.0, 0.0]).unwrap();
        assert!((v - 1.552f64.exp()).abs() < 1e-12);
        assert!((v - 4.7209).abs() < 1e-4);
        let v = e_y(&beta, 0.0, false, &[37.0, 0.0, 0.0]).unwrap();
        assert!((v - 0.2876).abs() < 1e-4);
    }

    #[test]
    fn e_w_table1_values() {
        let gamma = MediatorParams::<f64>::simple(0.027, 0.262);
        assert!((e_w(&gamma, 0.0, &[]).unwrap() - 1.0274).abs() < 1e-4);
        assert!((e_w(&gamma, 1.0, &[]).unwrap() - 1.3351).abs() < 1e-4);
    }

    #[test]
    fn overflow_is_reported_with_predictor() {
        let beta = OutcomeParams::<f64>::simple(710.0, 0.0, 0.0, 0.0);
        match e_y(&beta, 0.0, false, &[]) {
            Err(MediationError::Overflow { value, .. }) => assert_eq!(value, 710.0),
            other => panic!("expected overflow, got {other:?}"),
        }
        assert!(e_y(&OutcomeParams::<f64>::simple(-709.5, 0.0, 0.0, 0.0), 0.0, false, &[]).is_err());
        assert!(e_y(&OutcomeParams::<f64>::simple(700.0, 0.0, 0.0, 0.0), 0.0, false, &[]).is_ok());
    }

    #[test]
    fn spec_rejects_duplicates_and_bad_nesting() {
        assert!(ModelSpec::new(names(&["a", "a"]), vec![], OutcomeBlocks::default(), MediatorBlocks::default())
            .is_err());
        let bad = OutcomeBlocks { xwz: true, xz: true, wz: false, ..OutcomeBlocks::default() };
        assert!(ModelSpec::new(names(&["a"]), vec![], bad, MediatorBlocks::default()).is_err());
        let bad = MediatorBlocks { v: false, xv: true };
        assert!(ModelSpec::new(vec![], names(&["a"]), OutcomeBlocks::default(), bad).is_err());
        // shared confounder is fine
        assert!(ModelSpec::saturated(names(&["a"]), names(&["a"])).is_ok());
    }

    #[test]
    fn design_without_covariates() {
        let spec = ModelSpec::without_covariates();
        assert_eq!(spec.outcome_column_names(), names(&["(Intercept)", "x", "w", "x:w"]));
        assert_eq!(spec.mediator_column_names(), names(&["(Intercept)", "x"]));
    }

    #[test]
    fn design_microcredit_columns() {
        assert_eq!(
            microcredit_spec().outcome_column_names(),
            names(&["(Intercept)", "x", "a", "u", "l", "w", "x:w"])
        );
    }

    #[test]
    fn design_interaction_products() {
        let spec = ModelSpec::saturated(names(&["z"]), vec![]).unwrap();
        let data = Dataset::new(
            vec![true, false],
            vec![true, false],
            vec![0.0, 1.0],
            vec![("z".into(), vec![2.0, 3.0])],
        )
        .unwrap();
        let (design, y) = build_design(&data, &spec, Target::Outcome).unwrap();
        assert_eq!(y, vec![true, false]);
        let col = |name: &str| design.column(design.names().iter().position(|n| n == name).unwrap());
        assert_eq!(col("x:w"), vec![0.0, 0.0]);
        assert_eq!(col("x:z"), vec![0.0, 3.0]);
        assert_eq!(col("w:z"), vec![2.0, 0.0]);
        assert_eq!(col("x:w:z"), vec![0.0, 0.0]);
    }

    #[test]
    fn design_missing_column_is_schema_error() {
        let data = Dataset::new(vec![true], vec![false], vec![1.0], vec![]).unwrap();
        let err = build_design(&data, &microcredit_spec(), Target::Outcome).unwrap_err();
        assert_eq!(err, MediationError::Schema("missing column 'a'".into()));
    }

    #[test]
    fn excluded_blocks_are_inert() {
        let layout = OutcomeLayout { p: 1, blocks: OutcomeBlocks::default() };
        let noisy = OutcomeParams::new(layout, vec![0.1, 0.2, 0.3, 9.0, 0.4, 0.5, -9.0, 7.0]).unwrap();
        let clean = OutcomeParams::new(layout, vec![0.1, 0.2, 0.3, 0.0, 0.4, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(noisy, clean);
        assert_eq!(e_y(&noisy, 1.0, true, &[2.0]).unwrap(), e_y(&clean, 1.0, true, &[2.0]).unwrap());
    }

    #[test]
    fn profile_materialises_shared_names() {
        let spec = ModelSpec::saturated(names(&["a", "s"]), names(&["s"])).unwrap();
        let profile = CovariateProfile::from_named(&spec, &[("a".into(), 1.0), ("s".into(), 2.0)]).unwrap();
        assert_eq!(profile.z, vec![1.0, 2.0]);
        assert_eq!(profile.v, vec![2.0]);
        assert!(CovariateProfile::from_named(&spec, &[("a".into(), 1.0)]).is_err());
    }

    #[test]
    fn typical_profile_uses_median_and_mode() {
        let spec = ModelSpec::new(names(&["age", "uni"]), vec![], OutcomeBlocks::default(), MediatorBlocks::default())
            .unwrap();
        let data = Dataset::new(
            vec![true; 5],
            vec![false; 5],
            vec![0.0; 5],
            vec![
                ("age".into(), vec![20.0, 37.0, 50.0, 30.0, 60.0]),
                ("uni".into(), vec![0.0, 0.0, 1.0, 0.0, 1.0]),
            ],
        )
        .unwrap();
        assert_eq!(data.typical_profile(&spec).unwrap().z, vec![37.0, 0.0]);
        assert_eq!(data.mean_profile(&spec).unwrap().z, vec![39.4, 0.4]);
    }

    #[test]
    fn generic_over_f32() {
        let beta = OutcomeParams::<f32>::simple(0.5, 1.0, 0.0, 0.0);
        let v = e_y(&beta, 1.0f32, false, &[]).unwrap();
        assert!((v - 1.5f32.exp()).abs() < 1e-6);
        assert_eq!(f32::max_linear_predictor(), 88.0);
        assert_eq!(f64::max_linear_predictor(), 709.0);
    }

    mod props {
        use super::*;
        use crate::linalg::dot;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn e_y_matches_design_row(
                coef in prop::collection::vec(-2.0f64..2.0, 12),
                z in prop::collection::vec(-2.0f64..2.0, 2),
                x in -2.0f64..2.0,
                w in any::<bool>(),
            ) {
                let spec = ModelSpec::saturated(vec!["a".into(), "b".into()], vec![]).unwrap();
                let beta = OutcomeParams::new(spec.outcome_layout(), coef).unwrap();
                let row: Vec<f64> = spec.outcome_terms().iter().map(|t| t.value(x, w, &z)).collect();
                let via_design = dot(&row, &beta.active()).exp();
                let direct = e_y(&beta, x, w, &z).unwrap();
                prop_assert!((via_design - direct).abs() <= 1e-12 * direct);
            }

            #[test]
            fn active_layout_round_trips(coef in prop::collection::vec(-2.0f64..2.0, 8)) {
                let layout = OutcomeLayout { p: 1, blocks: OutcomeBlocks { xz: true, ..OutcomeBlocks::default() } };
                let beta = OutcomeParams::new(layout, coef).unwrap();
                let back = OutcomeParams::from_active(layout, &beta.active()).unwrap();
                prop_assert_eq!(beta, back);
            }
        }
    }
}
