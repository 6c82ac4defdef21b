//! Maximum-likelihood logistic regression by Newton-Raphson (equivalently
//! iteratively reweighted least squares) with step halving.
//!
//! For the canonical logit link the observed and expected information
//! coincide, `X' diag(p(1-p)) X`, so the returned variance-covariance
//! matrix is the inverse of either.

use crate::error::{MediationError, Result};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::model::{build_design, Dataset, Design, ModelSpec, Target};
use crate::{lit, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions<T> {
    pub max_iter: usize,
    /// Convergence requires `max |X'(y - p)|` below this.
    pub score_tol: T,
    /// ... and the relative change of the log-likelihood below this.
    pub rel_loglik_tol: T,
    pub max_halvings: usize,
    /// Coefficient magnitude beyond which a still-increasing likelihood is
    /// reported as separation.
    pub separation_bound: T,
    /// Cholesky pivot threshold relative to the diagonal, for rank checks.
    pub rank_tol: T,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 100,
            score_tol: lit(1e-8),
            rel_loglik_tol: lit(1e-10),
            max_halvings: 10,
            separation_bound: lit(15.0),
            rank_tol: lit(1e-10),
        }
    }
}

/// State after one Newton iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord<T> {
    pub log_likelihood: T,
    pub max_abs_score: T,
    pub halvings: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FittedModel<T> {
    pub names: Vec<String>,
    pub coefficients: Vec<T>,
    /// Inverse information matrix at the estimate.
    pub vcov: Matrix<T>,
    pub log_likelihood: T,
    pub iterations: usize,
    pub converged: bool,
    pub n: usize,
    pub trace: Vec<IterationRecord<T>>,
}

/// Wald summary of one coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSummary<T> {
    pub name: String,
    pub estimate: T,
    pub std_error: T,
    pub ci_lower: T,
    pub ci_upper: T,
    pub p_value: T,
}

impl<T: Scalar> FittedModel<T> {
    pub fn std_errors(&self) -> Vec<T> {
        self.vcov.diag().into_iter().map(|v| v.sqrt()).collect()
    }

    /// Estimates with Wald standard errors, confidence intervals at `level`
    /// and two-sided p-values.
    pub fn summary(&self, level: f64) -> Vec<CoefficientSummary<T>> {
        let z: T = lit(crate::delta::normal_quantile(0.5 + level / 2.0));
        self.names
            .iter()
            .zip(&self.coefficients)
            .zip(self.std_errors())
            .map(|((name, &estimate), se)| CoefficientSummary {
                name: name.clone(),
                estimate,
                std_error: se,
                ci_lower: estimate - z * se,
                ci_upper: estimate + z * se,
                p_value: lit(crate::delta::two_sided_p(
                    estimate.to_f64().unwrap_or(f64::NAN),
                    se.to_f64().unwrap_or(f64::NAN),
                )),
            })
            .collect()
    }
}

fn logistic<T: Scalar>(eta: T) -> T {
    if eta >= T::zero() {
        T::one() / (T::one() + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (T::one() + e)
    }
}

/// `log(1 + exp(eta))` without overflow.
fn softplus<T: Scalar>(eta: T) -> T {
    if eta > T::zero() {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

fn response_value<T: Scalar>(y: bool) -> T {
    if y {
        T::one()
    } else {
        T::zero()
    }
}

fn log_likelihood<T: Scalar>(design: &Design<T>, y: &[bool], beta: &[T]) -> T {
    (0..design.nrows()).fold(T::zero(), |acc, i| {
        let eta = dot(design.row(i), beta);
        acc + response_value::<T>(y[i]) * eta - softplus(eta)
    })
}

/// Score `X'(y - p)` and information `X' W X` at `beta`.
fn score_and_information<T: Scalar>(design: &Design<T>, y: &[bool], beta: &[T]) -> (Vec<T>, Matrix<T>) {
    let k = design.ncols();
    let mut score = vec![T::zero(); k];
    let mut info = Matrix::zeros(k, k);
    for i in 0..design.nrows() {
        let row = design.row(i);
        let p = logistic(dot(row, beta));
        let resid = response_value::<T>(y[i]) - p;
        let weight = p * (T::one() - p);
        for a in 0..k {
            score[a] = score[a] + row[a] * resid;
            let wa = weight * row[a];
            for b in 0..=a {
                info[(a, b)] = info[(a, b)] + wa * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            info[(b, a)] = info[(a, b)];
        }
    }
    (score, info)
}

fn max_abs<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// Names the columns that column `j` is a combination of, by regressing it
/// on the preceding columns.
fn collinear_partners<T: Scalar>(design: &Design<T>, gram: &Matrix<T>, j: usize, rank_tol: T) -> Vec<String> {
    if j == 0 {
        return Vec::new();
    }
    let mut lead = Matrix::zeros(j, j);
    for a in 0..j {
        for b in 0..j {
            lead[(a, b)] = gram[(a, b)];
        }
    }
    let Ok(chol) = Cholesky::new(&lead, rank_tol) else {
        return design.names()[..j].to_vec();
    };
    let rhs: Vec<T> = (0..j).map(|a| gram[(a, j)]).collect();
    let coef = chol.solve(&rhs);
    let cutoff: T = lit(1e-8);
    coef.iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > cutoff)
        .map(|(a, _)| design.names()[a].clone())
        .collect()
}

fn check_rank<T: Scalar>(design: &Design<T>, rank_tol: T) -> Result<()> {
    let k = design.ncols();
    let mut gram = Matrix::zeros(k, k);
    for i in 0..design.nrows() {
        let row = design.row(i);
        for a in 0..k {
            for b in 0..k {
                gram[(a, b)] = gram[(a, b)] + row[a] * row[b];
            }
        }
    }
    match Cholesky::new(&gram, rank_tol) {
        Ok(_) => Ok(()),
        Err(e) => Err(MediationError::Singular {
            column: design.names()[e.column].clone(),
            collinear_with: collinear_partners(design, &gram, e.column, rank_tol),
        }),
    }
}

/// Fits `logit P(y = 1) = X β` by maximum likelihood.
pub fn fit<T: Scalar>(design: &Design<T>, response: &[bool], options: &FitOptions<T>) -> Result<FittedModel<T>> {
    let n = design.nrows();
    let k = design.ncols();
    if response.len() != n {
        return Err(MediationError::Dimension(format!(
            "response has {} entries, design has {n} rows",
            response.len()
        )));
    }
    if n < k {
        return Err(MediationError::Schema(format!("{n} rows cannot identify {k} coefficients")));
    }
    check_rank(design, options.rank_tol)?;

    let mut beta = vec![T::zero(); k];
    let mut ll = log_likelihood(design, response, &beta);
    let (mut score, mut info) = score_and_information(design, response, &beta);
    let mut trace = Vec::new();
    let mut converged = false;
    let half: T = lit(0.5);

    for _ in 0..options.max_iter {
        let chol = Cholesky::new(&info, options.rank_tol).map_err(|e| MediationError::Singular {
            column: design.names()[e.column].clone(),
            collinear_with: Vec::new(),
        })?;
        let step = chol.solve(&score);

        // near the optimum the ascent of a Newton step is below the rounding
        // resolution of the summed log-likelihood
        let slack = T::epsilon() * lit(64.0) * (ll.abs() + T::one());
        let mut scale = T::one();
        let mut halvings = 0;
        let mut candidate: Vec<T>;
        let mut ll_new;
        let mut ascended;
        loop {
            candidate = beta.iter().zip(&step).map(|(&b, &s)| b + scale * s).collect();
            ll_new = log_likelihood(design, response, &candidate);
            ascended = ll_new + slack >= ll;
            if ascended || halvings == options.max_halvings {
                break;
            }
            scale = scale * half;
            halvings += 1;
        }
        if !ascended {
            // no ascent direction left at machine precision
            trace.push(IterationRecord { log_likelihood: ll, max_abs_score: max_abs(&score), halvings });
            converged = max_abs(&score) < options.score_tol;
            break;
        }

        let increase = (ll_new - ll).max(T::zero());
        beta = candidate;
        ll = ll_new;
        (score, info) = score_and_information(design, response, &beta);
        let max_score = max_abs(&score);
        trace.push(IterationRecord { log_likelihood: ll, max_abs_score: max_score, halvings });

        let rel_change = increase / (ll.abs() + T::one());
        if max_score < options.score_tol && rel_change < options.rel_loglik_tol {
            converged = true;
            break;
        }
        if let Some(j) = beta.iter().position(|b| b.abs() > options.separation_bound) {
            if increase > T::zero() {
                return Err(MediationError::Separation {
                    column: design.names()[j].clone(),
                    value: beta[j].to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }

    if !converged {
        return Err(MediationError::NonConvergence {
            iterations: trace.len(),
            trace: trace.iter().map(|r| r.max_abs_score.to_f64().unwrap_or(f64::NAN)).collect(),
        });
    }

    let chol = Cholesky::new(&info, options.rank_tol).map_err(|e| MediationError::Singular {
        column: design.names()[e.column].clone(),
        collinear_with: Vec::new(),
    })?;
    Ok(FittedModel {
        names: design.names().to_vec(),
        coefficients: beta,
        vcov: chol.inverse(),
        log_likelihood: ll,
        iterations: trace.len(),
        converged,
        n,
        trace,
    })
}

/// The outcome and mediator regressions of a mediation model.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedPair<T> {
    pub outcome: FittedModel<T>,
    pub mediator: FittedModel<T>,
}

/// Fits both regressions of `spec` to `dataset`.
pub fn fit_models<T: Scalar>(dataset: &Dataset<T>, spec: &ModelSpec, options: &FitOptions<T>) -> Result<FittedPair<T>> {
    dataset.validate(spec)?;
    let (xy, y) = build_design(dataset, spec, Target::Outcome)?;
    let (xw, w) = build_design(dataset, spec, Target::Mediator)?;
    Ok(FittedPair { outcome: fit(&xy, &y, options)?, mediator: fit(&xw, &w, options)? })
}

/// Fitted probability for one design row.
pub fn predict_prob<T: Scalar>(model: &FittedModel<T>, row: &[T]) -> Result<T> {
    predict_prob_from(&model.coefficients, row)
}

pub fn predict_prob_from<T: Scalar>(coefficients: &[T], row: &[T]) -> Result<T> {
    if row.len() != coefficients.len() {
        return Err(MediationError::Dimension(format!(
            "row has {} entries, model has {} coefficients",
            row.len(),
            coefficients.len()
        )));
    }
    Ok(logistic(dot(row, coefficients)))
}
