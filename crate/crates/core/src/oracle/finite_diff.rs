use crate::error::{MediationError, Result};
use crate::{lit, Scalar};

/// Step size `relative * max(1, |θ_i|)` for coordinate `i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPolicy {
    pub relative: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { relative: 1e-6 }
    }
}

impl StepPolicy {
    pub fn step<T: Scalar>(&self, theta_i: T) -> T {
        lit::<T>(self.relative) * theta_i.abs().max(T::one())
    }
}

/// Central-difference gradient of `target` at `theta`.
pub fn finite_diff<T, F>(target: F, theta: &[T], policy: StepPolicy) -> Result<Vec<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<T>,
{
    let mut point = theta.to_vec();
    let two: T = lit(2.0);
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let h = policy.step(theta[i]);
        point[i] = theta[i] + h;
        let up = target(&point)?;
        point[i] = theta[i] - h;
        let down = target(&point)?;
        point[i] = theta[i];
        let g = (up - down) / (two * h);
        if g.is_nan() {
            return Err(MediationError::NonFinite { context: "finite-difference gradient", index: i });
        }
        grad.push(g);
    }
    Ok(grad)
}

/// Per-entry error `|a - b| / max(1, |b|)`, maximised over the slices.
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs().max(1.0)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_target_has_zero_gradient() {
        let g = finite_diff(|_: &[f64]| Ok(3.0), &[1.0, -2.0, 5.0], StepPolicy::default()).unwrap();
        assert_eq!(g, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn product_gradient() {
        let g = finite_diff(|t: &[f64]| Ok(t[0] * t[1]), &[2.0, 3.0], StepPolicy::default()).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-9);
        assert!((g[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn nan_reports_index() {
        let err = finite_diff(
            |t: &[f64]| Ok(if t[1] > 1.0 { f64::NAN } else { t[0] }),
            &[0.0, 1.0],
            StepPolicy::default(),
        )
        .unwrap_err();
        assert_eq!(err, MediationError::NonFinite { context: "finite-difference gradient", index: 1 });
    }
}
