//! Small least-squares helpers used by the scans.

use serde::Serialize;

use crate::error::{ChainError, Result};
use crate::num::Real;

/// Ordinary least squares fit of `y = intercept + slope · x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit<T> {
    pub intercept: T,
    pub slope: T,
    pub r_squared: T,
    pub slope_stderr: T,
    pub intercept_stderr: T,
}

impl<T: Real> LinearFit<T> {
    pub fn eval(&self, x: T) -> T {
        self.intercept + self.slope * x
    }
}

pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Result<LinearFit<T>> {
    if x.len() != y.len() {
        return Err(ChainError::invalid("fit abscissa and ordinate lengths differ"));
    }
    if x.len() < 3 {
        return Err(ChainError::invalid("linear fit needs at least 3 points"));
    }
    let n = T::from_count(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let sxx: T = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    let sxy: T = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let syy: T = y.iter().map(|&b| (b - my) * (b - my)).sum();
    if sxx <= T::zero() {
        return Err(ChainError::invalid("fit abscissa has zero spread"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: T = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r_squared = if syy > T::zero() { T::one() - ss_res / syy } else { T::one() };
    let dof = n - T::lit(2.0);
    let sigma2 = ss_res / dof;
    let slope_stderr = (sigma2 / sxx).sqrt();
    let intercept_stderr = (sigma2 * (T::one() / n + mx * mx / sxx)).sqrt();
    Ok(LinearFit { intercept, slope, r_squared, slope_stderr, intercept_stderr })
}

/// One-parameter fit `y ≈ c · x²` through the origin. Returns `(c, residual_norm)`.
pub fn quadratic_through_origin<T: Real>(x: &[T], y: &[T]) -> (T, T) {
    let num: T = x.iter().zip(y).map(|(&t, &a)| a * t * t).sum();
    let den: T = x.iter().map(|&t| t * t * t * t).sum();
    let c = num / den;
    let res: T = x
        .iter()
        .zip(y)
        .map(|(&t, &a)| {
            let r = a - c * t * t;
            r * r
        })
        .sum();
    (c, res.sqrt())
}
