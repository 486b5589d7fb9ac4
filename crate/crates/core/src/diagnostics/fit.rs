use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Least-squares line with goodness-of-fit measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub slope: T,
    pub intercept: T,
    /// Largest absolute residual.
    pub residual: T,
    /// Coefficient of determination, clamped to `[0, 1]`.
    pub r_squared: T,
}

/// Ordinary least squares for `y = slope * x + intercept`.
///
/// Centered sums keep the fit stable when `x` sits far from the origin. A
/// series with no spread in `y` is fitted exactly and gets `r_squared = 1`.
pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Result<FitResult<T>> {
    if x.len() != y.len() {
        return Err(Error::Estimation("x and y lengths differ".into()));
    }
    if x.len() < 2 {
        return Err(Error::Estimation(format!(
            "need at least 2 samples, got {}",
            x.len()
        )));
    }
    let n = T::from_usize_lossy(x.len());
    let mean_x = x.iter().copied().sum::<T>() / n;
    let mean_y = y.iter().copied().sum::<T>() / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mean_x, yi - mean_y);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if !(sxx > T::zero()) {
        return Err(Error::Estimation("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut sse = T::zero();
    let mut worst = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let r = yi - (slope * xi + intercept);
        sse = sse + r * r;
        worst = worst.max(r.abs());
    }
    let r_squared = if syy > T::zero() {
        (T::one() - sse / syy).max(T::zero()).min(T::one())
    } else {
        T::one()
    };
    Ok(FitResult {
        slope,
        intercept,
        residual: worst,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..20).map(|k| k as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|t| 2.0 * t + 1.0).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-13);
        assert!((f.intercept - 1.0).abs() < 1e-13);
        assert!(f.residual < 1e-12);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn too_few_samples() {
        assert!(fit_line(&[1.0_f64], &[2.0]).is_err());
        assert!(fit_line(&[1.0_f64, 1.0], &[2.0, 3.0]).is_err());
    }
}
