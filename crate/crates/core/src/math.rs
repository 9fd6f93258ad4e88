//! Small numeric helpers shared by the models.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `ln(e^a + e^b)` without overflow; `-inf` is the additive identity.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let t = sum + v;
        if libm::fabs(sum) >= libm::fabs(v) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; `None` when `y` has zero variance.
    pub r_squared: Option<f64>,
    pub points: usize,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Fits a straight line through `(x, y)` pairs. Needs at least two points with
/// distinct abscissae.
pub fn least_squares(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints { got: points.len(), need: 2 });
    }
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidParameter { name: "point", value: if x.is_finite() { y } else { x } });
        }
    }
    let n = points.len() as f64;
    let mean_x = compensated_sum(points.iter().map(|p| p.0)) / n;
    let mean_y = compensated_sum(points.iter().map(|p| p.1)) / n;
    let sxx = compensated_sum(points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)));
    let sxy = compensated_sum(points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)));
    let syy = compensated_sum(points.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)));
    if sxx <= 0.0 {
        return Err(Error::FitDegenerate("all abscissae are equal"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy > 0.0 {
        let ss_res = compensated_sum(points.iter().map(|&(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        }));
        Some(1.0 - ss_res / syy)
    } else {
        None
    };
    Ok(LinearFit { slope, intercept, r_squared, points: points.len() })
}

/// Least squares on `(ln x, ln y)`. Needs three or more strictly positive points.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints { got: points.len(), need: 3 });
    }
    let mut logs = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if !(x > 0.0) {
            return Err(Error::InvalidParameter { name: "x", value: x });
        }
        if !(y > 0.0) {
            return Err(Error::InvalidParameter { name: "y", value: y });
        }
        logs.push((libm::log(x), libm::log(y)));
    }
    least_squares(&logs)
}

/// Pearson correlation; `None` when either coordinate has zero variance.
pub fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = compensated_sum(pairs.iter().map(|p| p.0)) / n;
    let my = compensated_sum(pairs.iter().map(|p| p.1)) / n;
    let sxx = compensated_sum(pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)));
    let syy = compensated_sum(pairs.iter().map(|p| (p.1 - my) * (p.1 - my)));
    let sxy = compensated_sum(pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)));
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / libm::sqrt(sxx * syy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn exact_power_law_has_unit_r2() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64, 3.0 * (i as f64).powi(2))).collect();
        let fit = loglog_fit(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_response_has_zero_slope() {
        let pts: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, 4.0)).collect();
        let fit = loglog_fit(&pts).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, None);
    }

    #[test]
    fn rejects_non_positive() {
        let pts = vec![(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)];
        assert!(matches!(loglog_fit(&pts), Err(Error::InvalidParameter { .. })));
        assert!(matches!(loglog_fit(&pts[..2]), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn log_add_exp_matches_direct() {
        let v = log_add_exp(libm::log(3.0), libm::log(5.0));
        assert!((v - libm::log(8.0)).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 1.5), 1.5);
        assert_eq!(log_add_exp(1000.0, 1000.0), 1000.0 + core::f64::consts::LN_2);
    }

    #[test]
    fn pearson_of_anti_correlated_pairs() {
        let pairs = vec![(1.0, 2.0), (2.0, 1.0), (2.0, 1.0), (1.0, 2.0)];
        assert!((pearson(&pairs).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[(2.0, 2.0), (2.0, 2.0)]), None);
    }
}
