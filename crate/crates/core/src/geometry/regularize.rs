//! Smooth Heaviside regularization and Kreisselmeier-Steinhauser aggregation.

use crate::error::{Error, Result};
use crate::mesh::Grid;

/// Parameters shared by TDF evaluation and the ersatz material model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationParams {
    /// Half-width of the Heaviside transition band, in TDF units.
    pub epsilon: f64,
    /// Lower floor of the regularized Heaviside (ersatz void value).
    pub alpha_min: f64,
    /// K-S aggregation sharpness.
    pub ks_l: f64,
    /// Hyperellipse exponent; even and at least 2.
    pub p_exp: i32,
}

impl RegularizationParams {
    pub fn new(epsilon: f64, alpha_min: f64, ks_l: f64, p_exp: i32) -> Result<Self> {
        let params = Self { epsilon, alpha_min, ks_l, p_exp };
        params.validate()?;
        Ok(params)
    }

    /// Default parameters with `epsilon = 2 * min(cell edge)`.
    pub fn for_grid(grid: &Grid) -> Self {
        Self { epsilon: 2.0 * grid.min_spacing(), alpha_min: 1e-3, ks_l: 100.0, p_exp: 6 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidComponent(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min < 1.0) {
            return Err(Error::InvalidComponent(format!("alpha_min must lie in (0, 1), got {}", self.alpha_min)));
        }
        if !(self.ks_l > 0.0 && self.ks_l.is_finite()) {
            return Err(Error::InvalidComponent(format!("K-S parameter must be positive, got {}", self.ks_l)));
        }
        if self.p_exp < 2 || self.p_exp % 2 != 0 {
            return Err(Error::InvalidComponent(format!("exponent p must be even and >= 2, got {}", self.p_exp)));
        }
        Ok(())
    }

    #[inline]
    pub fn heaviside(&self, x: f64) -> f64 {
        heaviside_reg(x, self.epsilon, self.alpha_min)
    }

    #[inline]
    pub fn heaviside_deriv(&self, x: f64) -> f64 {
        heaviside_reg_deriv(x, self.epsilon, self.alpha_min)
    }
}

/// Regularized Heaviside: `alpha_min` below `-epsilon`, 1 above `epsilon`,
/// and a cubic blend in between.
#[inline]
pub fn heaviside_reg(x: f64, epsilon: f64, alpha_min: f64) -> f64 {
    if x > epsilon {
        1.0
    } else if x < -epsilon {
        alpha_min
    } else {
        let r = x / epsilon;
        0.75 * (1.0 - alpha_min) * (r - r * r * r / 3.0) + 0.5 * (1.0 + alpha_min)
    }
}

#[inline]
pub fn heaviside_reg_deriv(x: f64, epsilon: f64, alpha_min: f64) -> f64 {
    if x.abs() > epsilon {
        0.0
    } else {
        let r = x / epsilon;
        0.75 * (1.0 - alpha_min) / epsilon * (1.0 - r * r)
    }
}

/// K-S aggregate `ln(sum exp(l * v)) / l` and its weights `d(KS)/d(v_i)`.
///
/// Panics if `values` is empty.
pub fn ks_aggregate(values: &[f64], l: f64) -> (f64, Vec<f64>) {
    assert!(!values.is_empty(), "K-S aggregation of an empty set");
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = values.iter().map(|&v| (l * (v - max)).exp()).collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    (max + sum.ln() / l, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn heaviside_endpoints() {
        let (e, a) = (0.3, 1e-3);
        assert_eq!(heaviside_reg(e, e, a), 1.0);
        assert!((heaviside_reg(-e, e, a) - a).abs() < 1e-15);
        assert_eq!(heaviside_reg(0.0, e, a), (1.0 + a) / 2.0);
        assert_eq!(heaviside_reg_deriv(e, e, a), 0.0);
        assert_eq!(heaviside_reg_deriv(-e, e, a), 0.0);
        assert_eq!(heaviside_reg_deriv(0.0, e, a), 3.0 * (1.0 - a) / (4.0 * e));
    }

    #[test]
    fn heaviside_half_band_value() {
        let (e, a) = (0.02, 1e-3);
        let expected = (3.0 * 0.999 / 4.0) * (0.5 - 0.125 / 3.0) + 1.001 / 2.0;
        assert!((heaviside_reg(e / 2.0, e, a) - expected).abs() < 1e-14);
    }

    #[test]
    fn ks_two_equal_values() {
        let (v, w) = ks_aggregate(&[0.0, 0.0], 100.0);
        assert!((v - 2f64.ln() / 100.0).abs() < 1e-15);
        assert_eq!(w, vec![0.5, 0.5]);
    }

    #[test]
    fn ks_survives_large_arguments() {
        let (v, w) = ks_aggregate(&[50.0, 49.0], 100.0);
        assert!(v.is_finite() && v >= 50.0 && v - 50.0 < 1e-12);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn ks_sandwich(values in prop::collection::vec(-2.0f64..2.0, 1..20), l in 1.0f64..500.0) {
            let (v, w) = ks_aggregate(&values, l);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v >= max - 1e-15);
            prop_assert!(v <= max + (values.len() as f64).ln() / l + 1e-12);
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn heaviside_monotone(x in -1.0f64..1.0, dx in 0.0f64..0.5) {
            let (e, a) = (0.4, 1e-3);
            prop_assert!(heaviside_reg(x + dx, e, a) >= heaviside_reg(x, e, a) - 1e-15);
        }

        #[test]
        fn heaviside_derivative_matches_fd(r in -0.999f64..0.999) {
            let (e, a) = (0.05, 1e-3);
            let x = r * e;
            let h = 1e-7 * e;
            let fd = (heaviside_reg(x + h, e, a) - heaviside_reg(x - h, e, a)) / (2.0 * h);
            prop_assert!((fd - heaviside_reg_deriv(x, e, a)).abs() <= 1e-8 * (1.0 / e));
        }
    }
}
