//! Closed forms for the Normal-mean model with a Gaussian initial density and
//! a Gaussian kernel on the sample mean.
//!
//! With `theta ~ N(mu_n, b_n^{-2})`, `s | theta ~ N(theta, 1/n)` and kernel
//! `exp(-(s - s_obs)^2 / (2 eps^2))`, the accepted `theta` is Gaussian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleNormalSpec {
    pub n: usize,
    pub mu_n: f64,
    pub b_n: f64,
    pub epsilon: f64,
    pub s_obs: f64,
}

impl OracleNormalSpec {
    pub fn new(n: usize, mu_n: f64, b_n: f64, epsilon: f64, s_obs: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter { name: "n", value: 0.0 });
        }
        if !(b_n > 0.0) || !b_n.is_finite() {
            return Err(Error::InvalidParameter { name: "b_n", value: b_n });
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
            });
        }
        if !mu_n.is_finite() || !s_obs.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu_n/s_obs",
                value: if mu_n.is_finite() { s_obs } else { mu_n },
            });
        }
        Ok(OracleNormalSpec {
            n,
            mu_n,
            b_n,
            epsilon,
            s_obs,
        })
    }

    /// `1/n + eps^2`: variance of `s_obs` around `theta` after kernel smoothing.
    pub fn noise_variance(&self) -> f64 {
        1.0 / self.n as f64 + self.epsilon * self.epsilon
    }

    /// `Delta_n = b_n^2 (1/n + eps^2)`.
    pub fn delta(&self) -> f64 {
        self.b_n * self.b_n * self.noise_variance()
    }
}

/// Mean and variance of the accepted `theta`.
pub fn closed_form_moments(spec: &OracleNormalSpec) -> (f64, f64) {
    let b2 = spec.b_n * spec.b_n;
    let precision = 1.0 / spec.noise_variance();
    let delta = spec.delta();
    let variance = delta / (1.0 + delta) / b2;
    let mean = (spec.mu_n * b2 + spec.s_obs * precision) / (b2 + precision);
    (mean, variance)
}

/// Slope of `E(theta | s)` under the accepted joint law, `n / (n + b_n^2)`.
///
/// The kernel only tilts the marginal of `s`, so the slope is free of `eps`.
pub fn regression_slope(spec: &OracleNormalSpec) -> f64 {
    let n = spec.n as f64;
    n / (n + spec.b_n * spec.b_n)
}

/// Marginal acceptance probability of the max-normalized Gaussian kernel.
pub fn acceptance_rate(spec: &OracleNormalSpec) -> f64 {
    let v = 1.0 / (spec.b_n * spec.b_n) + 1.0 / spec.n as f64;
    let e2 = spec.epsilon * spec.epsilon;
    let gap = spec.mu_n - spec.s_obs;
    (e2 / (e2 + v)).sqrt() * (-gap * gap / (2.0 * (e2 + v))).exp()
}

/// How the oracle spec varies with `n`: `b_n = b_scale n^{b_exp}`,
/// `mu_n = theta0 + mu_offset / b_n`, `s_obs = theta0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveTemplate {
    pub theta0: f64,
    pub b_scale: f64,
    pub b_exp: f64,
    pub mu_offset: f64,
}

impl Default for CurveTemplate {
    fn default() -> Self {
        CurveTemplate {
            theta0: 0.0,
            b_scale: 1.0,
            b_exp: 0.25,
            mu_offset: 1.0,
        }
    }
}

impl CurveTemplate {
    pub fn spec_at(&self, n: usize, epsilon: f64) -> Result<OracleNormalSpec> {
        let b = self.b_scale * (n as f64).powf(self.b_exp);
        OracleNormalSpec::new(n, self.theta0 + self.mu_offset / b, b, epsilon, self.theta0)
    }
}

/// Analytic acceptance rate over a grid of sample sizes.
pub fn acceptance_rate_curve(
    template: &CurveTemplate,
    n_grid: &[usize],
    epsilon_rule: impl Fn(usize) -> f64,
) -> Result<Vec<(usize, f64)>> {
    if n_grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    n_grid
        .iter()
        .map(|&n| {
            let eps = epsilon_rule(n);
            if !(eps > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "epsilon",
                    value: eps,
                });
            }
            Ok((n, acceptance_rate(&template.spec_at(n, eps)?)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tight_initial_density_dominates() {
        let spec = OracleNormalSpec::new(50, 0.7, 1e6, 0.1, 2.0).unwrap();
        let (m, v) = closed_form_moments(&spec);
        assert!((m - 0.7).abs() < 1e-9);
        assert!(v < 1e-11);
    }

    #[test]
    fn unit_conjugate_update() {
        let spec = OracleNormalSpec::new(1, 0.0, 1.0, 1e-9, 1.0).unwrap();
        let (m, v) = closed_form_moments(&spec);
        assert!((m - 0.5).abs() < 1e-12);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degeneracy_curve() {
        let grid = [100, 1_000, 10_000];
        let curve = acceptance_rate_curve(&CurveTemplate::default(), &grid, |n| 1.0 / n as f64).unwrap();
        assert!(curve[2].1 < curve[0].1);
        assert!(curve.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn wide_kernel_rate_settles_at_positive_constant() {
        // With b_n fixed the marginal variance of s shrinks in n, so the rate
        // rises towards its limit sqrt(eps^2 / (eps^2 + b^-2)) exp(...).
        let fixed_b = CurveTemplate {
            b_exp: 0.0,
            ..CurveTemplate::default()
        };
        let grid = [10, 100, 1_000, 10_000, 100_000];
        let wide = acceptance_rate_curve(&fixed_b, &grid, |_| 3.0).unwrap();
        let limit = (9.0f64 / 10.0).sqrt() * (-1.0f64 / 20.0).exp();
        assert!(wide.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!((wide[4].1 - limit).abs() < 1e-5);
        assert!(limit > 0.8);
    }

    #[test]
    fn slope_ignores_epsilon() {
        let a = OracleNormalSpec::new(100, 0.0, 3.0, 0.01, 0.0).unwrap();
        let b = OracleNormalSpec::new(100, 0.0, 3.0, 5.0, 0.0).unwrap();
        assert_eq!(regression_slope(&a), regression_slope(&b));
        assert!((regression_slope(&a) - 100.0 / 109.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(OracleNormalSpec::new(0, 0.0, 1.0, 0.1, 0.0).is_err());
        assert!(OracleNormalSpec::new(10, 0.0, 0.0, 0.1, 0.0).is_err());
        assert!(acceptance_rate_curve(&CurveTemplate::default(), &[], |_| 1.0).is_err());
    }
}
