//! Linear regression adjustment `theta* = theta - beta (s - s_obs)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::models::ParamVector;
use crate::samplers::CDSample;

const RCOND: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub alpha: ParamVector,
    /// `p x d` slope matrix.
    pub beta: DMatrix<f64>,
    pub weighted: bool,
}

/// Weighted least squares of theta on `(1, s - s_obs)` over the accepted draws.
///
/// Summary coordinates that are constant across the draws carry no information
/// and receive a zero slope; collinearity among the remaining coordinates is a
/// singular design.
pub fn fit_regression(sample: &CDSample) -> Result<RegressionFit> {
    let m = sample.len();
    let d = sample.s_obs.len();
    let p = sample.param_dim();
    if (m as f64) < (d + 2) as f64 {
        return Err(Error::NotEnoughDraws {
            got: m,
            min: (d + 2) as f64,
        });
    }
    let weights = sample.weights();
    let centered = |i: usize, j: usize| sample.draws[i].summary[j] - sample.s_obs[j];
    let varying: Vec<usize> = (0..d)
        .filter(|&j| {
            let first = centered(0, j);
            (1..m).any(|i| centered(i, j) != first)
        })
        .collect();
    if varying.is_empty() {
        return Err(Error::SingularDesign);
    }
    let root_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let x = DMatrix::from_fn(m, varying.len() + 1, |i, c| {
        root_w[i] * if c == 0 { 1.0 } else { centered(i, varying[c - 1]) }
    });
    let y = DMatrix::from_fn(m, p, |i, k| root_w[i] * sample.draws[i].theta[k]);
    let (coef, rank) = least_squares(&x, &y, RCOND);
    if rank < varying.len() + 1 {
        return Err(Error::SingularDesign);
    }
    let mut beta = DMatrix::zeros(p, d);
    for (c, &j) in varying.iter().enumerate() {
        for k in 0..p {
            beta[(k, j)] = coef[(c + 1, k)];
        }
    }
    let alpha = ParamVector::new((0..p).map(|k| coef[(0, k)]).collect())?;
    let weighted = weights.iter().any(|&w| (w - weights[0]).abs() > 1e-15);
    Ok(RegressionFit { alpha, beta, weighted })
}

/// Shift every draw by `-beta (s_i - s_obs)`; weights are left untouched.
pub fn apply_adjustment(sample: &CDSample, fit: &RegressionFit) -> Result<CDSample> {
    let p = sample.param_dim();
    let d = sample.s_obs.len();
    if fit.beta.nrows() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: fit.beta.nrows(),
        });
    }
    if fit.beta.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: fit.beta.ncols(),
        });
    }
    let mut out = sample.clone();
    for draw in &mut out.draws {
        let theta: Vec<f64> = (0..p)
            .map(|k| {
                let shift: f64 = (0..d)
                    .map(|j| fit.beta[(k, j)] * (draw.summary[j] - sample.s_obs[j]))
                    .sum();
                draw.theta[k] - shift
            })
            .collect();
        draw.theta = ParamVector::new(theta)?;
    }
    out.adjusted = true;
    Ok(out)
}

/// Fit and apply; a singular or undersized design returns the input with
/// `adjust_fallback` set.
pub fn adjust(sample: &CDSample) -> Result<CDSample> {
    match fit_regression(sample) {
        Ok(fit) => apply_adjustment(sample, &fit),
        Err(Error::SingularDesign | Error::NotEnoughDraws { .. }) => {
            let mut out = sample.clone();
            out.adjust_fallback = true;
            Ok(out)
        }
        Err(e) => Err(e),
    }
}
