//! Confidence distributions, intervals and depth-contour regions from a
//! weighted sample, plus the PIT uniformity check.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::weighted_mean_cov;
use crate::models::ParamVector;
use crate::samplers::{effective_sample_size, CDSample};

/// Effective sample size below which an interval is flagged unstable.
pub const MIN_STABLE_ESS: f64 = 10.0;
/// Effective sample size required by [`depth_region`].
pub const MIN_DEPTH_ESS: f64 = 20.0;
/// Replicates required by [`pit_uniformity`].
pub const MIN_PIT_REPLICATES: usize = 100;
/// Asymptotic one-sample KS coefficient at level 0.01.
pub const KS_COEFF_01: f64 = 1.628;

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(level))
    }
}

/// Sorted `(value, weight)` pairs with zero-weight entries dropped.
fn sorted_pairs(values: &[f64], weights: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            got: weights.len(),
        });
    }
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .copied()
        .zip(weights.iter().copied())
        .filter(|&(_, w)| w > 0.0)
        .collect();
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

/// Weighted quantile by linear interpolation between plotting positions
/// `S_k / (W + w_bar)`, where `S_k` is the cumulative weight of the `k`
/// smallest values and `w_bar` the mean weight.
///
/// With equal weights this is the `k / (m + 1)` rule: the 5% and 95% points of
/// `{1, ..., 100}` are 5.05 and 95.95. Probabilities outside the first and last
/// positions return the extreme values.
pub fn weighted_quantile(values: &[f64], weights: &[f64], prob: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::OutOfUnitInterval(prob));
    }
    let pairs = sorted_pairs(values, weights)?;
    Ok(quantile_sorted(&pairs, prob))
}

fn quantile_sorted(pairs: &[(f64, f64)], prob: f64) -> f64 {
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let denom = total + total / pairs.len() as f64;
    let mut cum = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for &(x, w) in pairs {
        cum += w;
        let pos = cum / denom;
        if prob <= pos {
            return match prev {
                None => x,
                Some((px, ppos)) => {
                    let frac = (prob - ppos) / (pos - ppos);
                    px + frac * (x - px)
                }
            };
        }
        prev = Some((x, pos));
    }
    pairs[pairs.len() - 1].0
}

/// Weighted empirical CDF of each parameter coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct CDFunction {
    /// Per coordinate: sorted values and cumulative normalized weights.
    coords: Vec<(Vec<f64>, Vec<f64>)>,
}

impl CDFunction {
    pub fn from_sample(sample: &CDSample) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptyInput);
        }
        let w = sample.weights();
        let coords = (0..sample.param_dim())
            .map(|j| {
                let pairs = sorted_pairs(&sample.coordinate(j), &w)?;
                let total: f64 = pairs.iter().map(|p| p.1).sum();
                let mut cum = 0.0;
                let mut xs = Vec::with_capacity(pairs.len());
                let mut cs = Vec::with_capacity(pairs.len());
                for (x, wt) in pairs {
                    cum += wt;
                    xs.push(x);
                    cs.push((cum / total).min(1.0));
                }
                if let Some(last) = cs.last_mut() {
                    *last = 1.0;
                }
                Ok((xs, cs))
            })
            .collect::<Result<_>>()?;
        Ok(CDFunction { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Weighted proportion of draws with coordinate `<= t`.
    pub fn cdf(&self, coord: usize, t: f64) -> f64 {
        let (xs, cs) = &self.coords[coord];
        let k = xs.partition_point(|&x| x <= t);
        if k == 0 {
            0.0
        } else {
            cs[k - 1]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegionShape {
    /// Per-coordinate `(lo, hi)`.
    IntervalBox { intervals: Vec<(f64, f64)> },
    /// `{theta : D(theta) >= threshold}` for Mahalanobis depth about `center`.
    DepthContour {
        center: Vec<f64>,
        scatter: Vec<f64>,
        dim: usize,
        threshold: f64,
        volume: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRegion {
    pub shape: RegionShape,
    pub level: f64,
    /// Effective sample size was below [`MIN_STABLE_ESS`].
    pub unstable: bool,
}

impl ConfidenceRegion {
    pub fn dim(&self) -> usize {
        match &self.shape {
            RegionShape::IntervalBox { intervals } => intervals.len(),
            RegionShape::DepthContour { dim, .. } => *dim,
        }
    }

    /// Width (one coordinate), box volume, or ellipsoid volume.
    pub fn size(&self) -> f64 {
        match &self.shape {
            RegionShape::IntervalBox { intervals } => intervals.iter().map(|(lo, hi)| hi - lo).product(),
            RegionShape::DepthContour { volume, .. } => *volume,
        }
    }

    pub fn contains(&self, theta: &[f64]) -> Result<bool> {
        region_contains(self, theta)
    }
}

/// Equal-tailed interval from the weighted quantiles of one coordinate.
pub fn confidence_interval(sample: &CDSample, coord: usize, level: f64) -> Result<ConfidenceRegion> {
    interval_region(sample, &[coord], level)
}

/// Product of marginal equal-tailed intervals over every coordinate.
pub fn interval_box(sample: &CDSample, level: f64) -> Result<ConfidenceRegion> {
    let coords: Vec<usize> = (0..sample.param_dim()).collect();
    interval_region(sample, &coords, level)
}

fn interval_region(sample: &CDSample, coords: &[usize], level: f64) -> Result<ConfidenceRegion> {
    check_level(level)?;
    if sample.is_empty() {
        return Err(Error::EmptyInput);
    }
    let p = sample.param_dim();
    if let Some(&c) = coords.iter().find(|&&c| c >= p) {
        return Err(Error::DimensionMismatch { expected: p, got: c + 1 });
    }
    let w = sample.weights();
    let tail = (1.0 - level) / 2.0;
    let intervals = coords
        .iter()
        .map(|&c| {
            let pairs = sorted_pairs(&sample.coordinate(c), &w)?;
            Ok((quantile_sorted(&pairs, tail), quantile_sorted(&pairs, 1.0 - tail)))
        })
        .collect::<Result<_>>()?;
    Ok(ConfidenceRegion {
        shape: RegionShape::IntervalBox { intervals },
        level,
        unstable: effective_sample_size(sample) < MIN_STABLE_ESS,
    })
}

fn gamma_half_plus_one(p: usize) -> f64 {
    // Gamma(p/2 + 1) for integer p.
    let mut g = if p % 2 == 0 { 1.0 } else { PI.sqrt() / 2.0 };
    let mut x = if p % 2 == 0 { 1.0 } else { 1.5 };
    while x < p as f64 / 2.0 + 1.0 - 1e-9 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Volume of `{x : (x - c)' S^{-1} (x - c) <= r2}` in `p` dimensions.
pub fn ellipsoid_volume(p: usize, det_scatter: f64, r2: f64) -> f64 {
    PI.powf(p as f64 / 2.0) / gamma_half_plus_one(p) * r2.powf(p as f64 / 2.0) * det_scatter.sqrt()
}

/// Cholesky factor of a scatter matrix, rejecting numerically singular ones
/// (a conditional variance below `1e-12` of the marginal one).
pub fn scatter_cholesky(scatter: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(scatter.clone()).ok_or(Error::SingularScatter)?;
    let l = chol.l();
    for k in 0..scatter.nrows() {
        if !(l[(k, k)] * l[(k, k)] > 1e-12 * scatter[(k, k)]) {
            return Err(Error::SingularScatter);
        }
    }
    Ok(chol)
}

fn mahalanobis_sq(chol: &Cholesky<f64, Dyn>, center: &[f64], theta: &[f64]) -> f64 {
    let diff = DVector::from_iterator(center.len(), theta.iter().zip(center).map(|(t, c)| t - c));
    let z = chol.l().solve_lower_triangular(&diff).expect("cholesky factor is invertible");
    z.norm_squared()
}

pub fn mahalanobis_depth(center: &[f64], scatter: &DMatrix<f64>, theta: &[f64]) -> Result<f64> {
    let chol = scatter_cholesky(scatter)?;
    Ok(1.0 / (1.0 + mahalanobis_sq(&chol, center, theta)))
}

/// Mahalanobis depth-contour region at the weighted `(1 - level)`-quantile of
/// the draws' depths.
pub fn depth_region(sample: &CDSample, level: f64) -> Result<ConfidenceRegion> {
    check_level(level)?;
    let p = sample.param_dim();
    if p < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: p });
    }
    let ess = effective_sample_size(sample);
    if !(ess >= MIN_DEPTH_ESS) {
        return Err(Error::LowEffectiveSampleSize { ess, min: MIN_DEPTH_ESS });
    }
    let w = sample.weights();
    let (mean, cov) = weighted_mean_cov(&sample.thetas(), &w);
    let chol = scatter_cholesky(&cov)?;
    let center: Vec<f64> = mean.iter().copied().collect();
    let depths: Vec<f64> = sample
        .draws
        .iter()
        .map(|d| 1.0 / (1.0 + mahalanobis_sq(&chol, &center, &d.theta)))
        .collect();
    let threshold = weighted_quantile(&depths, &w, 1.0 - level)?;
    let det = chol.l().diagonal().iter().map(|v| v * v).product::<f64>();
    let volume = ellipsoid_volume(p, det, 1.0 / threshold - 1.0);
    Ok(ConfidenceRegion {
        shape: RegionShape::DepthContour {
            center,
            scatter: cov.iter().copied().collect(),
            dim: p,
            threshold,
            volume,
        },
        level,
        unstable: ess < MIN_STABLE_ESS,
    })
}

pub fn region_contains(region: &ConfidenceRegion, theta: &[f64]) -> Result<bool> {
    if theta.len() != region.dim() {
        return Err(Error::DimensionMismatch {
            expected: region.dim(),
            got: theta.len(),
        });
    }
    match &region.shape {
        RegionShape::IntervalBox { intervals } => Ok(intervals
            .iter()
            .zip(theta)
            .all(|(&(lo, hi), &t)| lo <= t && t <= hi)),
        RegionShape::DepthContour {
            center,
            scatter,
            dim,
            threshold,
            ..
        } => {
            let s = DMatrix::from_column_slice(*dim, *dim, scatter);
            Ok(mahalanobis_depth(center, &s, theta)? >= *threshold)
        }
    }
}

/// `H_n(t)`: weighted proportion of draws with `theta_i >= 2 theta_hat - t`,
/// `theta_hat` being the weighted mean of the coordinate.
pub fn cd_value_at(sample: &CDSample, coord: usize, t: f64) -> f64 {
    let center = sample.weighted_mean(coord);
    let pivot = 2.0 * center - t;
    let (mut above, mut total) = (0.0, 0.0);
    for d in &sample.draws {
        let w = d.weight();
        total += w;
        if d.theta[coord] >= pivot {
            above += w;
        }
    }
    (above / total).clamp(0.0, 1.0)
}

/// Coverage indicator helper: `theta0` against a region.
pub fn covers(region: &ConfidenceRegion, theta0: &ParamVector) -> Result<bool> {
    region_contains(region, theta0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitReport {
    pub replicates: usize,
    pub ks: f64,
    pub critical: f64,
    pub pass: bool,
}

/// One-sample KS distance of `values` to Uniform(0, 1).
pub fn ks_uniform(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(&v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::OutOfUnitInterval(v));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &u)| (((i + 1) as f64 / r) - u).max(u - i as f64 / r))
        .fold(0.0, f64::max))
}

/// KS test of PIT values against Uniform(0, 1) at level 0.01.
pub fn pit_uniformity(values: &[f64]) -> Result<PitReport> {
    if values.len() < MIN_PIT_REPLICATES {
        return Err(Error::NotEnoughDraws {
            got: values.len(),
            min: MIN_PIT_REPLICATES as f64,
        });
    }
    let ks = ks_uniform(values)?;
    let critical = KS_COEFF_01 / (values.len() as f64).sqrt();
    Ok(PitReport {
        replicates: values.len(),
        ks,
        critical,
        pass: ks <= critical,
    })
}
