//! Summary statistics `S_n` for the Cauchy settings, the Normal mean model and the
//! Ricker map.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ols;

/// Minimum Ricker series length accepted by [`summary_ricker`].
pub const RICKER_MIN_LEN: usize = 10;
pub const RICKER_DIM: usize = 13;
const RICKER_MAX_LAG: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryVector(Vec<f64>);

impl SummaryVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                value: values[index],
            });
        }
        Ok(SummaryVector(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for SummaryVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Name and output dimension of a registered summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummarySpec {
    pub name: &'static str,
    pub dim: usize,
}

/// Statistics available for IID Cauchy (and Normal) samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CauchyStat {
    Median,
    Mean,
    Mad,
    Sd,
    MeanSd,
    MedianMad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryKind {
    Iid(CauchyStat),
    Ricker13,
}

impl SummaryKind {
    pub fn from_name(name: &str) -> Result<Self> {
        let kind = match name {
            "median" => SummaryKind::Iid(CauchyStat::Median),
            "mean" => SummaryKind::Iid(CauchyStat::Mean),
            "mad" => SummaryKind::Iid(CauchyStat::Mad),
            "sd" => SummaryKind::Iid(CauchyStat::Sd),
            "mean_sd" => SummaryKind::Iid(CauchyStat::MeanSd),
            "median_mad" => SummaryKind::Iid(CauchyStat::MedianMad),
            "ricker13" => SummaryKind::Ricker13,
            _ => {
                return Err(Error::UnknownName {
                    kind: "summary",
                    name: name.to_string(),
                })
            }
        };
        Ok(kind)
    }

    pub fn spec(&self) -> SummarySpec {
        let (name, dim) = match self {
            SummaryKind::Iid(CauchyStat::Median) => ("median", 1),
            SummaryKind::Iid(CauchyStat::Mean) => ("mean", 1),
            SummaryKind::Iid(CauchyStat::Mad) => ("mad", 1),
            SummaryKind::Iid(CauchyStat::Sd) => ("sd", 1),
            SummaryKind::Iid(CauchyStat::MeanSd) => ("mean_sd", 2),
            SummaryKind::Iid(CauchyStat::MedianMad) => ("median_mad", 2),
            SummaryKind::Ricker13 => ("ricker13", RICKER_DIM),
        };
        SummarySpec { name, dim }
    }

    pub fn dim(&self) -> usize {
        self.spec().dim
    }

    pub fn compute(&self, data: &[f64]) -> Result<SummaryVector> {
        match self {
            SummaryKind::Iid(stat) => summary_cauchy(*stat, data),
            SummaryKind::Ricker13 => summary_ricker(data),
        }
    }
}

/// Median; reorders `buf` in place.
fn median_in_place(buf: &mut [f64]) -> f64 {
    let n = buf.len();
    let mid = n / 2;
    let (lower, upper, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (below + upper)
    }
}

pub fn median(data: &[f64]) -> f64 {
    median_in_place(&mut data.to_vec())
}

/// Unscaled median absolute deviation about the median.
pub fn mad(data: &[f64]) -> f64 {
    let mut buf = data.to_vec();
    let m = median_in_place(&mut buf);
    for v in buf.iter_mut() {
        *v = (*v - m).abs();
    }
    median_in_place(&mut buf)
}

fn median_mad(data: &[f64]) -> (f64, f64) {
    let mut buf = data.to_vec();
    let m = median_in_place(&mut buf);
    for v in buf.iter_mut() {
        *v = (*v - m).abs();
    }
    (m, median_in_place(&mut buf))
}

pub fn mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

/// Sample standard deviation with the `n - 1` divisor.
pub fn sd(data: &[f64]) -> f64 {
    let m = mean(data);
    let ss: f64 = data.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (data.len() as f64 - 1.0)).sqrt()
}

fn positive(value: f64, what: &'static str) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::DegenerateSummary(what))
    }
}

pub fn summary_cauchy(kind: CauchyStat, data: &[f64]) -> Result<SummaryVector> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let needs_two = matches!(
        kind,
        CauchyStat::Mad | CauchyStat::Sd | CauchyStat::MeanSd | CauchyStat::MedianMad
    );
    if needs_two && data.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: data.len(),
            min: 2,
        });
    }
    let values = match kind {
        CauchyStat::Median => vec![median(data)],
        CauchyStat::Mean => vec![mean(data)],
        CauchyStat::Mad => vec![positive(mad(data), "MAD")?],
        CauchyStat::Sd => vec![positive(sd(data), "SD")?],
        CauchyStat::MeanSd => vec![mean(data), positive(sd(data), "SD")?],
        CauchyStat::MedianMad => {
            let (m, d) = median_mad(data);
            vec![m, positive(d, "MAD")?]
        }
    };
    SummaryVector::new(values)
}

pub fn summary_mean(data: &[f64]) -> Result<SummaryVector> {
    summary_cauchy(CauchyStat::Mean, data)
}

/// Biased (divisor `T`) autocovariance at `lag`.
pub fn autocovariance(y: &[f64], lag: usize) -> f64 {
    let n = y.len();
    let m = mean(y);
    let s: f64 = (0..n.saturating_sub(lag)).map(|t| (y[t] - m) * (y[t + lag] - m)).sum();
    s / n as f64
}

/// The 13 Ricker statistics, in order:
///
/// 0. mean, 1. number of zeros, 2..=7. autocovariances at lags 0..=5,
/// 8..=10. linear, quadratic and cubic coefficients of the sorted first
/// differences regressed on their centred, scaled ranks,
/// 11..=12. coefficients of `y_{t+1}^0.3 ~ y_t^0.3 + y_t^0.6` (no intercept).
///
/// Degenerate regressions (e.g. constant series) resolve to the minimum-norm
/// least-squares coefficients.
pub fn summary_ricker(data: &[f64]) -> Result<SummaryVector> {
    if data.len() < RICKER_MIN_LEN {
        return Err(Error::SeriesTooShort {
            len: data.len(),
            min: RICKER_MIN_LEN,
        });
    }
    let mut out = Vec::with_capacity(RICKER_DIM);
    out.push(mean(data));
    out.push(data.iter().filter(|&&v| v == 0.0).count() as f64);
    for lag in 0..=RICKER_MAX_LAG {
        out.push(autocovariance(data, lag));
    }

    let mut diffs: Vec<f64> = data.windows(2).map(|w| w[1] - w[0]).collect();
    diffs.sort_by(f64::total_cmp);
    let m = diffs.len() as f64;
    let u: Vec<f64> = (1..=diffs.len()).map(|j| (j as f64 - (m + 1.0) / 2.0) / m).collect();
    let columns = vec![
        vec![1.0; diffs.len()],
        u.clone(),
        u.iter().map(|v| v * v).collect(),
        u.iter().map(|v| v * v * v).collect(),
    ];
    let cubic = ols(&columns, &diffs);
    out.extend_from_slice(&cubic[1..4]);

    let pow3: Vec<f64> = data.iter().map(|v| v.powf(0.3)).collect();
    let lagged3 = pow3[..pow3.len() - 1].to_vec();
    let lagged6: Vec<f64> = lagged3.iter().map(|v| v * v).collect();
    let ar = ols(&[lagged3, lagged6], &pow3[1..]);
    out.extend_from_slice(&ar);

    SummaryVector::new(out)
}
