//! Acceptance kernels, the diagonal Lambda-norm and tolerance selection by
//! acceptance proportion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summaries::{mad, SummaryVector};

pub const MIN_PILOTS: usize = 20;
pub const SCALE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Uniform,
    Gaussian,
}

/// A max-normalized kernel `K_eps` applied to the standardized distance.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    epsilon: f64,
    lambda_scale: Vec<f64>,
}

fn check_scales(lambda_scale: &[f64]) -> Result<()> {
    if lambda_scale.is_empty() {
        return Err(Error::EmptyInput);
    }
    match lambda_scale.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
        Some(&bad) => Err(Error::InvalidParameter {
            name: "lambda_scale",
            value: bad,
        }),
        None => Ok(()),
    }
}

impl KernelSpec {
    pub fn new(kind: KernelKind, epsilon: f64, lambda_scale: Vec<f64>) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
            });
        }
        check_scales(&lambda_scale)?;
        Ok(KernelSpec {
            kind,
            epsilon,
            lambda_scale,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lambda_scale(&self) -> &[f64] {
        &self.lambda_scale
    }

    pub fn distance(&self, s: &[f64], s_obs: &[f64]) -> f64 {
        lambda_distance(&self.lambda_scale, s, s_obs)
    }

    pub fn weight(&self, distance: f64) -> f64 {
        kernel_weight(self, distance)
    }
}

/// `sqrt(sum_j ((s_j - s_obs_j) / lambda_j)^2)`.
pub fn lambda_distance(lambda_scale: &[f64], s: &[f64], s_obs: &[f64]) -> f64 {
    s.iter()
        .zip(s_obs)
        .zip(lambda_scale)
        .map(|((a, b), l)| {
            let z = (a - b) / l;
            z * z
        })
        .sum::<f64>()
        .sqrt()
}

/// Acceptance probability at a standardized distance; equals 1 at distance 0.
pub fn kernel_weight(spec: &KernelSpec, distance: f64) -> f64 {
    match spec.kind {
        KernelKind::Uniform => {
            if distance <= spec.epsilon {
                1.0
            } else {
                0.0
            }
        }
        KernelKind::Gaussian => {
            let z = distance / spec.epsilon;
            (-0.5 * z * z).exp()
        }
    }
}

/// Per-coordinate MAD of the pilot summaries, floored at [`SCALE_FLOOR`].
///
/// A coordinate whose MAD is zero falls back to its standard deviation before
/// the floor applies, so discrete summaries with a dominant value still get a
/// usable scale.
pub fn standardize_scales(pilot_summaries: &[SummaryVector]) -> Result<Vec<f64>> {
    if pilot_summaries.len() < MIN_PILOTS {
        return Err(Error::TooFewPilots {
            got: pilot_summaries.len(),
            min: MIN_PILOTS,
        });
    }
    let d = pilot_summaries[0].len();
    if let Some(bad) = pilot_summaries.iter().find(|s| s.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    let scales = (0..d)
        .map(|j| {
            let column: Vec<f64> = pilot_summaries.iter().map(|s| s[j]).collect();
            let mut scale = mad(&column);
            if scale <= 0.0 {
                scale = crate::summaries::sd(&column);
            }
            scale.max(SCALE_FLOOR)
        })
        .collect();
    Ok(scales)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceRecord {
    pub index: usize,
    pub distance: f64,
}

/// Number of draws retained at `proportion` out of `n`: `ceil(proportion * n)`.
pub fn accepted_count(proportion: f64, n: usize) -> Result<usize> {
    if !(proportion > 0.0 && proportion <= 1.0) {
        return Err(Error::InvalidProportion(proportion));
    }
    // guard against products like 0.4 * 5 = 2.0000000000000004
    let raw = proportion * n as f64;
    let k = (raw - 1e-9 * raw.max(1.0)).ceil() as usize;
    Ok(k.clamp(1, n.max(1)))
}

/// Orders records by distance, ties broken by ascending index.
pub fn sort_records(records: &mut [DistanceRecord]) {
    records.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
}

/// The `ceil(proportion * N)`-th smallest distance.
pub fn tolerance_from_proportion(distances: &[DistanceRecord], proportion: f64) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::EmptyInput);
    }
    let k = accepted_count(proportion, distances.len())?;
    let mut sorted = distances.to_vec();
    sort_records(&mut sorted);
    Ok(sorted[k - 1].distance)
}

/// Indices of the `ceil(proportion * N)` nearest records in index-tie order.
pub fn nearest_indices(distances: &[DistanceRecord], proportion: f64) -> Result<Vec<usize>> {
    if distances.is_empty() {
        return Err(Error::EmptyInput);
    }
    let k = accepted_count(proportion, distances.len())?;
    let mut sorted = distances.to_vec();
    sort_records(&mut sorted);
    Ok(sorted[..k].iter().map(|r| r.index).collect())
}

/// How a sampler turns distances into accepted draws.
#[derive(Debug, Clone, PartialEq)]
pub enum Acceptance {
    /// Accept each proposal with probability `K_eps(distance)`.
    Fixed(KernelSpec),
    /// Keep the `ceil(p N)` nearest proposals; `eps` is the boundary distance.
    Proportion {
        kind: KernelKind,
        proportion: f64,
        lambda_scale: Vec<f64>,
    },
}

impl Acceptance {
    pub fn proportion(kind: KernelKind, proportion: f64, lambda_scale: Vec<f64>) -> Result<Self> {
        if !(proportion > 0.0 && proportion <= 1.0) {
            return Err(Error::InvalidProportion(proportion));
        }
        check_scales(&lambda_scale)?;
        Ok(Acceptance::Proportion {
            kind,
            proportion,
            lambda_scale,
        })
    }

    pub fn lambda_scale(&self) -> &[f64] {
        match self {
            Acceptance::Fixed(spec) => spec.lambda_scale(),
            Acceptance::Proportion { lambda_scale, .. } => lambda_scale,
        }
    }
}
