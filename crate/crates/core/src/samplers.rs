//! Accept-reject ACDC and importance-sampling ABC.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::initial_density::InitialDensity;
use crate::kernels::{accepted_count, kernel_weight, lambda_distance, sort_records, Acceptance, DistanceRecord, KernelKind, KernelSpec};
use crate::models::{Bounds, GenerativeModel, ParamVector};
use crate::rng::SeedStream;
use crate::summaries::{SummaryKind, SummaryVector};

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptedDraw {
    pub theta: ParamVector,
    pub summary: SummaryVector,
    pub distance: f64,
    /// `K_eps(distance)` in proportion mode; 1 when acceptance was a Bernoulli draw.
    pub kernel_weight: f64,
    /// 1 for ACDC, `pi(theta) / r_n(theta)` (unnormalized) for IS-ABC.
    pub importance_weight: f64,
    /// Proposal index within the run.
    pub index: usize,
}

impl AcceptedDraw {
    pub fn weight(&self) -> f64 {
        self.kernel_weight * self.importance_weight
    }
}

/// Weighted Monte Carlo representation of `Q_eps(theta | s_obs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CDSample {
    pub draws: Vec<AcceptedDraw>,
    pub s_obs: SummaryVector,
    pub n_proposed: usize,
    /// Proposals whose simulation or summary failed; counted as rejections.
    pub n_failed: usize,
    pub adjusted: bool,
    /// Set when regression adjustment was requested but the design was singular.
    pub adjust_fallback: bool,
    /// Tolerance in effect (boundary distance in proportion mode).
    pub epsilon: f64,
}

impl CDSample {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn param_dim(&self) -> usize {
        self.draws.first().map_or(0, |d| d.theta.len())
    }

    /// Normalized combined weights, summing to one.
    pub fn weights(&self) -> Vec<f64> {
        let raw: Vec<f64> = self.draws.iter().map(AcceptedDraw::weight).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|w| w / total).collect()
    }

    pub fn thetas(&self) -> Vec<&[f64]> {
        self.draws.iter().map(|d| &d.theta[..]).collect()
    }

    pub fn coordinate(&self, coord: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d.theta[coord]).collect()
    }

    pub fn weighted_mean(&self, coord: usize) -> f64 {
        self.draws
            .iter()
            .zip(self.weights())
            .map(|(d, w)| w * d.theta[coord])
            .sum()
    }

    pub fn weighted_variance(&self, coord: usize) -> f64 {
        let m = self.weighted_mean(coord);
        self.draws
            .iter()
            .zip(self.weights())
            .map(|(d, w)| w * (d.theta[coord] - m).powi(2))
            .sum()
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.draws.len() as f64 / self.n_proposed as f64
    }
}

/// Inputs shared by both samplers.
#[derive(Clone, Copy)]
pub struct SamplerSetup<'a> {
    pub model: &'a dyn GenerativeModel,
    pub summary: SummaryKind,
    pub rn: &'a dyn InitialDensity,
    /// Box that proposals are restricted to; required for improper `r_n`.
    pub bounds: &'a Bounds,
    pub acceptance: &'a Acceptance,
    pub n_sims: usize,
    pub s_obs: &'a SummaryVector,
}

struct Proposal {
    theta: ParamVector,
    summary: Option<SummaryVector>,
    distance: f64,
    uniform: f64,
}

fn propose(setup: &SamplerSetup<'_>, stream: SeedStream) -> Result<Vec<Proposal>> {
    if setup.n_sims == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            value: 0.0,
        });
    }
    let scales = setup.acceptance.lambda_scale();
    if scales.len() != setup.s_obs.len() {
        return Err(Error::DimensionMismatch {
            expected: setup.s_obs.len(),
            got: scales.len(),
        });
    }
    let support = setup.model.support().intersect(setup.bounds)?;
    (0..setup.n_sims)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.substream(i as u64);
            let theta = setup.rn.sample(&mut rng, &support)?;
            let summary = setup
                .model
                .simulate(&theta, &mut rng)
                .and_then(|x| setup.summary.compute(&x))
                .ok();
            let distance = summary
                .as_ref()
                .map_or(f64::INFINITY, |s| lambda_distance(scales, s, setup.s_obs));
            let uniform = rng.random::<f64>();
            Ok(Proposal {
                theta,
                summary,
                distance,
                uniform,
            })
        })
        .collect()
}

fn filter(
    setup: &SamplerSetup<'_>,
    proposals: Vec<Proposal>,
    importance: impl Fn(&[f64]) -> f64,
) -> Result<CDSample> {
    let n_proposed = proposals.len();
    let n_failed = proposals.iter().filter(|p| p.summary.is_none()).count();
    let min_distance = proposals.iter().map(|p| p.distance).fold(f64::INFINITY, f64::min);
    let mut keep: Vec<(usize, f64)> = Vec::new();
    let epsilon = match setup.acceptance {
        Acceptance::Fixed(spec) => {
            for (i, p) in proposals.iter().enumerate() {
                if p.distance.is_finite() && p.uniform < kernel_weight(spec, p.distance) {
                    keep.push((i, 1.0));
                }
            }
            spec.epsilon()
        }
        Acceptance::Proportion {
            kind,
            proportion,
            lambda_scale,
        } => {
            let mut records: Vec<DistanceRecord> = proposals
                .iter()
                .enumerate()
                .map(|(index, p)| DistanceRecord {
                    index,
                    distance: p.distance,
                })
                .collect();
            sort_records(&mut records);
            let m = accepted_count(*proportion, n_proposed)?;
            let chosen: Vec<DistanceRecord> = records.into_iter().take(m).filter(|r| r.distance.is_finite()).collect();
            let eps = chosen.last().map_or(f64::INFINITY, |r| r.distance);
            let spec = (eps > 0.0 && eps.is_finite())
                .then(|| KernelSpec::new(*kind, eps, lambda_scale.clone()))
                .transpose()?;
            for r in &chosen {
                let w = match (&spec, kind) {
                    (Some(spec), KernelKind::Gaussian) => kernel_weight(spec, r.distance),
                    _ => 1.0,
                };
                keep.push((r.index, w));
            }
            keep.sort_by_key(|&(i, _)| i);
            eps
        }
    };
    if keep.is_empty() {
        return Err(Error::NoAcceptances { min_distance });
    }
    let mut proposals: Vec<Option<Proposal>> = proposals.into_iter().map(Some).collect();
    let mut draws = Vec::with_capacity(keep.len());
    for (index, kernel_weight) in keep {
        let p = proposals[index].take().expect("each proposal kept once");
        let importance_weight = importance(&p.theta);
        draws.push(AcceptedDraw {
            theta: p.theta,
            summary: p.summary.expect("accepted proposals have summaries"),
            distance: p.distance,
            kernel_weight,
            importance_weight,
            index,
        });
    }
    Ok(CDSample {
        draws,
        s_obs: setup.s_obs.clone(),
        n_proposed,
        n_failed,
        adjusted: false,
        adjust_fallback: false,
        epsilon,
    })
}

/// Accept-reject ACDC: propose from `r_n`, simulate, keep by kernel distance.
pub fn run_acdc(setup: &SamplerSetup<'_>, stream: SeedStream) -> Result<CDSample> {
    let proposals = propose(setup, stream)?;
    filter(setup, proposals, |_| 1.0)
}

/// IS-ABC: the ACDC loop with importance weights `prior / r_n` on accepted draws.
pub fn run_is_abc(setup: &SamplerSetup<'_>, prior: &dyn InitialDensity, stream: SeedStream) -> Result<CDSample> {
    if prior.dim() != setup.rn.dim() {
        return Err(Error::DimensionMismatch {
            expected: setup.rn.dim(),
            got: prior.dim(),
        });
    }
    let proposals = propose(setup, stream)?;
    let sample = filter(setup, proposals, |theta| {
        let w = (prior.ln_density(theta) - setup.rn.ln_density(theta)).exp();
        if w.is_finite() {
            w
        } else {
            0.0
        }
    })?;
    if sample.draws.iter().all(|d| !(d.importance_weight > 0.0)) {
        return Err(Error::ZeroImportanceWeights);
    }
    Ok(sample)
}

/// `(sum w)^2 / sum w^2` over the combined weights.
pub fn effective_sample_size(sample: &CDSample) -> f64 {
    let w = sample.weights();
    let s2: f64 = w.iter().map(|x| x * x).sum();
    1.0 / s2
}
