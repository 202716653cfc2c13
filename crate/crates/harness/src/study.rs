//! Replicates, coverage studies and PIT studies.

use acdc_core::adjust::adjust;
use acdc_core::inference::{cd_value_at, confidence_interval, depth_region, interval_box, pit_uniformity, ConfidenceRegion, PitReport};
use acdc_core::initial_density::InitialDensity;
use acdc_core::kernels::{standardize_scales, Acceptance, KernelSpec};
use acdc_core::models::{Bounds, GenerativeModel, ParamVector};
use acdc_core::rng::{phase, SeedStream};
use acdc_core::samplers::{effective_sample_size, run_acdc, run_is_abc, CDSample, SamplerSetup};
use acdc_core::summaries::{median, SummaryKind, SummaryVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Arm, ExperimentConfig, PitScale, RegionKind};
use crate::error::{HarnessError, HarnessResult};

/// Largest tolerated share of failed replicates per arm.
pub const MAX_FAILURE_SHARE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmOutcome {
    pub covered: bool,
    pub size: f64,
    pub ess: f64,
    pub accepted: usize,
    pub n_failed: usize,
    pub adjust_fallback: bool,
    pub unstable: bool,
    /// `H_n(theta0)` for scalar parameters.
    pub cd_value: Option<f64>,
    pub region: ConfidenceRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmRecord {
    pub arm: Arm,
    pub outcome: Result<ArmOutcome, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub index: usize,
    pub arms: Vec<ArmRecord>,
    /// Pilot and minibatch-estimator simulations.
    pub setup_simulations: usize,
    pub sampler_simulations: usize,
}

struct Setup {
    model: Box<dyn GenerativeModel>,
    summary: SummaryKind,
    theta0: Vec<f64>,
    s_obs: SummaryVector,
    rn: Box<dyn InitialDensity>,
    bounds: Bounds,
    acceptance: Acceptance,
    simulations: usize,
}

fn prepare(cfg: &ExperimentConfig, root: SeedStream) -> HarnessResult<Setup> {
    let model = cfg.model.build()?;
    let summary = cfg.summary_kind()?;
    let theta0 = cfg.model.theta0();
    let data = model.simulate(&theta0, &mut root.derive(phase::DATA).rng())?;
    let s_obs = summary.compute(&data)?;
    let built = cfg.build_rn(model.as_ref(), &data, root.derive(phase::MINIBATCH))?;
    let bounds = model.support().intersect(&built.bounds)?;
    let mut simulations = built.simulations;

    let scales = if cfg.kernel.standardize {
        let mut rng = root.derive(phase::PILOT).rng();
        let mut pilots = Vec::with_capacity(cfg.kernel.pilot_size);
        for _ in 0..cfg.kernel.pilot_size {
            let theta = built.density.sample(&mut rng, &bounds)?;
            simulations += 1;
            if let Ok(s) = model.simulate(&theta, &mut rng).and_then(|x| summary.compute(&x)) {
                pilots.push(s);
            }
        }
        standardize_scales(&pilots)?
    } else {
        vec![1.0; summary.dim()]
    };
    let acceptance = match (cfg.kernel.proportion, cfg.kernel.epsilon) {
        (Some(p), _) => Acceptance::proportion(cfg.kernel.kind, p, scales)?,
        (None, Some(eps)) => Acceptance::Fixed(KernelSpec::new(cfg.kernel.kind, eps, scales)?),
        (None, None) => return Err(HarnessError::Config("kernel needs proportion or epsilon".into())),
    };
    Ok(Setup {
        model,
        summary,
        theta0,
        s_obs,
        rn: built.density,
        bounds,
        acceptance,
        simulations,
    })
}

fn log_transformed(sample: &CDSample) -> acdc_core::Result<CDSample> {
    let mut out = sample.clone();
    for d in &mut out.draws {
        if let Some(&bad) = d.theta.iter().find(|&&t| !(t > 0.0)) {
            return Err(acdc_core::Error::InvalidParameter {
                name: "log-scale draw",
                value: bad,
            });
        }
        d.theta = ParamVector::new(d.theta.iter().map(|t| t.ln()).collect())?;
    }
    Ok(out)
}

fn arm_sample(cfg: &ExperimentConfig, setup: &Setup, arm: Arm, stream: SeedStream) -> HarnessResult<CDSample> {
    let sampler = SamplerSetup {
        model: setup.model.as_ref(),
        summary: setup.summary,
        rn: setup.rn.as_ref(),
        bounds: &setup.bounds,
        acceptance: &setup.acceptance,
        n_sims: cfg.sampler.n_sims,
        s_obs: &setup.s_obs,
    };
    let raw = match arm {
        Arm::Acdc => run_acdc(&sampler, stream)?,
        Arm::IsAbc => {
            let prior = cfg.build_prior(setup.model.param_dim());
            run_is_abc(&sampler, &prior, stream)?
        }
    };
    Ok(if cfg.adjust.enabled { adjust(&raw)? } else { raw })
}

fn run_arm(cfg: &ExperimentConfig, setup: &Setup, arm: Arm, stream: SeedStream) -> HarnessResult<ArmOutcome> {
    let sample = arm_sample(cfg, setup, arm, stream)?;
    let level = cfg.inference.level;
    let region = match (cfg.inference.region, sample.param_dim()) {
        (RegionKind::Interval, 1) => confidence_interval(&sample, 0, level)?,
        (RegionKind::Interval, _) => interval_box(&sample, level)?,
        (RegionKind::Depth, _) => depth_region(&sample, level)?,
    };
    let covered = region.contains(&setup.theta0)?;
    let cd_value = if sample.param_dim() == 1 {
        let scale = cfg.pit.map(|p| p.scale).unwrap_or_default();
        Some(match scale {
            PitScale::Identity => cd_value_at(&sample, 0, setup.theta0[0]),
            PitScale::Log => cd_value_at(&log_transformed(&sample)?, 0, setup.theta0[0].ln()),
        })
    } else {
        None
    };
    Ok(ArmOutcome {
        covered,
        size: region.size(),
        ess: effective_sample_size(&sample),
        accepted: sample.len(),
        n_failed: sample.n_failed,
        adjust_fallback: sample.adjust_fallback,
        unstable: region.unstable,
        cd_value,
        region,
    })
}

fn arm_stream(root: SeedStream, arm: Arm) -> SeedStream {
    root.derive(phase::SAMPLER).derive(arm.stream_label())
}

/// The final (adjusted) CD samples of every arm for one replicate.
pub fn replicate_samples(cfg: &ExperimentConfig, index: usize) -> HarnessResult<Vec<(Arm, CDSample)>> {
    let root = SeedStream::new(cfg.base_seed()).derive(index as u64);
    let setup = prepare(cfg, root)?;
    cfg.sampler
        .algorithm
        .arms()
        .into_iter()
        .map(|arm| Ok((arm, arm_sample(cfg, &setup, arm, arm_stream(root, arm))?)))
        .collect()
}

/// One replicate: data under `theta0`, `r_n`, every configured arm on the same data.
pub fn run_replicate(cfg: &ExperimentConfig, index: usize) -> ReplicateRecord {
    let root = SeedStream::new(cfg.base_seed()).derive(index as u64);
    let arms = cfg.sampler.algorithm.arms();
    match prepare(cfg, root) {
        Ok(setup) => {
            let records = arms
                .iter()
                .map(|&arm| ArmRecord {
                    arm,
                    outcome: run_arm(cfg, &setup, arm, arm_stream(root, arm))
                        .map_err(|e| e.to_string()),
                })
                .collect();
            ReplicateRecord {
                index,
                arms: records,
                setup_simulations: setup.simulations,
                sampler_simulations: arms.len() * cfg.sampler.n_sims,
            }
        }
        Err(e) => ReplicateRecord {
            index,
            arms: arms
                .iter()
                .map(|&arm| ArmRecord {
                    arm,
                    outcome: Err(format!("setup: {e}")),
                })
                .collect(),
            setup_simulations: 0,
            sampler_simulations: 0,
        },
    }
}

pub fn run_replicates(cfg: &ExperimentConfig) -> Vec<ReplicateRecord> {
    (0..cfg.replicates).into_par_iter().map(|i| run_replicate(cfg, i)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    pub arm: Arm,
    pub replicates: usize,
    pub failed: usize,
    pub coverage: f64,
    pub coverage_se: f64,
    pub median_size: f64,
    pub median_ess: f64,
    pub mean_accepted: f64,
    pub adjust_fallbacks: usize,
    /// Set when more than 20% of replicates failed; statistics are then not reported.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub setting: String,
    pub acceptance_proportion: Option<f64>,
    pub epsilon: Option<f64>,
    pub level: f64,
    pub arms: Vec<ArmSummary>,
    /// Median over paired replicates of ACDC size / IS-ABC size.
    pub ratio: Option<f64>,
    pub paired: usize,
    pub sampler_simulations: usize,
    pub setup_simulations: usize,
}

fn median_or_nan(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        median(values)
    }
}

/// Aggregate replicate records. An arm losing more than 20% of its replicates is
/// reported as failed; the study fails when every arm does.
pub fn summarize(cfg: &ExperimentConfig, records: &[ReplicateRecord]) -> HarnessResult<CoverageReport> {
    let total = records.len();
    let mut arms = Vec::new();
    let mut failures = Vec::new();
    for arm in cfg.sampler.algorithm.arms() {
        let outcomes: Vec<&Result<ArmOutcome, String>> = records
            .iter()
            .flat_map(|r| r.arms.iter().filter(|a| a.arm == arm).map(|a| &a.outcome))
            .collect();
        let ok: Vec<&ArmOutcome> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
        let failed = outcomes.len() - ok.len();
        let m = ok.len();
        let error = (failed as f64 > MAX_FAILURE_SHARE * total as f64).then(|| {
            let first = outcomes
                .iter()
                .find_map(|o| o.as_ref().err().cloned())
                .unwrap_or_default();
            failures.push(HarnessError::TooManyFailures {
                algorithm: arm.label().into(),
                failed,
                total,
                first: first.clone(),
            });
            format!("{failed} of {total} replicates failed (first error: {first})")
        });
        let coverage = if m == 0 || error.is_some() {
            f64::NAN
        } else {
            ok.iter().filter(|o| o.covered).count() as f64 / m as f64
        };
        let stat = |v: Vec<f64>| if error.is_some() { f64::NAN } else { median_or_nan(&v) };
        arms.push(ArmSummary {
            arm,
            replicates: m,
            failed,
            coverage,
            coverage_se: (coverage * (1.0 - coverage) / m as f64).sqrt(),
            median_size: stat(ok.iter().map(|o| o.size).collect()),
            median_ess: stat(ok.iter().map(|o| o.ess).collect()),
            mean_accepted: ok.iter().map(|o| o.accepted as f64).sum::<f64>() / m.max(1) as f64,
            adjust_fallbacks: ok.iter().filter(|o| o.adjust_fallback).count(),
            error,
        });
    }
    if failures.len() == arms.len() {
        return Err(failures.swap_remove(0));
    }
    let any_failed = arms.iter().any(|a| a.error.is_some());
    let ratios: Vec<f64> = records
        .iter()
        .filter_map(|r| {
            let size = |arm: Arm| {
                r.arms
                    .iter()
                    .find(|a| a.arm == arm)
                    .and_then(|a| a.outcome.as_ref().ok())
                    .map(|o| o.size)
            };
            match (size(Arm::Acdc), size(Arm::IsAbc)) {
                (Some(a), Some(b)) if b > 0.0 && !any_failed => Some(a / b),
                _ => None,
            }
        })
        .collect();
    Ok(CoverageReport {
        setting: cfg.setting.clone(),
        acceptance_proportion: cfg.kernel.proportion,
        epsilon: cfg.kernel.epsilon,
        level: cfg.inference.level,
        arms,
        ratio: (!ratios.is_empty()).then(|| median(&ratios)),
        paired: ratios.len(),
        sampler_simulations: records.iter().map(|r| r.sampler_simulations).sum(),
        setup_simulations: records.iter().map(|r| r.setup_simulations).sum(),
    })
}

pub fn run_coverage_study(cfg: &ExperimentConfig) -> HarnessResult<CoverageReport> {
    cfg.validate()?;
    summarize(cfg, &run_replicates(cfg))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PitStudy {
    pub setting: String,
    pub values: Vec<f64>,
    pub failed: usize,
    pub report: PitReport,
}

/// `H_n(theta0)` over replicates from the first configured arm, tested for uniformity.
pub fn run_pit_study(cfg: &ExperimentConfig) -> HarnessResult<PitStudy> {
    cfg.validate()?;
    if cfg.model.theta0().len() != 1 {
        return Err(HarnessError::Config("PIT studies need a scalar parameter".into()));
    }
    pit_from_records(cfg, &run_replicates(cfg))
}

pub fn pit_from_records(cfg: &ExperimentConfig, records: &[ReplicateRecord]) -> HarnessResult<PitStudy> {
    let arm = cfg.sampler.algorithm.arms()[0];
    let outcomes: Vec<Result<f64, String>> = records
        .iter()
        .map(|r| {
            let rec = r.arms.iter().find(|a| a.arm == arm).expect("arm present");
            rec.outcome
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|o| o.cd_value.ok_or_else(|| "no CD value".into()))
        })
        .collect();
    let values: Vec<f64> = outcomes.iter().filter_map(|o| o.as_ref().ok().copied()).collect();
    let failed = outcomes.len() - values.len();
    if failed as f64 > MAX_FAILURE_SHARE * outcomes.len() as f64 {
        return Err(HarnessError::TooManyFailures {
            algorithm: arm.label().into(),
            failed,
            total: outcomes.len(),
            first: outcomes.iter().find_map(|o| o.as_ref().err().cloned()).unwrap_or_default(),
        });
    }
    let report = pit_uniformity(&values)?;
    Ok(PitStudy {
        setting: cfg.setting.clone(),
        values,
        failed,
        report,
    })
}
