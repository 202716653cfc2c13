//! Built-in experiment settings for the Cauchy and Ricker coverage tables and
//! the PIT studies.

use acdc_core::kernels::KernelKind;
use acdc_core::models::{CauchyFree, RickerCoord};

use crate::config::{
    AdjustConfig, Algorithm, BoxConfig, ExperimentConfig, InferenceConfig, KernelConfig, ModelConfig, PitConfig,
    PitScale, PmcConfig, PriorConfig, RegionKind, RnConfig, SamplerConfig, SummaryConfig,
};
use crate::error::{invalid, HarnessResult};

pub const PROPORTIONS: [f64; 3] = [0.005, 0.05, 0.10];
pub const CAUCHY_LOCATION: f64 = 10.0;
pub const CAUCHY_SCALE: f64 = 0.55;
pub const RICKER_LOG_R: f64 = 3.8;
pub const DEFAULT_SEED: u64 = 20_240_601;

fn ricker_log_sigma() -> f64 {
    0.3f64.ln()
}

fn ricker_log_phi() -> f64 {
    10f64.ln()
}

fn uniform_proportion(proportion: f64) -> KernelConfig {
    KernelConfig {
        kind: KernelKind::Uniform,
        proportion: Some(proportion),
        epsilon: None,
        pilot_size: 500,
        standardize: true,
    }
}

fn proportion_tag(proportion: f64) -> String {
    format!("{proportion}").replace('.', "p")
}

/// Cauchy settings 1-5: n = 400 from Cauchy(10, 0.55).
pub fn cauchy_setting(setting: usize, proportion: f64) -> HarnessResult<ExperimentConfig> {
    let (free, summary, estimator, region) = match setting {
        1 => (CauchyFree::Location, "median", "median", RegionKind::Interval),
        2 => (CauchyFree::Location, "mean", "median", RegionKind::Interval),
        3 => (CauchyFree::Scale, "mad", "mad", RegionKind::Interval),
        4 => (CauchyFree::Both, "mean_sd", "median_mad", RegionKind::Depth),
        5 => (CauchyFree::Both, "median_mad", "median_mad", RegionKind::Depth),
        other => return Err(invalid(format!("no Cauchy setting {other}"))),
    };
    Ok(ExperimentConfig {
        setting: format!("cauchy-{setting}-p{}", proportion_tag(proportion)),
        replicates: 200,
        seed: DEFAULT_SEED + setting as u64,
        model: ModelConfig::Cauchy {
            n: 400,
            free,
            location: CAUCHY_LOCATION,
            scale: CAUCHY_SCALE,
        },
        summary: SummaryConfig { name: summary.into() },
        sampler: SamplerConfig {
            algorithm: Algorithm::Both,
            n_sims: 10_000,
            seed: None,
        },
        kernel: uniform_proportion(proportion),
        rn: RnConfig::Minibatch {
            nu: 0.5,
            k: None,
            overlap: false,
            estimator: estimator.into(),
        },
        prior: PriorConfig::Flat,
        adjust: AdjustConfig { enabled: true },
        inference: InferenceConfig {
            level: 0.95,
            region,
        },
        pit: None,
        output: None,
    })
}

fn ricker_box(coord: RickerCoord) -> (f64, f64) {
    match coord {
        RickerCoord::LogR => (2.0, 6.0),
        RickerCoord::LogSigma => (0.05f64.ln(), 1.5f64.ln()),
        RickerCoord::LogPhi => (2f64.ln(), 30f64.ln()),
    }
}

/// Ricker settings 1-5: T = 50 observations after 50 burn-in steps.
pub fn ricker_setting(setting: usize, proportion: f64) -> HarnessResult<ExperimentConfig> {
    use RickerCoord::*;
    let free = match setting {
        1 => vec![LogR],
        2 => vec![LogSigma],
        3 => vec![LogPhi],
        4 => vec![LogR, LogSigma],
        5 => vec![LogR, LogPhi],
        other => return Err(invalid(format!("no Ricker setting {other}"))),
    };
    let (lower, upper) = free.iter().map(|&c| ricker_box(c)).unzip();
    let region = if free.len() == 1 {
        RegionKind::Interval
    } else {
        RegionKind::Depth
    };
    Ok(ExperimentConfig {
        setting: format!("ricker-{setting}-p{}", proportion_tag(proportion)),
        replicates: 50,
        seed: DEFAULT_SEED + 100 + setting as u64,
        model: ModelConfig::Ricker {
            t_len: 50,
            burn_in: 50,
            n0: 1.0,
            log_r: RICKER_LOG_R,
            log_sigma: ricker_log_sigma(),
            log_phi: ricker_log_phi(),
            free,
        },
        summary: SummaryConfig {
            name: "ricker13".into(),
        },
        sampler: SamplerConfig {
            algorithm: Algorithm::Both,
            n_sims: 10_000,
            seed: None,
        },
        kernel: uniform_proportion(proportion),
        rn: RnConfig::Windowed {
            window: 10,
            k: 40,
            pmc: PmcConfig {
                particles: 200,
                generations: 3,
                lower,
                upper,
            },
        },
        prior: PriorConfig::Flat,
        adjust: AdjustConfig { enabled: true },
        inference: InferenceConfig {
            level: 0.95,
            region,
        },
        pit: None,
        output: None,
    })
}

/// Normal location with a flat initial density on `xbar ± 2`.
pub fn pit_normal() -> ExperimentConfig {
    ExperimentConfig {
        setting: "pit-normal-flat".into(),
        replicates: 500,
        seed: DEFAULT_SEED + 200,
        model: ModelConfig::NormalMean { n: 20, theta0: 0.0 },
        summary: SummaryConfig { name: "mean".into() },
        sampler: SamplerConfig {
            algorithm: Algorithm::Acdc,
            n_sims: 20_000,
            seed: None,
        },
        kernel: KernelConfig {
            kind: KernelKind::Uniform,
            proportion: None,
            epsilon: Some(0.05),
            pilot_size: 0,
            standardize: false,
        },
        rn: RnConfig::Flat {
            bounds: BoxConfig::Centered {
                center: "mean".into(),
                half_width: vec![2.0],
            },
        },
        prior: PriorConfig::Flat,
        adjust: AdjustConfig { enabled: true },
        inference: InferenceConfig::default(),
        pit: Some(PitConfig {
            scale: PitScale::Identity,
        }),
        output: None,
    }
}

/// Cauchy scale with known location, `r_n ∝ 1/tau` on `MAD e^{±1/2}`.
pub fn pit_scale() -> ExperimentConfig {
    ExperimentConfig {
        setting: "pit-cauchy-scale".into(),
        replicates: 500,
        seed: DEFAULT_SEED + 201,
        model: ModelConfig::Cauchy {
            n: 100,
            free: CauchyFree::Scale,
            location: CAUCHY_LOCATION,
            scale: CAUCHY_SCALE,
        },
        summary: SummaryConfig { name: "mad".into() },
        sampler: SamplerConfig {
            algorithm: Algorithm::Acdc,
            n_sims: 5_000,
            seed: None,
        },
        kernel: KernelConfig {
            kind: KernelKind::Uniform,
            proportion: None,
            epsilon: Some(0.02),
            pilot_size: 0,
            standardize: false,
        },
        rn: RnConfig::InvScale {
            bounds: BoxConfig::Centered {
                center: "mad".into(),
                half_width: vec![0.5],
            },
        },
        prior: PriorConfig::InvScale,
        adjust: AdjustConfig { enabled: true },
        inference: InferenceConfig::default(),
        pit: Some(PitConfig { scale: PitScale::Log }),
        output: None,
    }
}

/// Normal location with a near point-mass initial density at `theta0 + 0.5`.
pub fn pit_misspecified() -> ExperimentConfig {
    ExperimentConfig {
        setting: "pit-normal-misspecified".into(),
        replicates: 200,
        seed: DEFAULT_SEED + 202,
        model: ModelConfig::NormalMean { n: 20, theta0: 0.0 },
        summary: SummaryConfig { name: "mean".into() },
        sampler: SamplerConfig {
            algorithm: Algorithm::Acdc,
            n_sims: 2_000,
            seed: None,
        },
        kernel: uniform_proportion(0.05),
        rn: RnConfig::Kde {
            centers: vec![vec![0.5]],
            bandwidth: vec![1e-6],
        },
        prior: PriorConfig::Flat,
        adjust: AdjustConfig { enabled: true },
        inference: InferenceConfig::default(),
        pit: Some(PitConfig::default()),
        output: None,
    }
}

/// Every shipped table-row config, keyed by file stem.
pub fn all_table_rows() -> HarnessResult<Vec<ExperimentConfig>> {
    let mut out = Vec::new();
    for s in 1..=5 {
        for p in PROPORTIONS {
            out.push(cauchy_setting(s, p)?);
        }
    }
    for s in 1..=5 {
        for p in PROPORTIONS {
            out.push(ricker_setting(s, p)?);
        }
    }
    out.extend([pit_normal(), pit_scale(), pit_misspecified()]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates_and_roundtrips() {
        for cfg in all_table_rows().unwrap() {
            cfg.validate().unwrap();
            let text = cfg.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg, "{}", cfg.setting);
        }
    }

    #[test]
    fn setting_labels_are_unique() {
        let rows = all_table_rows().unwrap();
        let mut names: Vec<_> = rows.iter().map(|c| c.setting.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), rows.len());
        assert_eq!(cauchy_setting(1, 0.05).unwrap().setting, "cauchy-1-p0p05");
    }

    #[test]
    fn unknown_settings_rejected() {
        assert!(cauchy_setting(6, 0.05).is_err());
        assert!(ricker_setting(0, 0.05).is_err());
    }
}
