//! Experiment configuration: one TOML file per table row.

use std::path::Path;

use acdc_core::initial_density::{
    make_minibatch_rn, make_windowed_rn, pmc_run, InitialDensity, MinibatchKDE, NormalInitial, PmcSettings,
    ReferenceCoord, ReferenceDensity,
};
use acdc_core::kernels::KernelKind;
use acdc_core::models::{
    Bounds, CauchyFree, CauchyModel, GenerativeModel, NormalMeanModel, ParamVector, RickerCoord, RickerModel,
    RickerParams,
};
use acdc_core::rng::SeedStream;
use acdc_core::summaries::SummaryKind;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{invalid, HarnessError, HarnessResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Row label used in reports, e.g. `cauchy-1`.
    pub setting: String,
    pub replicates: usize,
    pub seed: u64,
    pub model: ModelConfig,
    pub summary: SummaryConfig,
    pub sampler: SamplerConfig,
    pub kernel: KernelConfig,
    pub rn: RnConfig,
    #[serde(default)]
    pub prior: PriorConfig,
    #[serde(default)]
    pub adjust: AdjustConfig,
    #[serde(default)]
    pub inference: InferenceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pit: Option<PitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelConfig {
    NormalMean {
        n: usize,
        theta0: f64,
    },
    Cauchy {
        n: usize,
        free: CauchyFree,
        location: f64,
        scale: f64,
    },
    Ricker {
        #[serde(default = "default_t_len")]
        t_len: usize,
        #[serde(default = "default_burn_in")]
        burn_in: usize,
        #[serde(default = "default_n0")]
        n0: f64,
        log_r: f64,
        log_sigma: f64,
        log_phi: f64,
        free: Vec<RickerCoord>,
    },
}

fn default_t_len() -> usize {
    50
}
fn default_burn_in() -> usize {
    50
}
fn default_n0() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn build(&self) -> HarnessResult<Box<dyn GenerativeModel>> {
        Ok(match *self {
            ModelConfig::NormalMean { n, .. } => Box::new(NormalMeanModel::new(n)),
            ModelConfig::Cauchy {
                n,
                free,
                location,
                scale,
            } => {
                if !(scale > 0.0) {
                    return Err(invalid(format!("cauchy scale must be positive, got {scale}")));
                }
                Box::new(CauchyModel::new(n, free, location, scale))
            }
            ModelConfig::Ricker {
                t_len,
                burn_in,
                n0,
                log_r,
                log_sigma,
                log_phi,
                ref free,
            } => {
                if free.is_empty() {
                    return Err(invalid("ricker model needs at least one free coordinate"));
                }
                let base = RickerParams {
                    log_r,
                    log_sigma,
                    log_phi,
                };
                Box::new(RickerModel::new(t_len, burn_in, n0, base, free.clone()))
            }
        })
    }

    /// True parameter value of the free coordinates.
    pub fn theta0(&self) -> Vec<f64> {
        match *self {
            ModelConfig::NormalMean { theta0, .. } => vec![theta0],
            ModelConfig::Cauchy {
                free, location, scale, ..
            } => match free {
                CauchyFree::Location => vec![location],
                CauchyFree::Scale => vec![scale],
                CauchyFree::Both => vec![location, scale],
            },
            ModelConfig::Ricker {
                log_r,
                log_sigma,
                log_phi,
                ref free,
                ..
            } => free
                .iter()
                .map(|c| match c {
                    RickerCoord::LogR => log_r,
                    RickerCoord::LogSigma => log_sigma,
                    RickerCoord::LogPhi => log_phi,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryConfig {
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Acdc,
    IsAbc,
    Both,
}

/// One sampler arm of a replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Acdc,
    IsAbc,
}

impl Arm {
    pub fn label(self) -> &'static str {
        match self {
            Arm::Acdc => "acdc",
            Arm::IsAbc => "is_abc",
        }
    }

    pub(crate) fn stream_label(self) -> u64 {
        match self {
            Arm::Acdc => 1,
            Arm::IsAbc => 2,
        }
    }
}

impl Algorithm {
    pub fn arms(self) -> Vec<Arm> {
        match self {
            Algorithm::Acdc => vec![Arm::Acdc],
            Algorithm::IsAbc => vec![Arm::IsAbc],
            Algorithm::Both => vec![Arm::Acdc, Arm::IsAbc],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub algorithm: Algorithm,
    #[serde(rename = "N")]
    pub n_sims: usize,
    /// Overrides the top-level seed when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub kind: KernelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proportion: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_pilot")]
    pub pilot_size: usize,
    /// Scale distances by pilot MADs; when false `Lambda = I`.
    #[serde(default = "default_true")]
    pub standardize: bool,
}

fn default_pilot() -> usize {
    500
}
fn default_true() -> bool {
    true
}

/// Finite sampling box, either fixed or centred on a full-data estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoxConfig {
    Fixed { lower: Vec<f64>, upper: Vec<f64> },
    /// `estimate ± half_width`; multiplicative (`estimate * e^{±w}`) for `1/sigma` densities.
    Centered { center: String, half_width: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmcConfig {
    pub particles: usize,
    pub generations: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RnConfig {
    /// KDE over point estimates on random subsets of size `floor(n^nu)`.
    Minibatch {
        #[serde(default = "default_nu")]
        nu: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(default)]
        overlap: bool,
        estimator: String,
    },
    /// KDE over PMC-ABC estimates on contiguous windows of a series.
    Windowed { window: usize, k: usize, pmc: PmcConfig },
    Flat {
        #[serde(rename = "box")]
        bounds: BoxConfig,
    },
    InvScale {
        #[serde(rename = "box")]
        bounds: BoxConfig,
    },
    Normal { mu: f64, b: f64 },
    /// Fixed KDE, for deliberately misspecified initial densities.
    Kde { centers: Vec<Vec<f64>>, bandwidth: Vec<f64> },
}

fn default_nu() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorConfig {
    #[default]
    Flat,
    InvScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustConfig {
    pub enabled: bool,
}

impl Default for AdjustConfig {
    fn default() -> Self {
        AdjustConfig { enabled: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Interval,
    Depth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    pub level: f64,
    pub region: RegionKind,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            level: 0.95,
            region: RegionKind::Interval,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PitScale {
    #[default]
    Identity,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PitConfig {
    #[serde(default)]
    pub scale: PitScale,
}

/// An initial density with the box proposals are confined to.
pub struct BuiltRn {
    pub density: Box<dyn InitialDensity>,
    pub bounds: Bounds,
    /// Model simulations spent building it (PMC estimators).
    pub simulations: usize,
}

/// Point estimator named after a summary: the summary itself evaluated on the subset.
pub fn summary_estimator(name: &str) -> HarnessResult<SummaryKind> {
    match name {
        "median" | "mad" | "median_mad" | "mean" | "sd" | "mean_sd" => Ok(SummaryKind::from_name(name)?),
        other => Err(invalid(format!("unknown point estimator '{other}'"))),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> HarnessResult<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> HarnessResult<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn base_seed(&self) -> u64 {
        self.sampler.seed.unwrap_or(self.seed)
    }

    pub fn summary_kind(&self) -> HarnessResult<SummaryKind> {
        Ok(SummaryKind::from_name(&self.summary.name)?)
    }

    pub fn validate(&self) -> HarnessResult<()> {
        if self.replicates == 0 {
            return Err(invalid("replicates must be at least 1"));
        }
        if self.sampler.n_sims == 0 {
            return Err(invalid("sampler.N must be at least 1"));
        }
        let model = self.model.build()?;
        let theta0 = self.model.theta0();
        model.support().check(&theta0)?;
        let p = model.param_dim();
        let summary = self.summary_kind()?;
        if summary.dim() < p {
            return Err(invalid(format!("summary dimension {} below parameter dimension {p}", summary.dim())));
        }
        match (self.kernel.proportion, self.kernel.epsilon) {
            (Some(prop), None) if prop > 0.0 && prop <= 1.0 => {}
            (None, Some(eps)) if eps > 0.0 => {}
            _ => return Err(invalid("kernel needs exactly one of proportion in (0, 1] or epsilon > 0")),
        }
        if !(self.inference.level > 0.0 && self.inference.level < 1.0) {
            return Err(invalid(format!("inference.level {} outside (0, 1)", self.inference.level)));
        }
        if self.inference.region == RegionKind::Depth && p < 2 {
            return Err(invalid("depth regions need at least two parameters"));
        }
        if let Some(pit) = self.pit {
            if p != 1 {
                return Err(invalid("PIT studies need a scalar parameter"));
            }
            if pit.scale == PitScale::Log && !(theta0[0] > 0.0) {
                return Err(invalid("log-scale PIT needs a positive parameter"));
            }
        }
        let dim_of = |len: usize, what: &str| {
            if len == p {
                Ok(())
            } else {
                Err(invalid(format!("{what} has length {len}, model has {p} parameters")))
            }
        };
        match &self.rn {
            RnConfig::Minibatch { nu, estimator, .. } => {
                if !(*nu > 0.0 && *nu < 1.0) {
                    return Err(invalid(format!("rn.nu {nu} outside (0, 1)")));
                }
                dim_of(summary_estimator(estimator)?.dim(), "rn.estimator")?;
            }
            RnConfig::Windowed { pmc, .. } => {
                dim_of(pmc.lower.len(), "rn.pmc.lower")?;
                dim_of(pmc.upper.len(), "rn.pmc.upper")?;
            }
            RnConfig::Flat { bounds } | RnConfig::InvScale { bounds } => match bounds {
                BoxConfig::Fixed { lower, upper } => {
                    dim_of(lower.len(), "rn.box.lower")?;
                    dim_of(upper.len(), "rn.box.upper")?;
                }
                BoxConfig::Centered { center, half_width } => {
                    dim_of(summary_estimator(center)?.dim(), "rn.box.center")?;
                    dim_of(half_width.len(), "rn.box.half_width")?;
                }
            },
            RnConfig::Normal { b, .. } => {
                dim_of(1, "rn normal")?;
                if !(*b > 0.0) {
                    return Err(invalid("rn.b must be positive"));
                }
            }
            RnConfig::Kde { centers, bandwidth } => {
                if centers.is_empty() {
                    return Err(invalid("rn.centers is empty"));
                }
                for c in centers {
                    dim_of(c.len(), "rn.centers entry")?;
                }
                dim_of(bandwidth.len(), "rn.bandwidth")?;
            }
        }
        Ok(())
    }

    /// Build `r_n` (and its sampling box) from the observed data.
    pub fn build_rn(&self, model: &dyn GenerativeModel, data: &[f64], stream: SeedStream) -> HarnessResult<BuiltRn> {
        let p = model.param_dim();
        match &self.rn {
            RnConfig::Minibatch {
                nu,
                k,
                overlap,
                estimator,
            } => {
                let kind = summary_estimator(estimator)?;
                let est = move |s: &[f64], _: SeedStream| kind.compute(s).and_then(|v| ParamVector::new(v.into_inner()));
                let k = k.unwrap_or_else(|| acdc_core::initial_density::default_subset_count(data.len(), *nu));
                let kde = make_minibatch_rn(data, *nu, k, &est, *overlap, stream)?;
                Ok(BuiltRn {
                    density: Box::new(kde),
                    bounds: Bounds::unbounded(p),
                    simulations: 0,
                })
            }
            RnConfig::Windowed { window, k, pmc } => {
                let settings = PmcSettings {
                    particles: pmc.particles,
                    generations: pmc.generations,
                    prior_box: Bounds::new(pmc.lower.clone(), pmc.upper.clone())?,
                    ..PmcSettings::new(Bounds::unbounded(p), 1)
                };
                let summary = self.summary_kind()?;
                let sims = AtomicUsize::new(0);
                let est = |s: &[f64], st: SeedStream| {
                    let out = pmc_run(s, model, summary, &settings, st)?;
                    sims.fetch_add(out.simulations, Ordering::Relaxed);
                    Ok(out.estimate)
                };
                let kde = make_windowed_rn(data, *window, *k, &est, stream)?;
                Ok(BuiltRn {
                    density: Box::new(kde),
                    bounds: Bounds::unbounded(p),
                    simulations: sims.load(Ordering::Relaxed),
                })
            }
            RnConfig::Flat { bounds } => Ok(BuiltRn {
                density: Box::new(ReferenceDensity::flat(p)),
                bounds: resolve_box(bounds, data, false)?,
                simulations: 0,
            }),
            RnConfig::InvScale { bounds } => Ok(BuiltRn {
                density: Box::new(ReferenceDensity::inv_scale(p)),
                bounds: resolve_box(bounds, data, true)?,
                simulations: 0,
            }),
            RnConfig::Normal { mu, b } => Ok(BuiltRn {
                density: Box::new(NormalInitial::new(*mu, *b)?),
                bounds: Bounds::unbounded(1),
                simulations: 0,
            }),
            RnConfig::Kde { centers, bandwidth } => {
                let centers = centers
                    .iter()
                    .map(|c| ParamVector::new(c.clone()))
                    .collect::<acdc_core::Result<Vec<_>>>()?;
                Ok(BuiltRn {
                    density: Box::new(MinibatchKDE::new(centers, bandwidth.clone(), f64::NAN)?),
                    bounds: Bounds::unbounded(p),
                    simulations: 0,
                })
            }
        }
    }

    /// IS-ABC target density.
    pub fn build_prior(&self, p: usize) -> ReferenceDensity {
        match self.prior {
            PriorConfig::Flat => ReferenceDensity::flat(p),
            PriorConfig::InvScale => ReferenceDensity::new(vec![ReferenceCoord::InvScale; p]),
        }
    }
}

fn resolve_box(cfg: &BoxConfig, data: &[f64], multiplicative: bool) -> HarnessResult<Bounds> {
    match cfg {
        BoxConfig::Fixed { lower, upper } => Ok(Bounds::new(lower.clone(), upper.clone())?),
        BoxConfig::Centered { center, half_width } => {
            let c = summary_estimator(center)?.compute(data)?;
            let (lower, upper) = c
                .iter()
                .zip(half_width)
                .map(|(&c, &w)| if multiplicative { (c * (-w).exp(), c * w.exp()) } else { (c - w, c + w) })
                .unzip();
            Ok(Bounds::new(lower, upper)?)
        }
    }
}
