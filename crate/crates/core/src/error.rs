use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("input list is empty")]
    EmptyInput,

    #[error("invalid value {value} for {name}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("parameter coordinate {coord} = {value} outside support [{lower}, {upper}]")]
    OutOfSupport {
        coord: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("simulation diverged at t = {t} (N_t = {value})")]
    SimulationDiverged { t: usize, value: f64 },

    #[error("degenerate summary: {0} is zero")]
    DegenerateSummary(&'static str),

    #[error("series of length {len} is shorter than the minimum {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("{got} pilot summaries supplied, at least {min} required")]
    TooFewPilots { got: usize, min: usize },

    #[error("acceptance proportion {0} outside (0, 1]")]
    InvalidProportion(f64),

    #[error("no proposal accepted (smallest distance seen {min_distance})")]
    NoAcceptances { min_distance: f64 },

    #[error("all importance weights are zero or non-finite")]
    ZeroImportanceWeights,

    #[error("particle degeneracy: effective sample size {ess:.2} below 10")]
    ParticleDegeneracy { ess: f64 },

    #[error("subset size {size} is below the minimum of 2")]
    SubsetTooSmall { size: usize },

    #[error("point estimator failed on subset {subset}: {source}")]
    Estimator {
        subset: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("design matrix is rank deficient")]
    SingularDesign,

    #[error("weighted scatter matrix is singular")]
    SingularScatter,

    #[error("improper initial density needs a finite sampling box")]
    ImproperWithoutBox,

    #[error("failed to draw inside the sampling box after {attempts} attempts")]
    BoxMiss { attempts: usize },

    #[error("confidence level {0} outside (0, 1)")]
    InvalidLevel(f64),

    #[error("{got} draws available, at least {min} required")]
    NotEnoughDraws { got: usize, min: f64 },

    #[error("effective sample size {ess:.1} below the required {min}")]
    LowEffectiveSampleSize { ess: f64, min: f64 },

    #[error("value {0} outside [0, 1]")]
    OutOfUnitInterval(f64),

    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: &'static str, name: String },
}
