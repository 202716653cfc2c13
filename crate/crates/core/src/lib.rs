//! Likelihood-free inference by approximate confidence distribution computing (ACDC).
//!
//! The crate provides the two samplers (accept-reject ACDC and importance-sampling
//! ABC), the data-driven minibatch initial density, linear regression adjustment,
//! and the interval / depth-contour region builders that turn a weighted sample
//! into frequentist confidence sets.
//!
//! ```no_run
//! use acdc_core::models::{CauchyModel, GenerativeModel};
//! use acdc_core::summaries::SummaryKind;
//! use acdc_core::initial_density::ReferenceDensity;
//! use acdc_core::kernels::{Acceptance, KernelKind};
//! use acdc_core::samplers::{run_acdc, SamplerSetup};
//! use acdc_core::rng::SeedStream;
//!
//! let model = CauchyModel::location(400, 0.55);
//! let stream = SeedStream::new(7);
//! let data = model.simulate(&[10.0], &mut stream.derive(0).rng()).unwrap();
//! let s_obs = SummaryKind::from_name("median").unwrap().compute(&data).unwrap();
//! let rn = ReferenceDensity::flat(1);
//! let bounds = acdc_core::models::Bounds::new(vec![9.0], vec![11.0]).unwrap();
//! let acceptance = Acceptance::proportion(KernelKind::Uniform, 0.05, vec![1.0]).unwrap();
//! let setup = SamplerSetup {
//!     model: &model,
//!     summary: SummaryKind::from_name("median").unwrap(),
//!     rn: &rn,
//!     bounds: &bounds,
//!     acceptance: &acceptance,
//!     n_sims: 10_000,
//!     s_obs: &s_obs,
//! };
//! let sample = run_acdc(&setup, stream.derive(1)).unwrap();
//! assert_eq!(sample.draws.len(), 500);
//! ```

pub mod adjust;
pub mod error;
pub mod inference;
pub mod initial_density;
pub mod kernels;
pub mod linalg;
pub mod models;
pub mod oracle_normal;
pub mod rng;
pub mod samplers;
pub mod summaries;

pub use error::{Error, Result};
