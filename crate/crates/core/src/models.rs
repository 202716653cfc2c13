//! Generative models: the Normal mean model, the Cauchy location-scale family and
//! the Ricker map with Poisson observations.

use std::ops::Deref;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Latent Ricker states above this are treated as a diverged simulation.
pub const RICKER_OVERFLOW: f64 = 1e12;

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// A point in the parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        check_finite(&values)?;
        Ok(ParamVector(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Observed or simulated data: a nonempty vector of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset(Vec<f64>);

impl Dataset {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        check_finite(&values)?;
        Ok(Dataset(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Dataset {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Closed per-coordinate box `[lower_j, upper_j]`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (&lo, &hi) in lower.iter().zip(&upper) {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::InvalidParameter {
                    name: "bounds",
                    value: lo,
                });
            }
        }
        Ok(Bounds { lower, upper })
    }

    pub fn unbounded(dim: usize) -> Self {
        Bounds {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_finite(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| x >= lo && x <= hi)
    }

    /// Validates `theta` against the box and reports the first violating coordinate.
    pub fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        for (coord, (&x, (&lower, &upper))) in theta
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .enumerate()
        {
            if !(x >= lower && x <= upper) {
                return Err(Error::OutOfSupport {
                    coord,
                    value: x,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }

    /// Coordinate-wise intersection with another box of the same dimension.
    pub fn intersect(&self, other: &Bounds) -> Result<Bounds> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let lower = self
            .lower
            .iter()
            .zip(&other.lower)
            .map(|(a, b)| a.max(*b))
            .collect();
        let upper = self
            .upper
            .iter()
            .zip(&other.upper)
            .map(|(a, b)| a.min(*b))
            .collect();
        Bounds::new(lower, upper)
    }
}

/// A simulator `M_theta` whose likelihood is treated as intractable.
///
/// `simulate` is a pure function of `(theta, sample size, rng state)` and must
/// reject parameters outside [`GenerativeModel::support`].
pub trait GenerativeModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn param_dim(&self) -> usize;
    fn support(&self) -> &Bounds;
    /// Number of observations (or series length) produced by `simulate`.
    fn sample_size(&self) -> usize;
    fn simulate(&self, theta: &[f64], rng: &mut dyn RngCore) -> Result<Dataset>;
    /// Same model with a different sample size, used on data subsets.
    fn resized(&self, n: usize) -> Box<dyn GenerativeModel>;
}

pub fn simulate_normal(mean: f64, n: usize, rng: &mut dyn RngCore) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if !mean.is_finite() {
        return Err(Error::InvalidParameter { name: "mean", value: mean });
    }
    let values = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            mean + z
        })
        .collect();
    Dataset::new(values)
}

/// Inverse-CDF Cauchy draws `loc + scale * tan(pi (U - 1/2))`.
pub fn simulate_cauchy(loc: f64, scale: f64, n: usize, rng: &mut dyn RngCore) -> Result<Dataset> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter { name: "scale", value: scale });
    }
    if !loc.is_finite() {
        return Err(Error::InvalidParameter { name: "loc", value: loc });
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        // open interval keeps tan finite
        let u: f64 = rng.random();
        if u == 0.0 {
            continue;
        }
        values.push(loc + scale * (std::f64::consts::PI * (u - 0.5)).tan());
    }
    Dataset::new(values)
}

/// Ricker parameters on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RickerParams {
    pub log_r: f64,
    pub log_sigma: f64,
    pub log_phi: f64,
}

impl RickerParams {
    pub fn r(&self) -> f64 {
        self.log_r.exp()
    }
    pub fn sigma(&self) -> f64 {
        self.log_sigma.exp()
    }
    pub fn phi(&self) -> f64 {
        self.log_phi.exp()
    }

    fn get(&self, coord: RickerCoord) -> f64 {
        match coord {
            RickerCoord::LogR => self.log_r,
            RickerCoord::LogSigma => self.log_sigma,
            RickerCoord::LogPhi => self.log_phi,
        }
    }

    fn set(&mut self, coord: RickerCoord, value: f64) {
        match coord {
            RickerCoord::LogR => self.log_r = value,
            RickerCoord::LogSigma => self.log_sigma = value,
            RickerCoord::LogPhi => self.log_phi = value,
        }
    }
}

/// How the Ricker observation layer turns `phi * N_t` into data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationMode {
    Poisson,
    /// Emits the Poisson mean itself; deterministic, for testing the latent map.
    Mean,
}

/// Iterates `N_t = r N_{t-1} exp(-N_{t-1} + e_t)` for `steps` steps from `n0`.
///
/// `noise` supplies the standardized innovations; they are scaled by sigma.
pub fn ricker_latent(
    params: &RickerParams,
    steps: usize,
    n0: f64,
    mut noise: impl FnMut() -> f64,
) -> Result<Vec<f64>> {
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::InvalidParameter { name: "N0", value: n0 });
    }
    let r = params.r();
    let sigma = params.sigma();
    let mut states = Vec::with_capacity(steps);
    let mut current = n0;
    for t in 1..=steps {
        let e = sigma * noise();
        let next = r * current * (-current + e).exp();
        if !next.is_finite() || next > RICKER_OVERFLOW || next <= 0.0 {
            return Err(Error::SimulationDiverged { t, value: next });
        }
        states.push(next);
        current = next;
    }
    Ok(states)
}

pub fn simulate_ricker_with(
    params: &RickerParams,
    t_len: usize,
    burn_in: usize,
    n0: f64,
    rng: &mut dyn RngCore,
    mode: ObservationMode,
) -> Result<Dataset> {
    if t_len == 0 {
        return Err(Error::EmptyDataset);
    }
    let sigma = params.sigma();
    let states = if sigma == 0.0 {
        ricker_latent(params, burn_in + t_len, n0, || 0.0)?
    } else {
        let mut draw = || -> f64 { StandardNormal.sample(&mut *rng) };
        ricker_latent(params, burn_in + t_len, n0, &mut draw)?
    };
    let phi = params.phi();
    let mut values = Vec::with_capacity(t_len);
    for &n in &states[burn_in..] {
        let mean = phi * n;
        let y = match mode {
            ObservationMode::Mean => mean,
            ObservationMode::Poisson if mean <= 0.0 => 0.0,
            ObservationMode::Poisson => Poisson::new(mean)
                .map_err(|_| Error::InvalidParameter { name: "phi*N_t", value: mean })?
                .sample(&mut *rng),
        };
        values.push(y);
    }
    Dataset::new(values)
}

/// Ricker series of length `t_len` observed after `burn_in` discarded steps.
pub fn simulate_ricker(
    params: &RickerParams,
    t_len: usize,
    burn_in: usize,
    n0: f64,
    rng: &mut dyn RngCore,
) -> Result<Dataset> {
    simulate_ricker_with(params, t_len, burn_in, n0, rng, ObservationMode::Poisson)
}

/// Normal observations with unknown mean and unit variance.
#[derive(Debug, Clone)]
pub struct NormalMeanModel {
    n: usize,
    support: Bounds,
}

impl NormalMeanModel {
    pub fn new(n: usize) -> Self {
        NormalMeanModel {
            n,
            support: Bounds::unbounded(1),
        }
    }
}

impl GenerativeModel for NormalMeanModel {
    fn name(&self) -> &'static str {
        "normal"
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn support(&self) -> &Bounds {
        &self.support
    }
    fn sample_size(&self) -> usize {
        self.n
    }
    fn simulate(&self, theta: &[f64], rng: &mut dyn RngCore) -> Result<Dataset> {
        self.support.check(theta)?;
        simulate_normal(theta[0], self.n, rng)
    }
    fn resized(&self, n: usize) -> Box<dyn GenerativeModel> {
        Box::new(NormalMeanModel::new(n))
    }
}

/// Which Cauchy parameters are free; the rest stay at their fixed values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CauchyFree {
    Location,
    Scale,
    Both,
}

#[derive(Debug, Clone)]
pub struct CauchyModel {
    n: usize,
    loc: f64,
    scale: f64,
    free: CauchyFree,
    support: Bounds,
}

impl CauchyModel {
    pub fn new(n: usize, free: CauchyFree, loc: f64, scale: f64) -> Self {
        let support = match free {
            CauchyFree::Location => Bounds::unbounded(1),
            CauchyFree::Scale => Bounds {
                lower: vec![f64::MIN_POSITIVE],
                upper: vec![f64::INFINITY],
            },
            CauchyFree::Both => Bounds {
                lower: vec![f64::NEG_INFINITY, f64::MIN_POSITIVE],
                upper: vec![f64::INFINITY, f64::INFINITY],
            },
        };
        CauchyModel {
            n,
            loc,
            scale,
            free,
            support,
        }
    }

    /// Unknown location with known `scale`.
    pub fn location(n: usize, scale: f64) -> Self {
        CauchyModel::new(n, CauchyFree::Location, 0.0, scale)
    }

    /// Unknown scale with known `loc`.
    pub fn scale(n: usize, loc: f64) -> Self {
        CauchyModel::new(n, CauchyFree::Scale, loc, 1.0)
    }

    pub fn both(n: usize) -> Self {
        CauchyModel::new(n, CauchyFree::Both, 0.0, 1.0)
    }

    pub fn free(&self) -> CauchyFree {
        self.free
    }

    fn loc_scale(&self, theta: &[f64]) -> (f64, f64) {
        match self.free {
            CauchyFree::Location => (theta[0], self.scale),
            CauchyFree::Scale => (self.loc, theta[0]),
            CauchyFree::Both => (theta[0], theta[1]),
        }
    }
}

impl GenerativeModel for CauchyModel {
    fn name(&self) -> &'static str {
        "cauchy"
    }
    fn param_dim(&self) -> usize {
        self.support.dim()
    }
    fn support(&self) -> &Bounds {
        &self.support
    }
    fn sample_size(&self) -> usize {
        self.n
    }
    fn simulate(&self, theta: &[f64], rng: &mut dyn RngCore) -> Result<Dataset> {
        self.support.check(theta)?;
        let (loc, scale) = self.loc_scale(theta);
        simulate_cauchy(loc, scale, self.n, rng)
    }
    fn resized(&self, n: usize) -> Box<dyn GenerativeModel> {
        Box::new(CauchyModel { n, ..self.clone() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RickerCoord {
    LogR,
    LogSigma,
    LogPhi,
}

impl RickerCoord {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "log_r" => Ok(RickerCoord::LogR),
            "log_sigma" => Ok(RickerCoord::LogSigma),
            "log_phi" => Ok(RickerCoord::LogPhi),
            _ => Err(Error::UnknownName {
                kind: "ricker parameter",
                name: name.to_string(),
            }),
        }
    }
}

/// Ricker map where `free` coordinates are inferred and the others fixed at `base`.
#[derive(Debug, Clone)]
pub struct RickerModel {
    t_len: usize,
    burn_in: usize,
    n0: f64,
    base: RickerParams,
    free: Vec<RickerCoord>,
    support: Bounds,
}

impl RickerModel {
    pub fn new(t_len: usize, burn_in: usize, n0: f64, base: RickerParams, free: Vec<RickerCoord>) -> Self {
        let support = Bounds::unbounded(free.len());
        RickerModel {
            t_len,
            burn_in,
            n0,
            base,
            free,
            support,
        }
    }

    pub fn free(&self) -> &[RickerCoord] {
        &self.free
    }

    /// Free coordinates of `params`, in model order.
    pub fn project(&self, params: &RickerParams) -> Vec<f64> {
        self.free.iter().map(|&c| params.get(c)).collect()
    }

    pub fn params_at(&self, theta: &[f64]) -> RickerParams {
        let mut params = self.base;
        for (&coord, &value) in self.free.iter().zip(theta) {
            params.set(coord, value);
        }
        params
    }
}

impl GenerativeModel for RickerModel {
    fn name(&self) -> &'static str {
        "ricker"
    }
    fn param_dim(&self) -> usize {
        self.free.len()
    }
    fn support(&self) -> &Bounds {
        &self.support
    }
    fn sample_size(&self) -> usize {
        self.t_len
    }
    fn simulate(&self, theta: &[f64], rng: &mut dyn RngCore) -> Result<Dataset> {
        self.support.check(theta)?;
        simulate_ricker(&self.params_at(theta), self.t_len, self.burn_in, self.n0, rng)
    }
    fn resized(&self, n: usize) -> Box<dyn GenerativeModel> {
        Box::new(RickerModel {
            t_len: n,
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    fn rng(seed: u64) -> crate::rng::StreamRng {
        SeedStream::new(seed).rng()
    }

    fn reference_ricker() -> RickerParams {
        RickerParams {
            log_r: 3.8,
            log_sigma: 0.3f64.ln(),
            log_phi: 10f64.ln(),
        }
    }

    #[test]
    fn normal_is_reproducible() {
        let a = simulate_normal(0.0, 3, &mut rng(5)).unwrap();
        let b = simulate_normal(0.0, 3, &mut rng(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn normal_law_of_large_numbers() {
        let data = simulate_normal(5.0, 1_000_000, &mut rng(11)).unwrap();
        let mean = data.iter().sum::<f64>() / data.len() as f64;
        // 3 standard errors at n = 1e6 is 0.003
        assert!((mean - 5.0).abs() < 0.003, "mean {mean}");
    }

    #[test]
    fn normal_rejects_empty() {
        assert_eq!(simulate_normal(0.0, 0, &mut rng(1)), Err(Error::EmptyDataset));
    }

    #[test]
    fn cauchy_rejects_bad_scale() {
        assert!(matches!(
            simulate_cauchy(0.0, 0.0, 10, &mut rng(1)),
            Err(Error::InvalidParameter { name: "scale", .. })
        ));
        assert!(simulate_cauchy(0.0, -1.0, 10, &mut rng(1)).is_err());
    }

    #[test]
    fn cauchy_settings_have_requested_length() {
        assert_eq!(simulate_cauchy(10.0, 0.55, 400, &mut rng(2)).unwrap().len(), 400);
        assert_eq!(simulate_cauchy(10.0, 0.55, 100, &mut rng(2)).unwrap().len(), 100);
    }

    #[test]
    fn cauchy_median_and_iqr() {
        let mut data = simulate_cauchy(0.0, 1.0, 1_000_000, &mut rng(3)).unwrap().into_inner();
        data.sort_by(f64::total_cmp);
        let n = data.len();
        let median = 0.5 * (data[n / 2 - 1] + data[n / 2]);
        // median SE for the standard Cauchy is pi / (2 sqrt n) ~ 0.0016
        assert!(median.abs() < 0.01, "median {median}");
        let iqr = data[3 * n / 4] - data[n / 4];
        assert!((iqr - 2.0).abs() < 0.1, "iqr {iqr}");
    }

    #[test]
    fn cauchy_iqr_over_1e5_within_five_percent() {
        let mut data = simulate_cauchy(3.0, 1.0, 100_000, &mut rng(4)).unwrap().into_inner();
        data.sort_by(f64::total_cmp);
        let n = data.len();
        let iqr = data[3 * n / 4] - data[n / 4];
        assert!((iqr - 2.0).abs() < 0.1, "iqr {iqr}");
    }

    #[test]
    fn ricker_reference_setting() {
        let y = simulate_ricker(&reference_ricker(), 50, 50, 1.0, &mut rng(9)).unwrap();
        assert_eq!(y.len(), 50);
        assert!(y.iter().all(|&v| v >= 0.0 && v.fract() == 0.0));
    }

    #[test]
    fn ricker_noiseless_fixed_point() {
        let params = RickerParams {
            log_r: 1.0,
            log_sigma: f64::NEG_INFINITY,
            log_phi: 0.0,
        };
        let y = simulate_ricker_with(&params, 1, 0, 1.0, &mut rng(1), ObservationMode::Mean).unwrap();
        assert_eq!(y[0], 1.0);
    }

    #[test]
    fn ricker_noiseless_matches_direct_recursion() {
        let params = RickerParams {
            log_r: 3.8,
            log_sigma: f64::NEG_INFINITY,
            log_phi: 0.0,
        };
        let states = ricker_latent(&params, 20, 1.0, || 0.0).unwrap();
        let r = 3.8f64.exp();
        let mut n = 1.0f64;
        for (t, &got) in states.iter().enumerate() {
            n = n * r / n.exp();
            let rel = ((got - n) / n).abs();
            assert!(rel < 1e-12, "step {t}: {got} vs {n}");
        }
    }

    #[test]
    fn ricker_overflow_is_reported() {
        let params = RickerParams {
            log_r: 3.8,
            log_sigma: 0.0,
            log_phi: 0.0,
        };
        // innovation of +40 pushes N_1 beyond the overflow guard
        let err = ricker_latent(&params, 5, 1.0, || 40.0).unwrap_err();
        assert!(matches!(err, Error::SimulationDiverged { t: 1, .. }));
    }

    #[test]
    fn models_reject_out_of_support() {
        let cauchy = CauchyModel::scale(10, 0.0);
        assert!(matches!(
            cauchy.simulate(&[-1.0], &mut rng(1)),
            Err(Error::OutOfSupport { coord: 0, .. })
        ));
        let both = CauchyModel::both(10);
        assert!(both.simulate(&[0.0, 0.0], &mut rng(1)).is_err());
        assert!(both.simulate(&[0.0], &mut rng(1)).is_err());
        let normal = NormalMeanModel::new(5);
        assert!(normal.simulate(&[f64::NAN], &mut rng(1)).is_err());
    }

    #[test]
    fn models_are_seed_deterministic() {
        let params = reference_ricker();
        let ricker = RickerModel::new(50, 50, 1.0, params, vec![RickerCoord::LogR, RickerCoord::LogPhi]);
        let theta = ricker.project(&params);
        assert_eq!(theta, vec![3.8, 10f64.ln()]);
        let models: Vec<(Box<dyn GenerativeModel>, Vec<f64>)> = vec![
            (Box::new(NormalMeanModel::new(20)), vec![1.0]),
            (Box::new(CauchyModel::both(20)), vec![10.0, 0.55]),
            (Box::new(ricker), theta),
        ];
        for (model, theta) in &models {
            let a = model.simulate(theta, &mut rng(77)).unwrap();
            let b = model.simulate(theta, &mut rng(77)).unwrap();
            assert_eq!(a, b, "{}", model.name());
            assert_eq!(model.resized(12).simulate(theta, &mut rng(1)).unwrap().len(), 12);
        }
    }
}
