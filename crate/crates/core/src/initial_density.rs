//! Initial densities `r_n(theta)`: fixed reference densities (flat, `1/sigma`,
//! Gaussian) and the data-driven minibatch kernel density estimate.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{lambda_distance, sort_records, standardize_scales, DistanceRecord};
use crate::linalg::weighted_mean_cov;
use crate::models::{Bounds, GenerativeModel, ParamVector};
use crate::rng::SeedStream;
use crate::summaries::{SummaryKind, SummaryVector};

const MAX_BOX_ATTEMPTS: usize = 10_000;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub trait InitialDensity: Send + Sync {
    fn dim(&self) -> usize;
    /// False for unnormalizable densities (flat, `1/sigma`).
    fn is_proper(&self) -> bool;
    /// Log density, up to an additive constant for improper densities.
    fn ln_density(&self, theta: &[f64]) -> f64;
    fn density(&self, theta: &[f64]) -> f64 {
        self.ln_density(theta).exp()
    }
    /// One draw inside `bounds`. Proper densities are truncated to the box.
    fn sample(&self, rng: &mut dyn RngCore, bounds: &Bounds) -> Result<ParamVector>;
}

pub fn sample_initial(density: &dyn InitialDensity, rng: &mut dyn RngCore, bounds: &Bounds) -> Result<ParamVector> {
    density.sample(rng, bounds)
}

fn check_dim(expected: usize, bounds: &Bounds) -> Result<()> {
    if bounds.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: bounds.dim(),
        });
    }
    Ok(())
}

fn sample_truncated(
    bounds: &Bounds,
    rng: &mut dyn RngCore,
    mut draw: impl FnMut(&mut dyn RngCore) -> Vec<f64>,
) -> Result<ParamVector> {
    for _ in 0..MAX_BOX_ATTEMPTS {
        let theta = draw(rng);
        if bounds.contains(&theta) {
            return ParamVector::new(theta);
        }
    }
    Err(Error::BoxMiss {
        attempts: MAX_BOX_ATTEMPTS,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceCoord {
    /// `r(theta_j) ∝ 1`
    Flat,
    /// `r(theta_j) ∝ 1 / theta_j` on `theta_j > 0`
    InvScale,
}

/// Product of per-coordinate improper reference densities.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDensity {
    coords: Vec<ReferenceCoord>,
}

impl ReferenceDensity {
    pub fn new(coords: Vec<ReferenceCoord>) -> Self {
        ReferenceDensity { coords }
    }

    pub fn flat(dim: usize) -> Self {
        ReferenceDensity::new(vec![ReferenceCoord::Flat; dim])
    }

    pub fn inv_scale(dim: usize) -> Self {
        ReferenceDensity::new(vec![ReferenceCoord::InvScale; dim])
    }

    pub fn coords(&self) -> &[ReferenceCoord] {
        &self.coords
    }
}

impl InitialDensity for ReferenceDensity {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn is_proper(&self) -> bool {
        false
    }

    fn ln_density(&self, theta: &[f64]) -> f64 {
        self.coords
            .iter()
            .zip(theta)
            .map(|(c, &x)| match c {
                ReferenceCoord::Flat => 0.0,
                ReferenceCoord::InvScale if x > 0.0 => -x.ln(),
                ReferenceCoord::InvScale => f64::NEG_INFINITY,
            })
            .sum()
    }

    fn sample(&self, rng: &mut dyn RngCore, bounds: &Bounds) -> Result<ParamVector> {
        check_dim(self.dim(), bounds)?;
        if !bounds.is_finite() {
            return Err(Error::ImproperWithoutBox);
        }
        let mut theta = Vec::with_capacity(self.dim());
        for (j, coord) in self.coords.iter().enumerate() {
            let (lo, hi) = (bounds.lower()[j], bounds.upper()[j]);
            let u: f64 = rng.random();
            let x = match coord {
                ReferenceCoord::Flat => lo + (hi - lo) * u,
                ReferenceCoord::InvScale => {
                    if !(lo > 0.0) {
                        return Err(Error::ImproperWithoutBox);
                    }
                    (lo.ln() + (hi.ln() - lo.ln()) * u).exp().clamp(lo, hi)
                }
            };
            theta.push(x);
        }
        ParamVector::new(theta)
    }
}

/// Scalar Gaussian `N(mu_n, b_n^{-2})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalInitial {
    mu: f64,
    b: f64,
}

impl NormalInitial {
    pub fn new(mu: f64, b: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter { name: "b_n", value: b });
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter { name: "mu_n", value: mu });
        }
        Ok(NormalInitial { mu, b })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn variance(&self) -> f64 {
        1.0 / (self.b * self.b)
    }
}

impl InitialDensity for NormalInitial {
    fn dim(&self) -> usize {
        1
    }

    fn is_proper(&self) -> bool {
        true
    }

    fn ln_density(&self, theta: &[f64]) -> f64 {
        let z = self.b * (theta[0] - self.mu);
        self.b.ln() - LN_SQRT_2PI - 0.5 * z * z
    }

    fn sample(&self, rng: &mut dyn RngCore, bounds: &Bounds) -> Result<ParamVector> {
        check_dim(1, bounds)?;
        sample_truncated(bounds, rng, |rng| {
            let z: f64 = StandardNormal.sample(rng);
            vec![self.mu + z / self.b]
        })
    }
}

/// Product-Gaussian kernel density estimate over minibatch point estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinibatchKDE {
    centers: Vec<ParamVector>,
    bandwidth: Vec<f64>,
    nu: f64,
}

impl MinibatchKDE {
    pub fn new(centers: Vec<ParamVector>, bandwidth: Vec<f64>, nu: f64) -> Result<Self> {
        let dim = match centers.first() {
            Some(c) => c.len(),
            None => return Err(Error::EmptyInput),
        };
        if let Some(c) = centers.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: c.len(),
            });
        }
        if bandwidth.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bandwidth.len(),
            });
        }
        if let Some(&h) = bandwidth.iter().find(|&&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "bandwidth",
                value: h,
            });
        }
        Ok(MinibatchKDE { centers, bandwidth, nu })
    }

    /// Per-dimension Silverman bandwidths `1.06 sd_j k^{-1/5}`.
    ///
    /// A dimension with no spread (e.g. `k = 1`) gets `1e-3 max(|c_j|, 1)`.
    pub fn silverman(centers: Vec<ParamVector>, nu: f64) -> Result<Self> {
        let k = centers.len();
        if k == 0 {
            return Err(Error::EmptyInput);
        }
        let dim = centers[0].len();
        let bandwidth = (0..dim)
            .map(|j| {
                let col: Vec<f64> = centers.iter().map(|c| c[j]).collect();
                let sd = if k >= 2 { crate::summaries::sd(&col) } else { 0.0 };
                if sd > 0.0 && sd.is_finite() {
                    1.06 * sd * (k as f64).powf(-0.2)
                } else {
                    1e-3 * col[0].abs().max(1.0)
                }
            })
            .collect();
        MinibatchKDE::new(centers, bandwidth, nu)
    }

    pub fn centers(&self) -> &[ParamVector] {
        &self.centers
    }

    pub fn bandwidth(&self) -> &[f64] {
        &self.bandwidth
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Mixture mean and per-coordinate variance (centers' spread plus `h_j^2`).
    pub fn moments(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.k() as f64;
        let dim = self.bandwidth.len();
        let mean: Vec<f64> = (0..dim)
            .map(|j| self.centers.iter().map(|c| c[j]).sum::<f64>() / k)
            .collect();
        let var = (0..dim)
            .map(|j| {
                self.centers.iter().map(|c| (c[j] - mean[j]).powi(2)).sum::<f64>() / k
                    + self.bandwidth[j] * self.bandwidth[j]
            })
            .collect();
        (mean, var)
    }
}

pub fn kde_density(kde: &MinibatchKDE, theta: &[f64]) -> f64 {
    kde.density(theta)
}

impl InitialDensity for MinibatchKDE {
    fn dim(&self) -> usize {
        self.bandwidth.len()
    }

    fn is_proper(&self) -> bool {
        true
    }

    fn ln_density(&self, theta: &[f64]) -> f64 {
        let ln_norm: f64 = self.bandwidth.iter().map(|h| h.ln() + LN_SQRT_2PI).sum::<f64>()
            + (self.k() as f64).ln();
        let exponents: Vec<f64> = self
            .centers
            .iter()
            .map(|c| {
                -0.5 * c
                    .iter()
                    .zip(theta)
                    .zip(&self.bandwidth)
                    .map(|((ci, ti), h)| ((ti - ci) / h).powi(2))
                    .sum::<f64>()
            })
            .collect();
        let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY || max.is_nan() {
            return f64::NEG_INFINITY;
        }
        let sum: f64 = exponents.iter().map(|e| (e - max).exp()).sum();
        max + sum.ln() - ln_norm
    }

    fn sample(&self, rng: &mut dyn RngCore, bounds: &Bounds) -> Result<ParamVector> {
        check_dim(self.dim(), bounds)?;
        sample_truncated(bounds, rng, |rng| {
            let center = &self.centers[rng.random_range(0..self.centers.len())];
            center
                .iter()
                .zip(&self.bandwidth)
                .map(|(c, h)| {
                    let z: f64 = StandardNormal.sample(rng);
                    c + h * z
                })
                .collect()
        })
    }
}

/// Point estimator applied to each data subset.
pub trait PointEstimator: Send + Sync {
    fn estimate(&self, subset: &[f64], stream: SeedStream) -> Result<ParamVector>;
}

impl<F> PointEstimator for F
where
    F: Fn(&[f64], SeedStream) -> Result<ParamVector> + Send + Sync,
{
    fn estimate(&self, subset: &[f64], stream: SeedStream) -> Result<ParamVector> {
        self(subset, stream)
    }
}

/// `floor(n^nu)`, robust to `powf` landing a hair below an integer.
pub fn subset_size(n: usize, nu: f64) -> usize {
    ((n as f64).powf(nu) + 1e-9).floor() as usize
}

/// Default number of disjoint subsets, `floor(n / floor(n^nu))`.
pub fn default_subset_count(n: usize, nu: f64) -> usize {
    let size = subset_size(n, nu).max(1);
    n / size
}

/// Index sets for `k` random subsets of size `floor(n^nu)`.
///
/// Subsets are disjoint when `overlap` is false and they fit into the data;
/// otherwise each subset is drawn independently (without replacement inside it).
pub fn draw_subsets(n: usize, nu: f64, k: usize, overlap: bool, stream: SeedStream) -> Result<Vec<Vec<usize>>> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::InvalidParameter { name: "nu", value: nu });
    }
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            value: 0.0,
        });
    }
    let size = subset_size(n, nu);
    if size < 2 {
        return Err(Error::SubsetTooSmall { size });
    }
    let mut subsets = Vec::with_capacity(k);
    if !overlap && size * k <= n {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut stream.derive(0).rng());
        for chunk in perm.chunks(size).take(k) {
            let mut s = chunk.to_vec();
            s.sort_unstable();
            subsets.push(s);
        }
    } else {
        for i in 0..k {
            let mut rng = stream.derive(1 + i as u64).rng();
            let mut s = rand::seq::index::sample(&mut rng, n, size).into_vec();
            s.sort_unstable();
            subsets.push(s);
        }
    }
    Ok(subsets)
}

/// `k` contiguous windows of length `len`, starts spread evenly over the series.
pub fn window_subsets(t_len: usize, len: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    if len < 2 {
        return Err(Error::SubsetTooSmall { size: len });
    }
    if len > t_len {
        return Err(Error::SeriesTooShort { len: t_len, min: len });
    }
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            value: 0.0,
        });
    }
    let span = (t_len - len) as f64;
    Ok((0..k)
        .map(|i| {
            let start = if k == 1 {
                0
            } else {
                (i as f64 * span / (k - 1) as f64).round() as usize
            };
            (start..start + len).collect()
        })
        .collect())
}

fn estimate_centers(
    data: &[f64],
    subsets: &[Vec<usize>],
    estimator: &dyn PointEstimator,
    stream: SeedStream,
) -> Result<Vec<ParamVector>> {
    subsets
        .par_iter()
        .enumerate()
        .map(|(i, idx)| {
            let subset: Vec<f64> = idx.iter().map(|&j| data[j]).collect();
            estimator
                .estimate(&subset, stream.derive(1_000 + i as u64))
                .map_err(|e| Error::Estimator {
                    subset: i,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Minibatch initial density from `k` random subsets of size `floor(n^nu)`.
pub fn make_minibatch_rn(
    data: &[f64],
    nu: f64,
    k: usize,
    estimator: &dyn PointEstimator,
    overlap: bool,
    stream: SeedStream,
) -> Result<MinibatchKDE> {
    let subsets = draw_subsets(data.len(), nu, k, overlap, stream)?;
    let centers = estimate_centers(data, &subsets, estimator, stream)?;
    MinibatchKDE::silverman(centers, nu)
}

/// Minibatch initial density from contiguous windows of a time series.
pub fn make_windowed_rn(
    data: &[f64],
    window: usize,
    k: usize,
    estimator: &dyn PointEstimator,
    stream: SeedStream,
) -> Result<MinibatchKDE> {
    let subsets = window_subsets(data.len(), window, k)?;
    let centers = estimate_centers(data, &subsets, estimator, stream)?;
    let nu = (window as f64).ln() / (data.len() as f64).ln();
    MinibatchKDE::silverman(centers, nu)
}

/// Settings for population Monte Carlo ABC on a data subset.
#[derive(Debug, Clone, PartialEq)]
pub struct PmcSettings {
    pub particles: usize,
    pub generations: usize,
    /// Uniform prior box for generation 0 and support for all perturbations.
    pub prior_box: Bounds,
    /// Generation-0 candidates per retained particle.
    pub initial_multiplier: usize,
    /// Proposal budget per retained particle in later generations.
    pub max_attempts_per_particle: usize,
}

impl PmcSettings {
    pub fn new(prior_box: Bounds, generations: usize) -> Self {
        PmcSettings {
            particles: 200,
            generations,
            prior_box,
            initial_multiplier: 5,
            max_attempts_per_particle: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmcOutcome {
    pub estimate: ParamVector,
    pub simulations: usize,
    pub ess: f64,
    pub tolerance: f64,
}

struct Particle {
    theta: Vec<f64>,
    distance: f64,
}

fn simulate_distance(
    model: &dyn GenerativeModel,
    summary: SummaryKind,
    theta: &[f64],
    rng: &mut dyn RngCore,
) -> Option<SummaryVector> {
    let data = model.simulate(theta, rng).ok()?;
    summary.compute(&data).ok()
}

fn ess(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    s * s / s2
}

/// Population Monte Carlo ABC run returning the weighted mean of the final
/// population along with its cost.
pub fn pmc_run(
    subset: &[f64],
    model: &dyn GenerativeModel,
    summary: SummaryKind,
    settings: &PmcSettings,
    stream: SeedStream,
) -> Result<PmcOutcome> {
    if settings.generations == 0 {
        return Err(Error::InvalidParameter {
            name: "generations",
            value: 0.0,
        });
    }
    let prior = &settings.prior_box;
    if prior.dim() != model.param_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.param_dim(),
            got: prior.dim(),
        });
    }
    let flat = ReferenceDensity::flat(prior.dim());
    let sub_model = model.resized(subset.len());
    let s_obs = summary.compute(subset)?;
    let mut rng = stream.rng();
    let mut simulations = 0usize;

    let n_candidates = settings.particles * settings.initial_multiplier.max(1);
    let mut thetas = Vec::with_capacity(n_candidates);
    let mut summaries = Vec::with_capacity(n_candidates);
    for _ in 0..n_candidates {
        let theta = flat.sample(&mut rng, prior)?.into_inner();
        simulations += 1;
        summaries.push(simulate_distance(sub_model.as_ref(), summary, &theta, &mut rng));
        thetas.push(theta);
    }
    let finite: Vec<SummaryVector> = summaries.iter().flatten().cloned().collect();
    let scales = standardize_scales(&finite)?;
    let mut records: Vec<DistanceRecord> = summaries
        .iter()
        .enumerate()
        .map(|(index, s)| DistanceRecord {
            index,
            distance: s
                .as_ref()
                .map_or(f64::INFINITY, |s| lambda_distance(&scales, s, &s_obs)),
        })
        .collect();
    sort_records(&mut records);
    let mut population: Vec<Particle> = records
        .iter()
        .take(settings.particles)
        .filter(|r| r.distance.is_finite())
        .map(|r| Particle {
            theta: thetas[r.index].clone(),
            distance: r.distance,
        })
        .collect();
    let mut weights = vec![1.0; population.len()];
    let mut tolerance = population.last().map_or(f64::INFINITY, |p| p.distance);

    let p = prior.dim();
    for _ in 1..settings.generations {
        let mut distances: Vec<f64> = population.iter().map(|q| q.distance).collect();
        distances.sort_by(f64::total_cmp);
        tolerance = crate::summaries::median(&distances);

        let points: Vec<&[f64]> = population.iter().map(|q| q.theta.as_slice()).collect();
        let (_, cov) = weighted_mean_cov(&points, &weights);
        let mut cov = cov * 2.0;
        let jitter = 1e-10 * (cov.trace() / p as f64).max(1e-12);
        for j in 0..p {
            cov[(j, j)] += jitter;
        }
        let chol = Cholesky::new(cov).ok_or(Error::SingularScatter)?;
        let lower = chol.l();
        let ln_det: f64 = (0..p).map(|j| lower[(j, j)].ln()).sum();

        let total_w: f64 = weights.iter().sum();
        let mut next = Vec::with_capacity(settings.particles);
        let mut attempts = 0usize;
        let budget = settings.particles * settings.max_attempts_per_particle;
        while next.len() < settings.particles && attempts < budget {
            attempts += 1;
            let mut u = rng.random::<f64>() * total_w;
            let mut j = 0;
            while j + 1 < weights.len() && u >= weights[j] {
                u -= weights[j];
                j += 1;
            }
            let z = DVector::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
            let step = &lower * z;
            let theta: Vec<f64> = population[j].theta.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            if !prior.contains(&theta) {
                continue;
            }
            simulations += 1;
            let Some(s) = simulate_distance(sub_model.as_ref(), summary, &theta, &mut rng) else {
                continue;
            };
            let distance = lambda_distance(&scales, &s, &s_obs);
            if distance <= tolerance {
                next.push(Particle { theta, distance });
            }
        }
        if next.len() < 10 {
            return Err(Error::ParticleDegeneracy {
                ess: next.len() as f64,
            });
        }

        let ln_w: Vec<f64> = next
            .iter()
            .map(|q| {
                let terms: Vec<f64> = population
                    .iter()
                    .zip(&weights)
                    .map(|(old, &w)| {
                        let diff = DMatrix::from_fn(p, 1, |i, _| q.theta[i] - old.theta[i]);
                        let solved = lower.solve_lower_triangular(&diff).expect("cholesky factor is invertible");
                        (w / total_w).ln() - 0.5 * solved.norm_squared() - ln_det
                    })
                    .collect();
                let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                -(max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln())
            })
            .collect();
        let max = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        weights = ln_w.iter().map(|l| (l - max).exp()).collect();
        population = next;
        let e = ess(&weights);
        if e < 10.0 {
            return Err(Error::ParticleDegeneracy { ess: e });
        }
    }

    let e = ess(&weights);
    if e < 10.0 {
        return Err(Error::ParticleDegeneracy { ess: e });
    }
    let points: Vec<&[f64]> = population.iter().map(|q| q.theta.as_slice()).collect();
    let (mean, _) = weighted_mean_cov(&points, &weights);
    Ok(PmcOutcome {
        estimate: ParamVector::new(mean.iter().copied().collect())?,
        simulations,
        ess: e,
        tolerance,
    })
}

/// `E{theta | S_n(subset)}` estimated by population Monte Carlo ABC.
pub fn pmc_point_estimate(
    subset: &[f64],
    model: &dyn GenerativeModel,
    summary: SummaryKind,
    settings: &PmcSettings,
    stream: SeedStream,
) -> Result<ParamVector> {
    pmc_run(subset, model, summary, settings, stream).map(|o| o.estimate)
}

/// Density of the standard normal, used in tests and diagnostics.
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}
