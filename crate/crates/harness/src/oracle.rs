//! Normal-mean oracle runs: sampler output against the closed form.

use acdc_core::adjust::fit_regression;
use acdc_core::inference::ks_uniform;
use acdc_core::initial_density::NormalInitial;
use acdc_core::kernels::{Acceptance, KernelKind, KernelSpec};
use acdc_core::models::{Bounds, GenerativeModel, NormalMeanModel};
use acdc_core::oracle_normal::{
    acceptance_rate, acceptance_rate_curve, closed_form_moments, regression_slope, CurveTemplate, OracleNormalSpec,
};
use acdc_core::rng::{phase, SeedStream};
use acdc_core::samplers::{run_acdc, SamplerSetup};
use acdc_core::summaries::{CauchyStat, SummaryKind};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, HarnessResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCase {
    pub n: usize,
    pub theta0: f64,
    pub mu_n: f64,
    pub b_n: f64,
    pub epsilon: f64,
    /// Target number of accepted draws; sets `N` through the analytic rate.
    pub min_accepted: usize,
    /// Explicit simulation budget, overriding `min_accepted`.
    pub n_sims: Option<usize>,
}

impl OracleCase {
    pub fn new(n: usize, mu_n: f64, b_n: f64, epsilon: f64) -> Self {
        OracleCase {
            n,
            theta0: 0.0,
            mu_n,
            b_n,
            epsilon,
            min_accepted: 5000,
            n_sims: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub n: usize,
    pub epsilon: f64,
    pub s_obs: f64,
    pub analytic_mean: f64,
    pub analytic_var: f64,
    pub sampler_mean: f64,
    pub sampler_var: f64,
    pub ks: f64,
    pub accepted: usize,
    pub n_sims: usize,
    pub acceptance_rate: f64,
    pub empirical_rate: f64,
    pub analytic_slope: f64,
    pub fitted_slope: f64,
}

/// Simulate data at `theta0`, run ACDC with `r_n = N(mu_n, b_n^-2)` and a gaussian kernel.
pub fn oracle_run(case: &OracleCase, stream: SeedStream) -> HarnessResult<OracleRow> {
    let model = NormalMeanModel::new(case.n);
    let data = model.simulate(&[case.theta0], &mut stream.derive(phase::DATA).rng())?;
    let s_obs = SummaryKind::Iid(CauchyStat::Mean).compute(&data)?;
    let spec = OracleNormalSpec::new(case.n, case.mu_n, case.b_n, case.epsilon, s_obs[0])?;
    let (analytic_mean, analytic_var) = closed_form_moments(&spec);
    let rate = acceptance_rate(&spec);
    let n_sims = match case.n_sims {
        Some(n) => n,
        None => {
            // 20% headroom over the expected count
            let want = (1.2 * case.min_accepted as f64 / rate).ceil();
            if !(want < 5e7) {
                return Err(invalid(format!("acceptance rate {rate:e} too small for {} draws", case.min_accepted)));
            }
            want as usize
        }
    };
    let rn = NormalInitial::new(case.mu_n, case.b_n)?;
    let acceptance = Acceptance::Fixed(KernelSpec::new(KernelKind::Gaussian, case.epsilon, vec![1.0])?);
    let bounds = Bounds::unbounded(1);
    let setup = SamplerSetup {
        model: &model,
        summary: SummaryKind::Iid(CauchyStat::Mean),
        rn: &rn,
        bounds: &bounds,
        acceptance: &acceptance,
        n_sims,
        s_obs: &s_obs,
    };
    let sample = run_acdc(&setup, stream.derive(phase::SAMPLER))?;
    let normal = Normal::new(analytic_mean, analytic_var.sqrt()).map_err(|e| invalid(e.to_string()))?;
    let pit: Vec<f64> = sample.coordinate(0).iter().map(|&t| normal.cdf(t)).collect();
    let fit = fit_regression(&sample)?;
    Ok(OracleRow {
        n: case.n,
        epsilon: case.epsilon,
        s_obs: s_obs[0],
        analytic_mean,
        analytic_var,
        sampler_mean: sample.weighted_mean(0),
        sampler_var: sample.weighted_variance(0),
        ks: ks_uniform(&pit)?,
        accepted: sample.len(),
        n_sims,
        acceptance_rate: rate,
        empirical_rate: sample.acceptance_rate(),
        analytic_slope: regression_slope(&spec),
        fitted_slope: fit.beta[(0, 0)],
    })
}

/// The headline case (`n = 100`, `mu_n = 0.5`, `b_n = n^{1/4}`, `eps = 0.05`) plus a small grid
/// following the default curve template.
pub fn default_cases() -> Vec<OracleCase> {
    let mut cases = vec![OracleCase::new(100, 0.5, 100f64.powf(0.25), 0.05)];
    let template = CurveTemplate::default();
    for n in [100usize, 1000] {
        for eps in [0.05, 0.2] {
            let b = template.b_scale * (n as f64).powf(template.b_exp);
            cases.push(OracleCase::new(n, template.theta0 + template.mu_offset / b, b, eps));
        }
    }
    cases
}

pub fn run_oracle_grid(cases: &[OracleCase], seed: u64) -> HarnessResult<Vec<OracleRow>> {
    let root = SeedStream::new(seed);
    cases
        .iter()
        .enumerate()
        .map(|(i, c)| oracle_run(c, root.derive(i as u64)))
        .collect()
}

/// Ten log-spaced sample sizes from 100 to 10^4.
pub fn degeneracy_grid() -> Vec<usize> {
    (0..10).map(|i| (100.0 * 100f64.powf(i as f64 / 9.0)).round() as usize).collect()
}

/// Analytic acceptance rate with `eps = 1/n` on the default template.
pub fn degeneracy_curve() -> HarnessResult<Vec<(usize, f64, f64)>> {
    let curve = acceptance_rate_curve(&CurveTemplate::default(), &degeneracy_grid(), |n| 1.0 / n as f64)?;
    Ok(curve.into_iter().map(|(n, r)| (n, 1.0 / n as f64, r)).collect())
}
