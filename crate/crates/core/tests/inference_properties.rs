mod common;

use std::f64::consts::PI;

use acdc_core::inference::{cd_value_at, confidence_interval, depth_region, interval_box, pit_uniformity, region_contains};
use acdc_core::models::ParamVector;
use acdc_core::rng::SeedStream;
use acdc_core::samplers::{AcceptedDraw, CDSample};
use acdc_core::summaries::SummaryVector;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

fn build(points: Vec<Vec<f64>>, weights: Vec<f64>) -> CDSample {
    CDSample {
        draws: points
            .into_iter()
            .zip(weights)
            .enumerate()
            .map(|(index, (t, w))| AcceptedDraw {
                theta: ParamVector::new(t).unwrap(),
                summary: SummaryVector::new(vec![0.0]).unwrap(),
                distance: 0.0,
                kernel_weight: 1.0,
                importance_weight: w,
                index,
            })
            .collect(),
        s_obs: SummaryVector::new(vec![0.0]).unwrap(),
        n_proposed: 0,
        n_failed: 0,
        adjusted: false,
        adjust_fallback: false,
        epsilon: 1.0,
    }
}

fn gaussian_cloud(seed: u64, m: usize, p: usize) -> CDSample {
    let mut rng = SeedStream::new(seed).rng();
    let pts = (0..m).map(|_| (0..p).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
    let w = (0..m).map(|_| 0.5 + rng.random::<f64>()).collect();
    build(pts, w)
}

#[test]
fn standard_bivariate_normal_region_area() {
    let sample = build(gaussian_cloud(1, 100_000, 2).draws.into_iter().map(|d| d.theta.into_inner()).collect(), vec![1.0; 100_000]);
    let region = depth_region(&sample, 0.95).unwrap();
    // chi-square(2) 95% quantile is -2 ln 0.05.
    let oracle = PI * (-2.0 * 0.05f64.ln());
    assert!((region.size() / oracle - 1.0).abs() < 0.03, "{} vs {oracle}", region.size());
}

#[test]
fn normal_location_cd_values_are_uniform_under_exact_pivot() {
    // Draws from N(xbar, 1/n) make H_n(theta0) exactly uniform over replicates.
    let n = 25.0f64;
    let mut rng = SeedStream::new(5).rng();
    let pits: Vec<f64> = (0..500)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let xbar = z / n.sqrt();
            let pts = (0..2_000)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    vec![xbar + z / n.sqrt()]
                })
                .collect();
            cd_value_at(&build(pts, vec![1.0; 2_000]), 0, 0.0)
        })
        .collect();
    assert!(pit_uniformity(&pits).unwrap().pass);
}

#[test]
fn beta_two_two_fails_uniformity() {
    let beta = Beta::new(2.0, 2.0).unwrap();
    let mut rng = SeedStream::new(9).rng();
    let values: Vec<f64> = (0..500).map(|_| beta.sample(&mut rng)).collect();
    let report = pit_uniformity(&values).unwrap();
    assert!(!report.pass, "{report:?}");
    assert!((report.critical - 0.0727).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn interval_endpoints_widen_with_level(seed in any::<u64>(), l1 in 0.05f64..0.95, gap in 0.0f64..0.04) {
        let s = gaussian_cloud(seed, 200, 1);
        let a = confidence_interval(&s, 0, l1).unwrap();
        let b = confidence_interval(&s, 0, l1 + gap).unwrap();
        let (ia, ib) = match (&a.shape, &b.shape) {
            (acdc_core::inference::RegionShape::IntervalBox { intervals: x }, acdc_core::inference::RegionShape::IntervalBox { intervals: y }) => (x[0], y[0]),
            _ => unreachable!(),
        };
        prop_assert!(ib.0 <= ia.0 && ia.1 <= ib.1);
    }

    #[test]
    fn depth_region_is_affine_equivariant(seed in any::<u64>(), a in prop::array::uniform4(-2.0f64..2.0), shift in prop::array::uniform2(-5.0f64..5.0)) {
        let det = a[0] * a[3] - a[1] * a[2];
        prop_assume!(det.abs() > 0.1);
        let map = |x: &[f64]| vec![a[0] * x[0] + a[1] * x[1] + shift[0], a[2] * x[0] + a[3] * x[1] + shift[1]];
        let s = gaussian_cloud(seed, 300, 2);
        let w = s.draws.iter().map(|d| d.importance_weight).collect::<Vec<_>>();
        let mapped = build(s.draws.iter().map(|d| map(&d.theta)).collect(), w);
        let r = depth_region(&s, 0.9).unwrap();
        let rm = depth_region(&mapped, 0.9).unwrap();
        prop_assert!((rm.size() / (r.size() * det.abs()) - 1.0).abs() < 1e-8);
        let mut rng = SeedStream::new(seed ^ 1).rng();
        for _ in 0..50 {
            let probe = vec![rng.random::<f64>() * 6.0 - 3.0, rng.random::<f64>() * 6.0 - 3.0];
            let inside = region_contains(&r, &probe).unwrap();
            let mapped_inside = region_contains(&rm, &map(&probe)).unwrap();
            // Probes sitting on the boundary up to rounding may flip; none are expected here.
            prop_assert_eq!(inside, mapped_inside);
        }
    }

    #[test]
    fn regions_are_nested_in_level(seed in any::<u64>(), l1 in 0.3f64..0.9, gap in 0.01f64..0.09) {
        let s = gaussian_cloud(seed, 300, 2);
        let small_d = depth_region(&s, l1).unwrap();
        let big_d = depth_region(&s, l1 + gap).unwrap();
        let small_b = interval_box(&s, l1).unwrap();
        let big_b = interval_box(&s, l1 + gap).unwrap();
        let mut rng = SeedStream::new(seed ^ 2).rng();
        for _ in 0..100 {
            let probe = vec![rng.random::<f64>() * 6.0 - 3.0, rng.random::<f64>() * 6.0 - 3.0];
            if region_contains(&small_d, &probe).unwrap() {
                prop_assert!(region_contains(&big_d, &probe).unwrap());
            }
            if region_contains(&small_b, &probe).unwrap() {
                prop_assert!(region_contains(&big_b, &probe).unwrap());
            }
        }
    }

    #[test]
    fn cd_value_is_monotone_with_limits(seed in any::<u64>(), mut ts in prop::collection::vec(-4.0f64..4.0, 2..20)) {
        let s = gaussian_cloud(seed, 150, 1);
        ts.sort_by(f64::total_cmp);
        let vals: Vec<f64> = ts.iter().map(|&t| cd_value_at(&s, 0, t)).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-15));
        prop_assert_eq!(cd_value_at(&s, 0, 1e6), 1.0);
        prop_assert_eq!(cd_value_at(&s, 0, -1e6), 0.0);
    }
}
