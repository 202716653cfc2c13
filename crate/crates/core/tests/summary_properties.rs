use acdc_core::summaries::{summary_cauchy, summary_mean, summary_ricker, CauchyStat, SummaryKind, RICKER_DIM};
use proptest::prelude::*;

const STATS: [CauchyStat; 6] = [
    CauchyStat::Median,
    CauchyStat::Mean,
    CauchyStat::Mad,
    CauchyStat::Sd,
    CauchyStat::MeanSd,
    CauchyStat::MedianMad,
];

fn data() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, 3..80).prop_filter("needs spread", |v| v.iter().any(|&x| x != v[0]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn median_shifts_with_location(x in data(), c in -1e4f64..1e4) {
        let a = summary_cauchy(CauchyStat::Median, &x).unwrap()[0];
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let b = summary_cauchy(CauchyStat::Median, &shifted).unwrap()[0];
        prop_assert!((b - a - c).abs() < 1e-9 * (1.0 + c.abs() + a.abs()));
    }

    #[test]
    fn dispersion_scales_with_abs_factor(x in data(), c in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0]) {
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        for stat in [CauchyStat::Mad, CauchyStat::Sd] {
            let a = summary_cauchy(stat, &x).unwrap()[0];
            let b = summary_cauchy(stat, &scaled).unwrap()[0];
            prop_assert!((b - c.abs() * a).abs() < 1e-9 * (b.abs() + 1.0), "{stat:?}: {b} vs {}", c.abs() * a);
        }
    }

    #[test]
    fn iid_summaries_ignore_order(x in data(), seed in any::<u64>()) {
        let mut y = x.clone();
        let k = (seed % y.len() as u64) as usize;
        y.rotate_left(k);
        y.reverse();
        for stat in STATS {
            let a = summary_cauchy(stat, &x).unwrap();
            let b = summary_cauchy(stat, &y).unwrap();
            prop_assert_eq!(a.len(), SummaryKind::Iid(stat).dim());
            for (u, v) in a.iter().zip(b.iter()) {
                prop_assert!((u - v).abs() < 1e-9 * (1.0 + u.abs()));
            }
        }
        prop_assert!((summary_mean(&x).unwrap()[0] - summary_mean(&y).unwrap()[0]).abs() < 1e-9);
    }

    #[test]
    fn ricker_summary_has_fixed_dimension(y in prop::collection::vec(0u32..200, 10..120)) {
        let y: Vec<f64> = y.into_iter().map(f64::from).collect();
        let s = summary_ricker(&y).unwrap();
        prop_assert_eq!(s.len(), RICKER_DIM);
        prop_assert!(s.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn ricker_summary_depends_on_order() {
    let y: Vec<f64> = vec![0.0, 3.0, 40.0, 2.0, 0.0, 55.0, 1.0, 9.0, 30.0, 0.0, 4.0, 70.0];
    let mut rev = y.clone();
    rev.reverse();
    let a = summary_ricker(&y).unwrap();
    let b = summary_ricker(&rev).unwrap();
    // Mean, zero count and lag-0 autocovariance are order-free; the dynamics are not.
    assert_eq!(a[0], b[0]);
    assert_eq!(a[1], b[1]);
    assert!(a.iter().zip(b.iter()).any(|(u, v)| (u - v).abs() > 1e-6));
}
