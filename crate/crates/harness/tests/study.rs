use acdc_core::inference::{ConfidenceRegion, RegionShape};
use acdc_harness::config::{Arm, ExperimentConfig};
use acdc_harness::presets::cauchy_setting;
use acdc_harness::report::{coverage_csv, emit_report, COVERAGE_HEADER};
use acdc_harness::study::{
    replicate_samples, run_replicate, run_replicates, summarize, ArmOutcome, ArmRecord, ReplicateRecord,
};
use acdc_harness::HarnessError;

fn small_setting(s: usize, replicates: usize) -> ExperimentConfig {
    let mut cfg = cauchy_setting(s, 0.05).unwrap();
    cfg.replicates = replicates;
    cfg.sampler.n_sims = 2000;
    cfg
}

#[test]
fn replicate_is_bitwise_reproducible() {
    let cfg = small_setting(1, 1);
    let a = run_replicate(&cfg, 3);
    let b = run_replicate(&cfg, 3);
    assert_eq!(a, b);
    assert!(a.arms.iter().all(|r| r.outcome.is_ok()));
}

#[test]
fn replicates_differ_across_indices_and_seeds() {
    let cfg = small_setting(1, 1);
    let a = run_replicate(&cfg, 0);
    let b = run_replicate(&cfg, 1);
    assert_ne!(a.arms, b.arms);
    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(run_replicate(&other, 0).arms, a.arms);
}

#[test]
fn execution_order_does_not_change_report() {
    let cfg = small_setting(2, 6);
    let forward = run_replicates(&cfg);
    let mut backward: Vec<ReplicateRecord> = (0..cfg.replicates).rev().map(|i| run_replicate(&cfg, i)).collect();
    backward.reverse();
    assert_eq!(forward, backward);
    assert_eq!(summarize(&cfg, &forward).unwrap(), summarize(&cfg, &backward).unwrap());
}

#[test]
fn budget_counts_every_arm_and_the_pilot() {
    let cfg = small_setting(1, 4);
    let report = summarize(&cfg, &run_replicates(&cfg)).unwrap();
    assert_eq!(report.sampler_simulations, 4 * 2000 * 2);
    // median estimators simulate nothing; only the pilot costs simulations
    assert_eq!(report.setup_simulations, 4 * cfg.kernel.pilot_size);
}

#[test]
fn near_unit_level_interval_spans_the_draws() {
    let mut cfg = small_setting(1, 1);
    cfg.inference.level = 1.0 - 1e-12;
    let theta0 = cfg.model.theta0()[0];
    for index in 0..3 {
        let record = run_replicate(&cfg, index);
        let samples = replicate_samples(&cfg, index).unwrap();
        for (arm, sample) in samples {
            let xs = sample.coordinate(0);
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let out = record.arms.iter().find(|a| a.arm == arm).unwrap().outcome.as_ref().unwrap();
            assert!((out.size - (hi - lo)).abs() <= 1e-12 * (hi - lo));
            assert_eq!(out.covered, lo <= theta0 && theta0 <= hi);
        }
    }
}

fn fake_outcome(size: f64, covered: bool) -> ArmOutcome {
    ArmOutcome {
        covered,
        size,
        ess: 10.0,
        accepted: 10,
        n_failed: 0,
        adjust_fallback: false,
        unstable: false,
        cd_value: Some(0.5),
        region: ConfidenceRegion {
            shape: RegionShape::IntervalBox {
                intervals: vec![(0.0, size)],
            },
            level: 0.95,
            unstable: false,
        },
    }
}

fn fake_record(index: usize, acdc: Option<f64>, is: Option<f64>) -> ReplicateRecord {
    let arm = |arm, size: Option<f64>| ArmRecord {
        arm,
        outcome: size.map(|s| fake_outcome(s, true)).ok_or_else(|| "no acceptances".to_string()),
    };
    ReplicateRecord {
        index,
        arms: vec![arm(Arm::Acdc, acdc), arm(Arm::IsAbc, is)],
        setup_simulations: 0,
        sampler_simulations: 0,
    }
}

#[test]
fn ratio_uses_only_paired_successes() {
    let cfg = small_setting(1, 5);
    let records = vec![
        fake_record(0, Some(1.0), Some(2.0)),
        fake_record(1, Some(1.0), Some(4.0)),
        fake_record(2, Some(3.0), Some(3.0)),
        fake_record(3, Some(9.0), None),
        fake_record(4, Some(1.0), Some(1.0)),
    ];
    let report = summarize(&cfg, &records).unwrap();
    assert_eq!(report.paired, 4);
    // ratios 0.5, 0.25, 1, 1
    assert!((report.ratio.unwrap() - 0.75).abs() < 1e-12);
    let is = &report.arms[1];
    assert_eq!((is.replicates, is.failed), (4, 1));
    assert!((is.coverage_se - 0.0).abs() < 1e-12);
}

#[test]
fn arm_with_too_many_failures_is_flagged() {
    let cfg = small_setting(1, 5);
    let records: Vec<_> = (0..5)
        .map(|i| fake_record(i, Some(1.0), if i < 2 { None } else { Some(1.0) }))
        .collect();
    let report = summarize(&cfg, &records).unwrap();
    let (acdc, is) = (&report.arms[0], &report.arms[1]);
    assert!(acdc.error.is_none() && acdc.coverage == 1.0);
    assert!(is.error.is_some() && is.coverage.is_nan() && is.failed == 2);
    assert_eq!(report.ratio, None);
}

#[test]
fn study_fails_when_every_arm_fails() {
    let cfg = small_setting(1, 5);
    let records: Vec<_> = (0..5)
        .map(|i| if i < 2 { fake_record(i, None, None) } else { fake_record(i, Some(1.0), Some(1.0)) })
        .collect();
    match summarize(&cfg, &records) {
        Err(HarnessError::TooManyFailures { failed, total, .. }) => assert_eq!((failed, total), (2, 5)),
        other => panic!("expected failure error, got {other:?}"),
    }
    // one failure in five is tolerated
    let records: Vec<_> = (0..5)
        .map(|i| if i < 1 { fake_record(i, None, None) } else { fake_record(i, Some(1.0), Some(1.0)) })
        .collect();
    assert!(summarize(&cfg, &records).unwrap().arms.iter().all(|a| a.error.is_none()));
}

#[test]
fn coverage_se_is_binomial() {
    let cfg = small_setting(1, 4);
    let mut records: Vec<_> = (0..4).map(|i| fake_record(i, Some(1.0), Some(1.0))).collect();
    for r in &mut records[..1] {
        if let Ok(o) = &mut r.arms[0].outcome {
            o.covered = false;
        }
    }
    let report = summarize(&cfg, &records).unwrap();
    let c = 0.75f64;
    assert_eq!(report.arms[0].coverage, c);
    assert!((report.arms[0].coverage_se - (c * (1.0 - c) / 4.0).sqrt()).abs() < 1e-15);
}

#[test]
fn empty_report_is_header_only() {
    assert_eq!(coverage_csv(&[]), format!("{COVERAGE_HEADER}\n"));
}

#[test]
fn emitted_report_has_table_layout_and_is_reproducible() {
    let cfg = small_setting(1, 3);
    let report = summarize(&cfg, &run_replicates(&cfg)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (csv1, md1) = emit_report(&[report.clone()], dir.path(), "a").unwrap();
    let (csv2, md2) = emit_report(&[report], dir.path(), "b").unwrap();
    let text = std::fs::read_to_string(&csv1).unwrap();
    assert_eq!(text, std::fs::read_to_string(&csv2).unwrap());
    assert_eq!(std::fs::read(&md1).unwrap(), std::fs::read(&md2).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], COVERAGE_HEADER);
    assert_eq!(lines.len(), 3);
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row.len(), 7);
    assert_eq!(&row[..3], &["cauchy-1-p0p05", "acdc", "0.050000"]);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let err = emit_report(&[], &file.join("sub"), "r").unwrap_err();
    assert!(matches!(err, HarnessError::Io { .. }));
}
