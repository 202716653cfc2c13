use acdc_harness::presets::{pit_misspecified, pit_normal};
use acdc_harness::study::run_pit_study;
use acdc_harness::HarnessError;

#[test]
fn point_mass_initial_density_breaks_uniformity() {
    let study = run_pit_study(&pit_misspecified()).unwrap();
    assert!(!study.report.pass, "KS {} below {}", study.report.ks, study.report.critical);
    assert!(study.report.ks > 3.0 * study.report.critical);
}

#[test]
fn pit_needs_enough_replicates() {
    let mut cfg = pit_normal();
    cfg.replicates = 20;
    cfg.sampler.n_sims = 500;
    assert!(matches!(run_pit_study(&cfg), Err(HarnessError::Core(_))));
}

#[test]
fn pit_rejects_vector_parameters() {
    let cfg = acdc_harness::presets::cauchy_setting(5, 0.05).unwrap();
    assert!(matches!(run_pit_study(&cfg), Err(HarnessError::Config(_))));
}
