//! The shipped `configs/` directory mirrors the presets.
//! Regenerate with `ACDC_WRITE_CONFIGS=1 cargo test -p acdc-harness --test configs`.

use std::path::PathBuf;

use acdc_harness::config::ExperimentConfig;
use acdc_harness::presets::all_table_rows;

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_match_presets() {
    let dir = config_dir();
    let presets = all_table_rows().unwrap();
    if std::env::var_os("ACDC_WRITE_CONFIGS").is_some() {
        std::fs::create_dir_all(&dir).unwrap();
        for cfg in &presets {
            std::fs::write(dir.join(format!("{}.toml", cfg.setting)), cfg.to_toml().unwrap()).unwrap();
        }
    }
    let mut shipped = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            shipped += 1;
            let cfg = ExperimentConfig::load(&path).unwrap();
            let preset = presets.iter().find(|p| p.setting == cfg.setting);
            assert_eq!(Some(&cfg), preset, "{}", path.display());
            assert_eq!(path.file_stem().unwrap().to_str(), Some(cfg.setting.as_str()));
        }
    }
    assert_eq!(shipped, presets.len());
}
