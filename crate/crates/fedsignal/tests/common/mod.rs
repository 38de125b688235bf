#![allow(dead_code)]

use std::path::{Path, PathBuf};

use fedsignal::PipelineConfig;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/fixture")
}

pub fn fixture_config_path() -> PathBuf {
    fixture_dir().join("config.json")
}

/// The shipped fixture config with artifacts redirected to `out`.
pub fn fixture_config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(Some(&fixture_config_path())).expect("fixture config loads");
    cfg.out = out.to_path_buf();
    cfg
}
