#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use palmnav::config::RunConfig;
use palmnav::corpus::render;
use palmnav::pipeline::FeatureSpec;
use palmnav::train::{featurize, train, TrainReport};
use palmnav_core::rng::derive_seed;
use palmnav_core::{DetectorConfig, SvmModel};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_palmnav")
}

pub fn palmnav(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("spawn palmnav")
}

pub fn path_arg(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

pub fn map(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("maps")
        .join(format!("{name}.toml"))
}

/// Trains on `per_class` generated windows of each class.
pub fn trained(per_class: usize, seed: u64) -> (SvmModel, TrainReport) {
    let cfg = RunConfig {
        seed,
        ..RunConfig::default()
    };
    let samples = render(per_class, per_class, seed).unwrap();
    let featured = featurize(&samples, &FeatureSpec::from_config(&cfg).unwrap()).unwrap();
    train(&featured, &cfg, derive_seed(seed, "train")).unwrap()
}

pub fn detector_for(cfg: &RunConfig, model: SvmModel) -> DetectorConfig {
    FeatureSpec::from_config(cfg)
        .unwrap()
        .detector(cfg, model)
        .unwrap()
}
