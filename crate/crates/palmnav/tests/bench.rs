//! Timing checks; kept in their own target so no other test competes for the
//! CPU.

mod common;

use palmnav::bench::{bench_frames, run_bench};
use palmnav::config::BenchSettings;
use palmnav_core::classify::SvmModel;
use palmnav_core::sim::corpus::template_profile;
use palmnav_core::{DetectorConfig, HogParams};

fn detector() -> DetectorConfig {
    let params = HogParams::top_layer();
    let model = SvmModel {
        weights: vec![0.0; params.descriptor_len()],
        bias: 0.0,
        params_fingerprint: params.fingerprint(),
        trained_on: Default::default(),
    };
    DetectorConfig::new(template_profile(36, 32).unwrap(), model)
}

#[test]
fn stage_accounting_and_steady_throughput() {
    let det = detector();
    let settings = BenchSettings {
        frames: 20,
        ..BenchSettings::default()
    };
    let frames = bench_frames(&settings, 5).unwrap();
    // Warm caches before timing.
    run_bench(&frames[..2], &det).unwrap();
    let single = run_bench(&frames[..10], &det).unwrap();
    let double = run_bench(&frames, &det).unwrap();
    assert!(single.accounted_share() >= 0.95, "{}", single.text());
    assert!(double.accounted_share() >= 0.95, "{}", double.text());
    let ratio = double.mean_fps() / single.mean_fps();
    assert!(
        (0.9..=1.1).contains(&ratio),
        "{ratio}\n{}\n{}",
        single.text(),
        double.text()
    );
}
