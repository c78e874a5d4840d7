#![allow(dead_code)]

pub mod oracle;

use palmnav_core::classify::{svm_train, TrainHyper};
use palmnav_core::hog::hog_descriptor;
use palmnav_core::imgproc::{downsample, rgb_to_hsv};
use palmnav_core::rng::SimRng;
use palmnav_core::sim::corpus::{corpus_plan, render_sample, template_profile};
use palmnav_core::sim::texture::{paint, Placed};
use palmnav_core::sim::Species;
use palmnav_core::{DetectorConfig, HogParams, ImageBuffer};
use rand::SeedableRng;

/// A detector with a small SVM trained on generated windows.
pub fn trained_detector() -> DetectorConfig {
    let params = HogParams::top_layer();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for spec in corpus_plan(120, 120, 41) {
        let value = rgb_to_hsv(&render_sample(&spec).unwrap())
            .unwrap()
            .value_image();
        let d = hog_descriptor(&downsample(&value, params.window_size).unwrap(), &params).unwrap();
        if spec.is_positive() {
            pos.push(d);
        } else {
            neg.push(d);
        }
    }
    let (model, _) = svm_train(
        &pos,
        &neg,
        &TrainHyper {
            seed: 5,
            ..TrainHyper::default()
        },
    )
    .unwrap();
    DetectorConfig::new(template_profile(36, 32).unwrap(), model)
}

/// Objects over soil on a `w`×`h` frame.
pub fn scene(w: usize, h: usize, objects: &[Placed], seed: u64) -> ImageBuffer {
    let mut rng = SimRng::seed_from_u64(seed);
    paint(
        w,
        h,
        objects,
        |x, y| [x / 240.0, -y / 240.0],
        seed,
        0.012,
        &mut rng,
    )
    .unwrap()
}

pub fn palm(center: [f64; 2]) -> Placed {
    Placed::new(Species::Palm, center, 112.0)
}
