//! Oracle detections: projected ground truth with scripted noise, dropout
//! and false positives.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::world::{project_tree, WorldSpec};
use crate::detect::{Detection, Window};
use crate::error::{Error, Result};
use crate::nav::{CameraModel, Pose};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct SensorScript {
    pub pixel_noise_sigma: f64,
    /// Ordered, non-overlapping `(start, end)` intervals in seconds.
    pub dropout_windows: Vec<(f64, f64)>,
    /// Probability per frame of one spurious detection.
    pub false_positive_rate: f64,
    pub seed: u64,
    /// Crowns closer than this to the frame border are not reported (px).
    pub edge_margin: f64,
}

impl Default for SensorScript {
    fn default() -> Self {
        Self {
            pixel_noise_sigma: 0.0,
            dropout_windows: Vec::new(),
            false_positive_rate: 0.0,
            seed: 0,
            edge_margin: 60.0,
        }
    }
}

impl SensorScript {
    pub fn validate(&self) -> Result<()> {
        if !(self.pixel_noise_sigma >= 0.0 && self.pixel_noise_sigma.is_finite()) {
            return Err(Error::InvalidInput("pixel noise must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.false_positive_rate) {
            return Err(Error::InvalidInput(
                "false positive rate must lie in [0, 1]",
            ));
        }
        if !(self.edge_margin >= 0.0) {
            return Err(Error::InvalidInput("edge margin must be non-negative"));
        }
        let mut last_end = f64::NEG_INFINITY;
        for &(a, b) in &self.dropout_windows {
            if !(a < b) || a < last_end {
                return Err(Error::InvalidInput(
                    "dropout windows must be ordered and non-overlapping",
                ));
            }
            last_end = b;
        }
        Ok(())
    }

    pub fn in_dropout(&self, t: f64) -> bool {
        self.dropout_windows.iter().any(|&(a, b)| t >= a && t < b)
    }
}

/// Detection record for an oracle hit centred at `p`.
pub fn oracle_detection(p: [f64; 2], window: usize) -> Detection {
    let half = window as f64 / 2.0;
    Detection {
        center: p,
        window: Window {
            x: (p[0] - half).max(0.0) as usize,
            y: (p[1] - half).max(0.0) as usize,
            size: window,
        },
        svm_score: 1.0,
        variance: 0.0,
        hue_corr: 1.0,
        sat_corr: 1.0,
    }
}

/// Palms visible from `mav` at time `t`, in world order.
pub fn synth_detections(
    world: &WorldSpec,
    mav: &Pose,
    cam: &CameraModel,
    script: &SensorScript,
    t: f64,
    rng: &mut SimRng,
) -> Result<Vec<Detection>> {
    let noise = Normal::new(0.0, script.pixel_noise_sigma)
        .map_err(|_| Error::InvalidInput("pixel noise must be non-negative"))?;
    let mut out = Vec::new();
    // Noise is drawn for every palm every frame so the stream does not
    // depend on visibility or dropout.
    for tree in world.palms() {
        let (dx, dy) = (noise.sample(rng), noise.sample(rng));
        if let Some(p) = project_tree(tree, mav, cam, script.edge_margin) {
            out.push(oracle_detection([p[0] + dx, p[1] + dy], 300));
        }
    }
    let fp = rng.random_bool(script.false_positive_rate);
    let fp_pos = [
        rng.random_range(0.0..cam.width as f64),
        rng.random_range(0.0..cam.height as f64),
    ];
    if script.in_dropout(t) {
        return Ok(Vec::new());
    }
    if fp {
        out.push(oracle_detection(fp_pos, 300));
    }
    Ok(out)
}
