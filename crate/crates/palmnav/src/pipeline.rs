//! Detector assembly from a run configuration, and per-window features for
//! training and evaluation.

use palmnav_core::classify::{hs_gate, svm_predict, GateOutcome, Label};
use palmnav_core::detect::Stage;
use palmnav_core::hog::{hog_descriptor, window_variance, VarianceSource};
use palmnav_core::imgproc::{downsample, hue_sat_histogram, rgb_to_hsv};
use palmnav_core::sim::corpus::template_profile;
use palmnav_core::{
    DetectorConfig, HogDescriptor, HogParams, ImageBuffer, SvmModel, TemplateProfile,
};

use crate::config::RunConfig;
use crate::error::Result;
use crate::imageio::load_rgb;

/// Everything the detector needs except the classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub template: TemplateProfile,
    pub hue_bins: usize,
    pub sat_bins: usize,
    pub window: usize,
    pub top_window: usize,
    pub top: HogParams,
    pub bottom: HogParams,
    pub source: VarianceSource,
}

impl FeatureSpec {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let d = &cfg.detector;
        let template = match &cfg.paths.template {
            Some(path) => {
                TemplateProfile::from_hsv(&rgb_to_hsv(&load_rgb(path)?)?, d.hue_bins, d.sat_bins)?
            }
            None => template_profile(d.hue_bins, d.sat_bins)?,
        }
        .with_thresholds(d.hue_threshold, d.sat_threshold)?;
        let top = HogParams::top_layer();
        let bottom = HogParams::bottom_layer();
        Ok(Self {
            template,
            hue_bins: d.hue_bins,
            sat_bins: d.sat_bins,
            window: bottom.window_size,
            top_window: top.window_size,
            top,
            bottom,
            source: d.variance_source,
        })
    }

    pub fn detector(&self, cfg: &RunConfig, model: SvmModel) -> Result<DetectorConfig> {
        let det = DetectorConfig {
            window: self.window,
            top_window: self.top_window,
            top_params: self.top,
            bottom_params: self.bottom,
            variance_threshold: cfg.detector.variance_threshold,
            variance_source: self.source,
            hue_bins: self.hue_bins,
            sat_bins: self.sat_bins,
            template: self.template.clone(),
            model,
            nms_overlap: cfg.detector.nms_overlap,
            refine_radius: cfg.detector.refine_radius,
            foliage_hue: cfg.detector.foliage_hue,
            foliage_min_sat: cfg.detector.foliage_min_sat,
        };
        det.validate()?;
        Ok(det)
    }
}

/// Scores of every stage for one window, computed regardless of earlier
/// rejections.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFeatures {
    pub gate: GateOutcome,
    pub variance: f64,
    pub top: HogDescriptor,
}

pub fn window_features(window: &ImageBuffer, spec: &FeatureSpec) -> Result<WindowFeatures> {
    let hsv = rgb_to_hsv(window)?;
    let gate = hs_gate(
        &hue_sat_histogram(&hsv, spec.hue_bins, spec.sat_bins)?,
        &spec.template,
    )?;
    let value = hsv.value_image();
    let variance = window_variance(&value, &spec.bottom, spec.source)?;
    let top = hog_descriptor(&downsample(&value, spec.top_window)?, &spec.top)?;
    Ok(WindowFeatures {
        gate,
        variance,
        top,
    })
}

/// The stage that rejects the window, or `None` when all three accept.
pub fn cascade_verdict(
    f: &WindowFeatures,
    variance_threshold: f64,
    model: &SvmModel,
) -> Result<Option<Stage>> {
    if !f.gate.pass {
        return Ok(Some(Stage::HueSat));
    }
    if f.variance < variance_threshold {
        return Ok(Some(Stage::Variance));
    }
    Ok(match svm_predict(model, &f.top)?.1 {
        Label::Positive => None,
        Label::Negative => Some(Stage::Svm),
    })
}
