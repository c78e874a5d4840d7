//! Sliding-window crown detector.
//!
//! Windows of side `W` slide with a step of `W/3`. Each window passes three
//! gates in cost order:
//!
//! 1. hue/saturation correlation with the template crown,
//! 2. variance of the bottom-layer (native resolution) HOG, which is high for
//!    needle-textured leaflets,
//! 3. the linear SVM on the HOG of the value channel downsampled to `W_d`.
//!
//! Accepted windows are merged by greedy non-maximum suppression. The
//! reported centre of a detection comes from a flat-kernel mean shift over
//! foliage-coloured pixels, seeded at the centre of the kept window. With
//! refinement disabled it is the mean centre of the windows merged into the
//! kept one.

use alloc::vec::Vec;

use crate::classify::{hs_gate, svm_predict, Label, SvmModel, TemplateProfile};
use crate::error::{Error, Result};
use crate::hog::{
    hog_descriptor, vote_field, window_variance_at, HogParams, VarianceSource, VoteField,
};
use crate::imgproc::{downsample, hue_bin, pixel_to_hsv, sat_bin, HueSatHistogram, ImageBuffer};
use crate::math;

/// Bottom-layer variance cut-off. Calibrated on the synthetic corpus
/// (corpus seed 1, 500 crowns and 500 confusers) as the midpoint between
/// the 5th percentile of crown variances and the 95th percentile of
/// smooth-star variances.
pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 0.00522;
pub const DEFAULT_NMS_OVERLAP: f64 = 0.25;
pub const DEFAULT_HUE_BINS: usize = 36;
pub const DEFAULT_SAT_BINS: usize = 32;
/// Hue range (degrees) and minimum saturation of foliage pixels.
pub const DEFAULT_FOLIAGE_HUE: [f64; 2] = [60.0, 180.0];
pub const DEFAULT_FOLIAGE_MIN_SAT: f64 = 0.3;
const REFINE_MAX_ITERS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Sliding window side `W` in pixels.
    pub window: usize,
    /// Downsampled side `W_d` for the top layer.
    pub top_window: usize,
    pub top_params: HogParams,
    pub bottom_params: HogParams,
    pub variance_threshold: f64,
    pub variance_source: VarianceSource,
    pub hue_bins: usize,
    pub sat_bins: usize,
    pub template: TemplateProfile,
    pub model: SvmModel,
    pub nms_overlap: f64,
    /// Mean-shift kernel radius in pixels; 0 disables refinement.
    pub refine_radius: f64,
    pub foliage_hue: [f64; 2],
    pub foliage_min_sat: f64,
}

impl DetectorConfig {
    /// Default geometry (`W = 300`, `W_d = 24`) around a template and model.
    pub fn new(template: TemplateProfile, model: SvmModel) -> Self {
        Self {
            window: 300,
            top_window: 24,
            top_params: HogParams::top_layer(),
            bottom_params: HogParams::bottom_layer(),
            variance_threshold: DEFAULT_VARIANCE_THRESHOLD,
            variance_source: VarianceSource::Normalized,
            hue_bins: template.histogram.hue_bins.len(),
            sat_bins: template.histogram.sat_bins.len(),
            template,
            model,
            nms_overlap: DEFAULT_NMS_OVERLAP,
            refine_radius: 0.4 * 300.0,
            foliage_hue: DEFAULT_FOLIAGE_HUE,
            foliage_min_sat: DEFAULT_FOLIAGE_MIN_SAT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || !self.window.is_multiple_of(3) {
            return Err(Error::InvalidInput(
                "window size must be a positive multiple of 3",
            ));
        }
        self.top_params.validate()?;
        self.bottom_params.validate()?;
        if self.bottom_params.window_size != self.window {
            return Err(Error::InvalidInput(
                "bottom-layer HOG window must equal the sliding window",
            ));
        }
        if self.top_params.window_size != self.top_window || self.top_window > self.window {
            return Err(Error::InvalidInput(
                "top-layer HOG window must equal the downsampled window",
            ));
        }
        if !(self.variance_threshold > 0.0) {
            return Err(Error::InvalidInput("variance threshold must be positive"));
        }
        if !(0.0..=1.0).contains(&self.nms_overlap) {
            return Err(Error::InvalidInput("NMS overlap must lie in [0, 1]"));
        }
        if !(self.refine_radius >= 0.0 && self.refine_radius.is_finite()) {
            return Err(Error::InvalidInput("refine radius must be non-negative"));
        }
        if !(self.foliage_hue[0] <= self.foliage_hue[1])
            || !(0.0..=1.0).contains(&self.foliage_min_sat)
        {
            return Err(Error::InvalidInput(
                "foliage hue range or saturation out of range",
            ));
        }
        if self.hue_bins != self.template.histogram.hue_bins.len()
            || self.sat_bins != self.template.histogram.sat_bins.len()
        {
            return Err(Error::InvalidInput(
                "template histogram bins differ from detector bins",
            ));
        }
        if self.model.feature_len() != self.top_params.descriptor_len() {
            return Err(Error::ModelMismatch(
                "model length differs from top-layer descriptor",
            ));
        }
        if self.model.params_fingerprint != self.top_params.fingerprint() {
            return Err(Error::ModelMismatch(
                "model trained with other HOG parameters",
            ));
        }
        Ok(())
    }
}

/// Axis-aligned square window in image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub x: usize,
    pub y: usize,
    pub size: usize,
}

impl Window {
    pub fn center(&self) -> [f64; 2] {
        let half = self.size as f64 / 2.0;
        [self.x as f64 + half, self.y as f64 + half]
    }

    pub fn iou(&self, other: &Window) -> f64 {
        let ix = (self.x + self.size)
            .min(other.x + other.size)
            .saturating_sub(self.x.max(other.x));
        let iy = (self.y + self.size)
            .min(other.y + other.size)
            .saturating_sub(self.y.max(other.y));
        let inter = (ix * iy) as f64;
        let union = (self.size * self.size + other.size * other.size) as f64 - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub center: [f64; 2],
    pub window: Window,
    pub svm_score: f64,
    pub variance: f64,
    pub hue_corr: f64,
    pub sat_corr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    HueSat,
    Variance,
    Svm,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::HueSat, Stage::Variance, Stage::Svm];

    pub fn name(&self) -> &'static str {
        match self {
            Stage::HueSat => "hue_sat",
            Stage::Variance => "variance",
            Stage::Svm => "svm",
        }
    }
}

/// Scores computed for a window before it was accepted or rejected.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WindowScores {
    pub hue_corr: Option<f64>,
    pub sat_corr: Option<f64>,
    pub variance: Option<f64>,
    pub svm_score: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Accepted(WindowScores),
    Rejected { stage: Stage, scores: WindowScores },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted(_))
    }

    pub fn scores(&self) -> &WindowScores {
        match self {
            Verdict::Accepted(s) | Verdict::Rejected { scores: s, .. } => s,
        }
    }
}

/// Receives stage boundaries, e.g. for timing. The core never reads clocks.
pub trait StageObserver {
    fn begin(&mut self, _stage: Stage) {}
    fn end(&mut self, _stage: Stage) {}
    /// Suppression and centre refinement after the window scan.
    fn begin_localize(&mut self) {}
    fn end_localize(&mut self) {}
}

impl StageObserver for () {}

/// Window origins at stride `W/3`; the last row/column is clamped so it ends
/// exactly on the image border.
pub fn slide_windows(width: usize, height: usize, window: usize) -> Result<Vec<(usize, usize)>> {
    if window == 0 {
        return Err(Error::InvalidInput("window size must be positive"));
    }
    if width < window || height < window {
        return Err(Error::InvalidInput("image smaller than the sliding window"));
    }
    let stride = (window / 3).max(1);
    let axis = |len: usize| {
        let mut v: Vec<usize> = (0..=len - window).step_by(stride).collect();
        if *v.last().unwrap_or(&0) + window < len {
            v.push(len - window);
        }
        v
    };
    let xs = axis(width);
    let ys = axis(height);
    Ok(ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| (x, y)))
        .collect())
}

/// Hue/saturation bin indices, the value channel and (once a window reaches
/// the variance stage) the orientation votes of a whole frame.
struct Planes {
    width: usize,
    height: usize,
    hue_idx: Vec<u16>,
    sat_idx: Vec<u16>,
    value: ImageBuffer,
    votes: Option<VoteField>,
}

impl Planes {
    fn new(img: &ImageBuffer, hue_bins: usize, sat_bins: usize) -> Result<Self> {
        let n = img.width() * img.height();
        let mut hue_idx = Vec::with_capacity(n);
        let mut sat_idx = Vec::with_capacity(n);
        let mut value = Vec::with_capacity(n);
        for px in img.data().chunks_exact(3) {
            let (h, s, v) = pixel_to_hsv([px[0], px[1], px[2]]);
            hue_idx.push(hue_bin(h, hue_bins) as u16);
            sat_idx.push(sat_bin(s, sat_bins) as u16);
            value.push(v);
        }
        let value = ImageBuffer::new(img.width(), img.height(), 1, value)?;
        Ok(Planes {
            width: img.width(),
            height: img.height(),
            hue_idx,
            sat_idx,
            value,
            votes: None,
        })
    }

    fn histogram(&self, w: &Window, hue_bins: usize, sat_bins: usize) -> HueSatHistogram {
        let mut hist = HueSatHistogram::empty(hue_bins, sat_bins);
        for y in w.y..w.y + w.size {
            let row = y * self.width;
            for i in row + w.x..row + w.x + w.size {
                hist.hue_bins[self.hue_idx[i] as usize] += 1;
                hist.sat_bins[self.sat_idx[i] as usize] += 1;
            }
        }
        hist.pixel_count = (w.size * w.size) as u32;
        hist
    }

    fn variance(&mut self, w: &Window, cfg: &DetectorConfig) -> Result<f64> {
        if self.votes.is_none() {
            self.votes = Some(vote_field(&self.value, cfg.bottom_params.n_bins)?);
        }
        let votes = self
            .votes
            .as_ref()
            .ok_or(Error::Internal("vote field missing"))?;
        window_variance_at(
            votes,
            &self.value,
            w.x,
            w.y,
            &cfg.bottom_params,
            cfg.variance_source,
        )
    }
}

/// Per-bin foliage tests from bin centres.
fn foliage_tables(cfg: &DetectorConfig) -> (Vec<bool>, Vec<bool>) {
    let hue = (0..cfg.hue_bins)
        .map(|i| {
            let c = (i as f64 + 0.5) * 360.0 / cfg.hue_bins as f64;
            c >= cfg.foliage_hue[0] && c <= cfg.foliage_hue[1]
        })
        .collect();
    let sat = (0..cfg.sat_bins)
        .map(|i| (i as f64 + 0.5) / cfg.sat_bins as f64 >= cfg.foliage_min_sat)
        .collect();
    (hue, sat)
}

/// Flat-kernel mean shift over foliage pixels from `seed`. Stops when the
/// step falls below a quarter pixel or the disk holds too few foliage pixels.
fn refine_center(
    planes: &Planes,
    seed: [f64; 2],
    cfg: &DetectorConfig,
    tables: &(Vec<bool>, Vec<bool>),
) -> [f64; 2] {
    let r = cfg.refine_radius;
    let r2 = r * r;
    let min_count = 0.01 * core::f64::consts::PI * r2;
    let mut c = seed;
    for _ in 0..REFINE_MAX_ITERS {
        let x0 = math::floor(c[0] - r).max(0.0) as usize;
        let y0 = math::floor(c[1] - r).max(0.0) as usize;
        let x1 = (math::floor(c[0] + r) as usize + 1).min(planes.width);
        let y1 = (math::floor(c[1] + r) as usize + 1).min(planes.height);
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for y in y0..y1 {
            let py = y as f64 + 0.5;
            let dy2 = (py - c[1]) * (py - c[1]);
            let row = y * planes.width;
            for x in x0..x1 {
                let px = x as f64 + 0.5;
                if (px - c[0]) * (px - c[0]) + dy2 > r2 {
                    continue;
                }
                let i = row + x;
                if tables.0[planes.hue_idx[i] as usize] && tables.1[planes.sat_idx[i] as usize] {
                    sx += px;
                    sy += py;
                    n += 1.0;
                }
            }
        }
        if n < min_count {
            break;
        }
        let next = [sx / n, sy / n];
        let step = math::hypot(next[0] - c[0], next[1] - c[1]);
        c = next;
        if step < 0.25 {
            break;
        }
    }
    c
}

fn evaluate(
    planes: &mut Planes,
    w: &Window,
    cfg: &DetectorConfig,
    obs: &mut dyn StageObserver,
) -> Result<Verdict> {
    let mut scores = WindowScores::default();

    obs.begin(Stage::HueSat);
    let hist = planes.histogram(w, cfg.hue_bins, cfg.sat_bins);
    let gate = hs_gate(&hist, &cfg.template);
    obs.end(Stage::HueSat);
    let gate = gate?;
    scores.hue_corr = gate.hue_corr;
    scores.sat_corr = gate.sat_corr;
    if !gate.pass {
        return Ok(Verdict::Rejected {
            stage: Stage::HueSat,
            scores,
        });
    }

    obs.begin(Stage::Variance);
    let variance = planes.variance(w, cfg);
    obs.end(Stage::Variance);
    let variance = variance?;
    scores.variance = Some(variance);
    if variance < cfg.variance_threshold {
        return Ok(Verdict::Rejected {
            stage: Stage::Variance,
            scores,
        });
    }

    obs.begin(Stage::Svm);
    let svm = planes
        .value
        .crop(w.x, w.y, w.size, w.size)
        .and_then(|c| downsample(&c, cfg.top_window))
        .and_then(|small| hog_descriptor(&small, &cfg.top_params))
        .and_then(|d| svm_predict(&cfg.model, &d));
    obs.end(Stage::Svm);
    let (score, label) = svm?;
    scores.svm_score = Some(score);
    if label == Label::Negative {
        return Ok(Verdict::Rejected {
            stage: Stage::Svm,
            scores,
        });
    }
    Ok(Verdict::Accepted(scores))
}

/// Runs the three gates on one `W`×`W` RGB window.
pub fn classify_window(window: &ImageBuffer, cfg: &DetectorConfig) -> Result<Verdict> {
    classify_window_with(window, cfg, &mut ())
}

pub fn classify_window_with(
    window: &ImageBuffer,
    cfg: &DetectorConfig,
    obs: &mut dyn StageObserver,
) -> Result<Verdict> {
    if window.channels() != 3 {
        return Err(Error::InvalidInput("windows must be RGB"));
    }
    if window.width() != cfg.window || window.height() != cfg.window {
        return Err(Error::DimensionMismatch {
            expected: cfg.window,
            actual: window.width().max(window.height()),
        });
    }
    obs.begin(Stage::HueSat);
    let planes = Planes::new(window, cfg.hue_bins, cfg.sat_bins);
    obs.end(Stage::HueSat);
    evaluate(
        &mut planes?,
        &Window {
            x: 0,
            y: 0,
            size: cfg.window,
        },
        cfg,
        obs,
    )
}

/// Every window that passes all three gates, in origin order, before
/// suppression.
pub fn detect_candidates(img: &ImageBuffer, cfg: &DetectorConfig) -> Result<Vec<Detection>> {
    Ok(candidates_with(img, cfg, &mut ())?.0)
}

fn candidates_with(
    img: &ImageBuffer,
    cfg: &DetectorConfig,
    obs: &mut dyn StageObserver,
) -> Result<(Vec<Detection>, Planes)> {
    if img.channels() != 3 {
        return Err(Error::InvalidInput("detection needs an RGB image"));
    }
    let origins = slide_windows(img.width(), img.height(), cfg.window)?;
    obs.begin(Stage::HueSat);
    let planes = Planes::new(img, cfg.hue_bins, cfg.sat_bins);
    obs.end(Stage::HueSat);
    let mut planes = planes?;
    let mut out = Vec::new();
    for (x, y) in origins {
        let window = Window {
            x,
            y,
            size: cfg.window,
        };
        if let Verdict::Accepted(s) = evaluate(&mut planes, &window, cfg, obs)? {
            out.push(Detection {
                center: window.center(),
                window,
                svm_score: s.svm_score.unwrap_or(0.0),
                variance: s.variance.unwrap_or(0.0),
                hue_corr: s.hue_corr.unwrap_or(0.0),
                sat_corr: s.sat_corr.unwrap_or(0.0),
            });
        }
    }
    Ok((out, planes))
}

pub fn detect(img: &ImageBuffer, cfg: &DetectorConfig) -> Result<Vec<Detection>> {
    detect_with(img, cfg, &mut ())
}

pub fn detect_with(
    img: &ImageBuffer,
    cfg: &DetectorConfig,
    obs: &mut dyn StageObserver,
) -> Result<Vec<Detection>> {
    cfg.validate()?;
    let (candidates, planes) = candidates_with(img, cfg, obs)?;
    obs.begin_localize();
    let tables = foliage_tables(cfg);
    let out = nms_clusters(&candidates, cfg.nms_overlap)
        .into_iter()
        .map(|cluster| {
            let mut det = candidates[cluster.kept];
            if cfg.refine_radius > 0.0 {
                det.center = refine_center(&planes, det.window.center(), cfg, &tables);
                return det;
            }
            let n = cluster.members.len() as f64;
            let (sx, sy) = cluster.members.iter().fold((0.0, 0.0), |(ax, ay), &i| {
                (ax + candidates[i].center[0], ay + candidates[i].center[1])
            });
            det.center = [sx / n, sy / n];
            det
        })
        .collect();
    obs.end_localize();
    Ok(out)
}

/// A window kept by suppression and every window it suppressed (itself
/// included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub kept: usize,
    pub members: Vec<usize>,
}

fn score_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    // Stable: equal scores keep input (origin) order.
    order.sort_by(|&a, &b| dets[b].svm_score.total_cmp(&dets[a].svm_score));
    order
}

/// Greedy suppression returning cluster membership; clusters come out in
/// descending score order.
pub fn nms_clusters(dets: &[Detection], overlap: f64) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = Vec::new();
    for i in score_order(dets) {
        match clusters
            .iter_mut()
            .find(|c| dets[c.kept].window.iou(&dets[i].window) > overlap)
        {
            Some(c) => c.members.push(i),
            None => clusters.push(Cluster {
                kept: i,
                members: alloc::vec![i],
            }),
        }
    }
    clusters
}

/// Greedy non-maximum suppression by score: a window is dropped when its IoU
/// with an already kept window exceeds `overlap`.
pub fn nms(dets: &[Detection], overlap: f64) -> Vec<Detection> {
    nms_clusters(dets, overlap)
        .into_iter()
        .map(|c| dets[c.kept])
        .collect()
}

/// Nearest-rank percentile of `values` (`p` in `[0, 1]`).
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = libm::ceil(p.clamp(0.0, 1.0) * sorted.len() as f64) as usize;
    Some(sorted[rank.saturating_sub(1).min(sorted.len() - 1)])
}

/// Midpoint between the 5th percentile of positive-window variances and the
/// 95th percentile of smooth-crown variances.
pub fn calibrate_variance_threshold(positive: &[f64], smooth: &[f64]) -> Result<f64> {
    let lo = percentile(positive, 0.05).ok_or(Error::InvalidInput("no positive variances"))?;
    let hi = percentile(smooth, 0.95).ok_or(Error::InvalidInput("no smooth-crown variances"))?;
    Ok(0.5 * (lo + hi))
}

/// Grid search (step 0.05) over hue/saturation thresholds: the pair with the
/// best precision among those keeping recall at or above `min_recall`.
/// Inputs are `(hue_corr, sat_corr)` pairs; `None` correlations always fail.
pub fn tune_gate_thresholds(
    positive: &[(Option<f64>, Option<f64>)],
    negative: &[(Option<f64>, Option<f64>)],
    min_recall: f64,
) -> Option<(f64, f64)> {
    let passes = |c: &(Option<f64>, Option<f64>), h: f64, s: f64| {
        matches!(c.0, Some(v) if v >= h) && matches!(c.1, Some(v) if v >= s)
    };
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for hi in 0..=40 {
        for si in 0..=40 {
            let (h, s) = ((hi as f64 - 20.0) / 20.0, (si as f64 - 20.0) / 20.0);
            let tp = positive.iter().filter(|c| passes(c, h, s)).count() as f64;
            let fp = negative.iter().filter(|c| passes(c, h, s)).count() as f64;
            let recall = if positive.is_empty() {
                0.0
            } else {
                tp / positive.len() as f64
            };
            if recall < min_recall {
                continue;
            }
            let precision = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
            let better = match best {
                None => true,
                Some((bp, br, _, _)) => precision > bp || (precision == bp && recall > br),
            };
            if better {
                best = Some((precision, recall, h, s));
            }
        }
    }
    best.map(|(_, _, h, s)| (h, s))
}
