//! Colour gating and the linear SVM.
//!
//! The hue/saturation gate compares a window's histograms with those of a
//! template crown using the ordinary Pearson coefficient (range `[-1, 1]`).
//! The SVM is linear and trained in the primal with a Pegasos-style
//! stochastic subgradient method: step `1/(λt)`, projection onto the ball of
//! radius `1/√λ`, and a bias carried as an extra constant feature.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hog::{HogDescriptor, HogParams};
use crate::imgproc::{hue_sat_histogram, HsvImage, HueSatHistogram};
use crate::math;

/// Pearson correlation of two equally long vectors.
///
/// Fails with [`Error::Degenerate`] when either vector is constant.
pub fn pearson_corr(reference: &[f64], current: &[f64]) -> Result<f64> {
    if reference.len() != current.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            actual: current.len(),
        });
    }
    if reference.len() < 2 {
        return Err(Error::InvalidInput(
            "correlation needs at least two elements",
        ));
    }
    let n = reference.len() as f64;
    let mean_a = reference.iter().sum::<f64>() / n;
    let mean_b = current.iter().sum::<f64>() / n;
    let (mut cov, mut var_a, mut var_b) = (0.0, 0.0, 0.0);
    for (&a, &b) in reference.iter().zip(current) {
        let (da, db) = (a - mean_a, b - mean_b);
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::Degenerate("constant histogram has no correlation"));
    }
    Ok((cov / math::sqrt(var_a * var_b)).clamp(-1.0, 1.0))
}

/// Reference crown histograms and the correlation cut-offs of the gate.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateProfile {
    pub histogram: HueSatHistogram,
    pub hue_threshold: f64,
    pub sat_threshold: f64,
}

pub const DEFAULT_HUE_THRESHOLD: f64 = 0.5;
pub const DEFAULT_SAT_THRESHOLD: f64 = 0.4;

impl TemplateProfile {
    pub fn new(histogram: HueSatHistogram, hue_threshold: f64, sat_threshold: f64) -> Result<Self> {
        if histogram.pixel_count == 0 {
            return Err(Error::InvalidInput("template histogram is empty"));
        }
        if !(-1.0..=1.0).contains(&hue_threshold) || !(-1.0..=1.0).contains(&sat_threshold) {
            return Err(Error::InvalidInput("gate thresholds must lie in [-1, 1]"));
        }
        Ok(Self {
            histogram,
            hue_threshold,
            sat_threshold,
        })
    }

    /// Builds a profile from a template crown image.
    pub fn from_hsv(img: &HsvImage, hue_bins: usize, sat_bins: usize) -> Result<Self> {
        Self::new(
            hue_sat_histogram(img, hue_bins, sat_bins)?,
            DEFAULT_HUE_THRESHOLD,
            DEFAULT_SAT_THRESHOLD,
        )
    }

    pub fn with_thresholds(mut self, hue: f64, sat: f64) -> Result<Self> {
        self.hue_threshold = hue;
        self.sat_threshold = sat;
        Self::new(self.histogram, hue, sat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateOutcome {
    pub pass: bool,
    /// `None` when the correlation is undefined (a constant histogram).
    pub hue_corr: Option<f64>,
    pub sat_corr: Option<f64>,
}

/// Hue-and-saturation gate: both correlations must reach their thresholds.
pub fn hs_gate(window: &HueSatHistogram, template: &TemplateProfile) -> Result<GateOutcome> {
    let t = &template.histogram;
    if window.hue_bins.len() != t.hue_bins.len() {
        return Err(Error::DimensionMismatch {
            expected: t.hue_bins.len(),
            actual: window.hue_bins.len(),
        });
    }
    if window.sat_bins.len() != t.sat_bins.len() {
        return Err(Error::DimensionMismatch {
            expected: t.sat_bins.len(),
            actual: window.sat_bins.len(),
        });
    }
    let hue_corr = pearson_corr(&t.hue_f64(), &window.hue_f64()).ok();
    let sat_corr = pearson_corr(&t.sat_f64(), &window.sat_f64()).ok();
    let pass = matches!(hue_corr, Some(h) if h >= template.hue_threshold)
        && matches!(sat_corr, Some(s) if s >= template.sat_threshold);
    Ok(GateOutcome {
        pass,
        hue_corr,
        sat_corr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrainCounts {
    pub positives: u64,
    pub negatives: u64,
}

/// Linear classifier over HOG descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub params_fingerprint: u64,
    pub trained_on: TrainCounts,
}

impl SvmModel {
    pub fn feature_len(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, values: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(values)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias
    }
}

pub fn svm_predict(model: &SvmModel, desc: &HogDescriptor) -> Result<(f64, Label)> {
    if desc.values.len() != model.feature_len() {
        return Err(Error::ModelMismatch("descriptor length differs from model"));
    }
    if desc.params.fingerprint() != model.params_fingerprint {
        return Err(Error::ModelMismatch(
            "descriptor parameters differ from training",
        ));
    }
    let score = model.decision(&desc.values);
    let label = if score >= 0.0 {
        Label::Positive
    } else {
        Label::Negative
    };
    Ok((score, label))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainHyper {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            epochs: 40,
            seed: 0,
        }
    }
}

/// Result of [`pegasos`]: the separator and the regularized objective
/// `λ/2‖(w, b)‖² + mean hinge` after every epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub objective: Vec<f64>,
}

/// Regularized hinge objective of a separator on labelled samples
/// (labels are ±1).
pub fn svm_objective(
    samples: &[&[f64]],
    labels: &[f64],
    weights: &[f64],
    bias: f64,
    lambda: f64,
) -> f64 {
    let norm_sq = weights.iter().map(|w| w * w).sum::<f64>() + bias * bias;
    let hinge: f64 = samples
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let s = weights
                .iter()
                .zip(x.iter())
                .map(|(w, v)| w * v)
                .sum::<f64>()
                + bias;
            (1.0 - y * s).max(0.0)
        })
        .sum();
    0.5 * lambda * norm_sq + hinge / samples.len() as f64
}

/// Pegasos subgradient descent over labelled samples (labels ±1).
///
/// The sample order is reshuffled each epoch from `hyper.seed`, so the fit is
/// bitwise reproducible. The returned separator is the epoch-end iterate with
/// the lowest objective; `objective[e]` is the best value seen up to epoch
/// `e`, hence non-increasing.
pub fn pegasos(samples: &[&[f64]], labels: &[f64], hyper: &TrainHyper) -> Result<LinearFit> {
    if samples.is_empty() || samples.len() != labels.len() {
        return Err(Error::InvalidInput(
            "training needs matching, non-empty samples and labels",
        ));
    }
    if !(hyper.lambda > 0.0) || hyper.epochs == 0 {
        return Err(Error::InvalidInput(
            "lambda must be positive and epochs at least 1",
        ));
    }
    let dim = samples[0].len();
    for x in samples {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "training features contain NaN or infinity",
            ));
        }
    }
    let lambda = hyper.lambda;
    let radius_sq = 1.0 / lambda;
    // Last slot holds the bias (constant feature 1).
    let mut w = vec![0.0f64; dim + 1];
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut t: u64 = 0;
    let mut objective = Vec::with_capacity(hyper.epochs);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let x = samples[i];
            let y = labels[i];
            let score = w[..dim]
                .iter()
                .zip(x.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + w[dim];
            let shrink = 1.0 - eta * lambda;
            for v in w.iter_mut() {
                *v *= shrink;
            }
            if y * score < 1.0 {
                for (v, &xi) in w[..dim].iter_mut().zip(x.iter()) {
                    *v += eta * y * xi;
                }
                w[dim] += eta * y;
            }
            let norm_sq: f64 = w.iter().map(|v| v * v).sum();
            if norm_sq > radius_sq {
                let scale = math::sqrt(radius_sq / norm_sq);
                for v in w.iter_mut() {
                    *v *= scale;
                }
            }
        }
        let j = svm_objective(samples, labels, &w[..dim], w[dim], lambda);
        if best.as_ref().is_none_or(|(bj, _)| j < *bj) {
            best = Some((j, w.clone()));
        }
        objective.push(best.as_ref().map_or(j, |(bj, _)| *bj));
    }
    let mut w = best.map_or(w, |(_, bw)| bw);
    let bias = w.pop().unwrap_or(0.0);
    Ok(LinearFit {
        weights: w,
        bias,
        objective,
    })
}

/// Trains a model separating `pos` from `neg` descriptors.
pub fn svm_train(
    pos: &[HogDescriptor],
    neg: &[HogDescriptor],
    hyper: &TrainHyper,
) -> Result<(SvmModel, LinearFit)> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::InvalidInput("both classes need at least one sample"));
    }
    let params: HogParams = pos[0].params;
    let dim = pos[0].values.len();
    let mut samples: Vec<&[f64]> = Vec::with_capacity(pos.len() + neg.len());
    let mut labels = Vec::with_capacity(pos.len() + neg.len());
    for (set, y) in [(pos, 1.0), (neg, -1.0)] {
        for d in set {
            if d.params != params {
                return Err(Error::ModelMismatch(
                    "training descriptors use different parameters",
                ));
            }
            if d.values.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: d.values.len(),
                });
            }
            samples.push(&d.values);
            labels.push(y);
        }
    }
    let fit = pegasos(&samples, &labels, hyper)?;
    let model = SvmModel {
        weights: fit.weights.clone(),
        bias: fit.bias,
        params_fingerprint: params.fingerprint(),
        trained_on: TrainCounts {
            positives: pos.len() as u64,
            negatives: neg.len() as u64,
        },
    };
    Ok((model, fit))
}

pub const MODEL_MAGIC: [u8; 4] = *b"FNAV";
pub const MODEL_VERSION: u16 = 1;

/// Little-endian model encoding:
/// magic `FNAV`, version `u16`, feature length `u32`, weights `f64`×len,
/// bias `f64`, fingerprint `u64`, then positive and negative training counts
/// as `u64`.
pub fn encode_model(model: &SvmModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 2 + 4 + 8 * model.weights.len() + 8 * 4);
    out.extend_from_slice(&MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.weights.len() as u32).to_le_bytes());
    for w in &model.weights {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&model.bias.to_le_bytes());
    out.extend_from_slice(&model.params_fingerprint.to_le_bytes());
    out.extend_from_slice(&model.trained_on.positives.to_le_bytes());
    out.extend_from_slice(&model.trained_on.negatives.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        if self.bytes.len() < N {
            return Err(Error::CorruptModel("truncated"));
        }
        let (head, rest) = self.bytes.split_at(N);
        self.bytes = rest;
        let mut out = [0u8; N];
        out.copy_from_slice(head);
        Ok(out)
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<SvmModel> {
    let mut r = Reader { bytes };
    if r.take::<4>()? != MODEL_MAGIC {
        return Err(Error::CorruptModel("bad magic"));
    }
    let version = u16::from_le_bytes(r.take()?);
    if version != MODEL_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let len = u32::from_le_bytes(r.take()?) as usize;
    if r.bytes.len() != len * 8 + 8 * 4 {
        return Err(Error::CorruptModel("length does not match header"));
    }
    let mut weights = Vec::with_capacity(len);
    for _ in 0..len {
        weights.push(f64::from_le_bytes(r.take()?));
    }
    let bias = f64::from_le_bytes(r.take()?);
    let params_fingerprint = u64::from_le_bytes(r.take()?);
    let positives = u64::from_le_bytes(r.take()?);
    let negatives = u64::from_le_bytes(r.take()?);
    if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(Error::CorruptModel("non-finite weights"));
    }
    Ok(SvmModel {
        weights,
        bias,
        params_fingerprint,
        trained_on: TrainCounts {
            positives,
            negatives,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_histograms_correlate_fully() {
        let h = [3.0, 9.0, 1.0, 0.0, 4.0];
        assert_eq!(pearson_corr(&h, &h).unwrap(), 1.0);
    }

    #[test]
    fn reversed_histogram_anticorrelates() {
        let h = [3.0, 9.0, 1.0, 0.0, 4.0];
        let r: Vec<f64> = h.iter().map(|v| 20.0 - v).collect();
        assert!((pearson_corr(&h, &r).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_histogram_is_degenerate() {
        assert!(matches!(
            pearson_corr(&[2.0; 4], &[1.0, 2.0, 3.0, 4.0]),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            pearson_corr(&[1.0, 2.0, 3.0, 4.0], &[0.0; 4]),
            Err(Error::Degenerate(_))
        ));
        assert!(pearson_corr(&[1.0, 2.0], &[1.0]).is_err());
    }

    fn hist(hue: &[u32], sat: &[u32]) -> HueSatHistogram {
        HueSatHistogram {
            hue_bins: hue.to_vec(),
            sat_bins: sat.to_vec(),
            pixel_count: hue.iter().sum(),
        }
    }

    #[test]
    fn gate_passes_template_itself() {
        let h = hist(&[1, 5, 9, 2], &[0, 3, 12, 2]);
        let t = TemplateProfile::new(h.clone(), 0.5, 0.4).unwrap();
        let out = hs_gate(&h, &t).unwrap();
        assert!(out.pass);
        assert_eq!(out.hue_corr, Some(1.0));
        assert_eq!(out.sat_corr, Some(1.0));
    }

    #[test]
    fn vacuous_gate_passes_everything_but_degenerate() {
        let t = TemplateProfile::new(hist(&[1, 5, 9, 2], &[0, 3, 12, 2]), -1.0, -1.0).unwrap();
        let other = hist(&[9, 0, 0, 8], &[7, 0, 1, 9]);
        assert!(hs_gate(&other, &t).unwrap().pass);
        let flat = hist(&[4, 4, 4, 4], &[7, 0, 1, 8]);
        let out = hs_gate(&flat, &t).unwrap();
        assert!(!out.pass);
        assert_eq!(out.hue_corr, None);
    }

    #[test]
    fn gate_rejects_bin_mismatch() {
        let t = TemplateProfile::new(hist(&[1, 5, 9, 2], &[0, 3, 12, 2]), 0.5, 0.4).unwrap();
        assert!(hs_gate(&hist(&[1, 2, 3], &[0, 3, 12, 2]), &t).is_err());
    }

    #[test]
    fn template_validation() {
        assert!(TemplateProfile::new(HueSatHistogram::empty(4, 4), 0.5, 0.4).is_err());
        assert!(TemplateProfile::new(hist(&[1, 2], &[2, 1]), 1.5, 0.4).is_err());
    }

    fn toy_params() -> HogParams {
        HogParams::top_layer()
    }

    fn desc(values: Vec<f64>) -> HogDescriptor {
        HogDescriptor {
            values,
            params: toy_params(),
        }
    }

    #[test]
    fn zero_model_negative_bias() {
        let m = SvmModel {
            weights: vec![0.0; 3],
            bias: -1.0,
            params_fingerprint: toy_params().fingerprint(),
            trained_on: TrainCounts::default(),
        };
        assert_eq!(
            svm_predict(&m, &desc(vec![0.2, 0.9, 0.4])).unwrap(),
            (-1.0, Label::Negative)
        );
    }

    #[test]
    fn self_projection_scores_norm_squared() {
        let v = vec![0.6, 0.0, 0.8];
        let m = SvmModel {
            weights: v.clone(),
            bias: 0.0,
            params_fingerprint: toy_params().fingerprint(),
            trained_on: TrainCounts::default(),
        };
        let (s, l) = svm_predict(&m, &desc(v)).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(l, Label::Positive);
    }

    #[test]
    fn predict_checks_shape_and_fingerprint() {
        let m = SvmModel {
            weights: vec![1.0; 3],
            bias: 0.0,
            params_fingerprint: toy_params().fingerprint(),
            trained_on: TrainCounts::default(),
        };
        assert!(matches!(
            svm_predict(&m, &desc(vec![0.0; 4])),
            Err(Error::ModelMismatch(_))
        ));
        let other = HogDescriptor {
            values: vec![0.0; 3],
            params: HogParams::bottom_layer(),
        };
        assert!(matches!(
            svm_predict(&m, &other),
            Err(Error::ModelMismatch(_))
        ));
    }

    fn toy_set() -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..10 {
            let j = i as f64 * 0.05;
            xs.push(vec![1.0, j - 0.2]);
            ys.push(1.0);
            xs.push(vec![-1.0, 0.2 - j]);
            ys.push(-1.0);
        }
        (xs, ys)
    }

    #[test]
    fn separable_toy_set_is_fit_exactly() {
        let (xs, ys) = toy_set();
        let refs: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
        let fit = pegasos(
            &refs,
            &ys,
            &TrainHyper {
                lambda: 0.01,
                epochs: 30,
                seed: 3,
            },
        )
        .unwrap();
        for (x, y) in refs.iter().zip(&ys) {
            let s = fit
                .weights
                .iter()
                .zip(x.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + fit.bias;
            assert!(s * y > 0.0);
        }
        for pair in fit.objective.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-6, "{:?}", fit.objective);
        }
        let last = *fit.objective.last().unwrap();
        assert_eq!(
            last,
            svm_objective(&refs, &ys, &fit.weights, fit.bias, 0.01)
        );
    }

    #[test]
    fn unit_axis_toy_set_is_fit_exactly() {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..10 {
            xs.push(vec![1.0, 0.0]);
            ys.push(1.0);
            xs.push(vec![-1.0, 0.0]);
            ys.push(-1.0);
        }
        let refs: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
        let fit = pegasos(
            &refs,
            &ys,
            &TrainHyper {
                lambda: 0.01,
                epochs: 20,
                seed: 9,
            },
        )
        .unwrap();
        for (x, y) in refs.iter().zip(&ys) {
            assert!((fit.weights[0] * x[0] + fit.weights[1] * x[1] + fit.bias) * y > 0.0);
        }
        for pair in fit.objective.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-6);
        }
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let (xs, ys) = toy_set();
        let refs: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
        let h = TrainHyper {
            lambda: 0.01,
            epochs: 10,
            seed: 42,
        };
        let a = pegasos(&refs, &ys, &h).unwrap();
        let b = pegasos(&refs, &ys, &h).unwrap();
        assert_eq!(
            a.weights.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.weights.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(a.bias.to_bits(), b.bias.to_bits());
    }

    #[test]
    fn training_errors() {
        let h = TrainHyper::default();
        assert!(svm_train(&[], &[desc(vec![0.0; 2])], &h).is_err());
        assert!(svm_train(&[desc(vec![0.0; 2])], &[], &h).is_err());
        let nan = [1.0, f64::NAN];
        assert!(pegasos(&[&nan], &[1.0], &h).is_err());
    }

    /// Exhaustive grid of separators through a small 2-D instance: any
    /// separator with zero training error labels the points the same way the
    /// trained model does.
    #[test]
    fn matches_grid_search_separator_on_2d_points() {
        let pts: [([f64; 2], f64); 8] = [
            ([0.9, 0.8], 1.0),
            ([0.7, 0.95], 1.0),
            ([0.95, 0.55], 1.0),
            ([0.6, 0.7], 1.0),
            ([0.1, 0.2], -1.0),
            ([0.3, 0.05], -1.0),
            ([0.2, 0.4], -1.0),
            ([0.05, 0.1], -1.0),
        ];
        let mut found = None;
        'search: for ai in 0..72 {
            let a = ai as f64 * core::f64::consts::PI / 36.0;
            for ci in -40..=40 {
                let (w, c) = ([libm::cos(a), libm::sin(a)], ci as f64 * 0.05);
                if pts
                    .iter()
                    .all(|(p, y)| y * (w[0] * p[0] + w[1] * p[1] + c) > 0.0)
                {
                    found = Some((w, c));
                    break 'search;
                }
            }
        }
        let (gw, gc) = found.expect("grid search finds a separator");
        let xs: Vec<&[f64]> = pts.iter().map(|(p, _)| p.as_slice()).collect();
        let ys: Vec<f64> = pts.iter().map(|(_, y)| *y).collect();
        let fit = pegasos(
            &xs,
            &ys,
            &TrainHyper {
                lambda: 0.001,
                epochs: 200,
                seed: 1,
            },
        )
        .unwrap();
        for (p, _) in &pts {
            let grid = gw[0] * p[0] + gw[1] * p[1] + gc > 0.0;
            let model = fit.weights[0] * p[0] + fit.weights[1] * p[1] + fit.bias >= 0.0;
            assert_eq!(grid, model);
        }
    }

    #[test]
    fn model_bytes_roundtrip_and_corruption() {
        let m = SvmModel {
            weights: vec![0.25, -1.5, 3.0],
            bias: -0.125,
            params_fingerprint: 0xdead_beef,
            trained_on: TrainCounts {
                positives: 400,
                negatives: 400,
            },
        };
        let bytes = encode_model(&m);
        assert_eq!(&bytes[..4], b"FNAV");
        assert_eq!(decode_model(&bytes).unwrap(), m);
        assert!(matches!(
            decode_model(&bytes[..bytes.len() - 3]),
            Err(Error::CorruptModel(_))
        ));
        let mut wrong = bytes.clone();
        wrong[4] = 9;
        assert_eq!(decode_model(&wrong), Err(Error::UnsupportedVersion(9)));
        let mut magic = bytes;
        magic[0] = b'X';
        assert!(matches!(decode_model(&magic), Err(Error::CorruptModel(_))));
    }

    proptest! {
        #[test]
        fn pearson_symmetric_and_affine_invariant(
            a in proptest::collection::vec(0.0f64..1000.0, 2..40),
            alpha in 0.01f64..50.0,
            beta in -100.0f64..100.0,
        ) {
            let b: Vec<f64> = a.iter().rev().cloned().collect();
            if let (Ok(ab), Ok(ba)) = (pearson_corr(&a, &b), pearson_corr(&b, &a)) {
                prop_assert!((ab - ba).abs() < 1e-12);
            }
            let pos: Vec<f64> = a.iter().map(|v| alpha * v + beta).collect();
            let neg: Vec<f64> = a.iter().map(|v| -alpha * v + beta).collect();
            if let Ok(c) = pearson_corr(&a, &pos) {
                prop_assert!((c - 1.0).abs() < 1e-12);
                prop_assert!((pearson_corr(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn label_invariant_under_positive_scaling(
            w in proptest::collection::vec(-2.0f64..2.0, 5),
            x in proptest::collection::vec(0.0f64..1.0, 5),
            b in -1.0f64..1.0,
            k in 0.001f64..1000.0,
        ) {
            let fp = toy_params().fingerprint();
            let m1 = SvmModel { weights: w.clone(), bias: b, params_fingerprint: fp, trained_on: TrainCounts::default() };
            let m2 = SvmModel { weights: w.iter().map(|v| v * k).collect(), bias: b * k, ..m1.clone() };
            let d = desc(x);
            let (s1, l1) = svm_predict(&m1, &d).unwrap();
            let (s2, l2) = svm_predict(&m2, &d).unwrap();
            // Labels must agree except when the score is numerically zero.
            if s1.abs() > 1e-9 {
                prop_assert_eq!(l1, l2);
                prop_assert_eq!(s1 > 0.0, s2 > 0.0);
            }
        }
    }
}
