//! Training and evaluation of the detector cascade on window corpora.

use palmnav_core::classify::{svm_train, TrainHyper};
use palmnav_core::detect::{calibrate_variance_threshold, Stage};
use palmnav_core::sim::Species;
use palmnav_core::SvmModel;

use crate::config::RunConfig;
use crate::corpus::Sample;
use crate::error::{PalmError, Result};
use crate::pipeline::{cascade_verdict, window_features, FeatureSpec, WindowFeatures};

/// Largest tolerated ratio between class sizes.
pub const MAX_IMBALANCE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// A labelled window with all stage scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Featured {
    pub positive: bool,
    pub species: Option<Species>,
    pub features: WindowFeatures,
}

pub fn featurize(samples: &[Sample], spec: &FeatureSpec) -> Result<Vec<Featured>> {
    samples
        .iter()
        .map(|s| {
            Ok(Featured {
                positive: s.positive,
                species: s.species,
                features: window_features(&s.image, spec)?,
            })
        })
        .collect()
}

/// Splits each class in order: the leading `1 − holdout` share trains, the
/// rest is held out. Returns index lists.
pub fn split(labels: &[bool], holdout: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in [true, false] {
        let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let n_train = ((idx.len() as f64) * (1.0 - holdout)).round() as usize;
        if n_train == 0 || n_train == idx.len() {
            return Err(PalmError::Invalid(format!(
                "{} {} samples cannot be split for training and held-out evaluation",
                idx.len(),
                if class { "positive" } else { "negative" }
            )));
        }
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Evaluation {
    pub confusion: Confusion,
    /// Rejections of positive windows per stage, in [`Stage::ALL`] order.
    pub positives_rejected: [usize; 3],
    pub negatives_rejected: [usize; 3],
    /// `(species, windows, accepted)` for negatives with known species.
    pub per_species: Vec<(Species, usize, usize)>,
}

pub fn evaluate(
    data: &[&Featured],
    variance_threshold: f64,
    model: &SvmModel,
) -> Result<Evaluation> {
    let mut ev = Evaluation::default();
    for d in data {
        let verdict = cascade_verdict(&d.features, variance_threshold, model)?;
        ev.confusion.add(verdict.is_none(), d.positive);
        if let Some(stage) = verdict {
            let k = Stage::ALL.iter().position(|s| *s == stage).unwrap_or(0);
            if d.positive {
                ev.positives_rejected[k] += 1;
            } else {
                ev.negatives_rejected[k] += 1;
            }
        }
        if let (false, Some(sp)) = (d.positive, d.species) {
            match ev.per_species.iter_mut().find(|e| e.0 == sp) {
                Some(e) => {
                    e.1 += 1;
                    e.2 += usize::from(verdict.is_none());
                }
                None => ev.per_species.push((sp, 1, usize::from(verdict.is_none()))),
            }
        }
    }
    ev.per_species
        .sort_by_key(|e| Species::ALL.iter().position(|s| *s == e.0));
    Ok(ev)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub train_positives: usize,
    pub train_negatives: usize,
    /// Training negatives that pass the colour and variance gates.
    pub cascade_negatives: usize,
    /// Threshold calibrated on the training split, when it holds smooth-star
    /// negatives.
    pub calibrated_threshold: Option<f64>,
    /// Threshold used for cascade negatives and held-out evaluation.
    pub variance_threshold: f64,
    pub objective: Vec<f64>,
    pub heldout: Evaluation,
}

pub fn check_balance(samples: &[Sample]) -> Result<()> {
    let pos = samples.iter().filter(|s| s.positive).count();
    let neg = samples.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(PalmError::Invalid(
            "corpus needs both positive and negative windows".into(),
        ));
    }
    if pos.max(neg) as f64 > MAX_IMBALANCE * pos.min(neg) as f64 {
        return Err(PalmError::Invalid(format!(
            "corpus is imbalanced: {pos} positive, {neg} negative windows"
        )));
    }
    Ok(())
}

/// Trains on the leading share of each class and evaluates on the rest.
///
/// The variance threshold is recalibrated on the training split. The SVM
/// sees every positive and the negatives that survive the two gates (all
/// negatives when none survive).
pub fn train(featured: &[Featured], cfg: &RunConfig, seed: u64) -> Result<(SvmModel, TrainReport)> {
    let labels: Vec<bool> = featured.iter().map(|f| f.positive).collect();
    let (train_idx, test_idx) = split(&labels, cfg.train.holdout)?;
    let training: Vec<&Featured> = train_idx.iter().map(|&i| &featured[i]).collect();
    let pos_var: Vec<f64> = training
        .iter()
        .filter(|f| f.positive)
        .map(|f| f.features.variance)
        .collect();
    let smooth_var: Vec<f64> = training
        .iter()
        .filter(|f| f.species == Some(Species::SmoothStar))
        .map(|f| f.features.variance)
        .collect();
    let calibrated = if smooth_var.is_empty() {
        None
    } else {
        Some(calibrate_variance_threshold(&pos_var, &smooth_var)?)
    };
    let threshold = calibrated.unwrap_or(cfg.detector.variance_threshold);

    let pos: Vec<_> = training
        .iter()
        .filter(|f| f.positive)
        .map(|f| f.features.top.clone())
        .collect();
    let all_neg: Vec<&&Featured> = training.iter().filter(|f| !f.positive).collect();
    let mut neg: Vec<_> = all_neg
        .iter()
        .filter(|f| f.features.gate.pass && f.features.variance >= threshold)
        .map(|f| f.features.top.clone())
        .collect();
    let cascade_negatives = neg.len();
    if neg.is_empty() {
        neg = all_neg.iter().map(|f| f.features.top.clone()).collect();
    }
    let hyper = TrainHyper {
        lambda: cfg.train.lambda,
        epochs: cfg.train.epochs,
        seed,
    };
    let (model, fit) = svm_train(&pos, &neg, &hyper)?;
    let test: Vec<&Featured> = test_idx.iter().map(|&i| &featured[i]).collect();
    let heldout = evaluate(&test, threshold, &model)?;
    let report = TrainReport {
        train_positives: pos.len(),
        train_negatives: all_neg.len(),
        cascade_negatives,
        calibrated_threshold: calibrated,
        variance_threshold: threshold,
        objective: fit.objective,
        heldout,
    };
    Ok((model, report))
}
