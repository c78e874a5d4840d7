//! Run configuration (TOML). Every key is optional; absent keys keep the
//! library defaults and command-line flags override both.
//!
//! ```toml
//! seed = 7
//! [camera]   # focal, width, height, principal
//! [sim]      # dt, camera_period, timeout, altitude, time_constant, render_noise, sense
//! [nav]      # tau_p, delta_d, gate_factor, crown_size, k_p, ... recovery_enabled
//! [track]    # sigma_p, sigma_v, r_xx, r_yy, sigma_a, max_coast
//! [sensor]   # pixel_noise_sigma, dropouts, false_positive_rate, edge_margin
//! [detector] # variance_threshold, variance_source, nms_overlap, hue_bins, sat_bins,
//!            # hue_threshold, sat_threshold, refine_radius, foliage_hue, foliage_min_sat
//! [paths]    # model, world, corpus, template, out (relative to the config file)
//! [corpus]   # positives, negatives
//! [train]    # lambda, epochs, holdout
//! [bench]    # width, height, frames, palms, confusers
//! ```

use std::path::{Path, PathBuf};

use palmnav_core::classify::{DEFAULT_HUE_THRESHOLD, DEFAULT_SAT_THRESHOLD};
use palmnav_core::detect::{
    DEFAULT_FOLIAGE_HUE, DEFAULT_FOLIAGE_MIN_SAT, DEFAULT_HUE_BINS, DEFAULT_NMS_OVERLAP,
    DEFAULT_SAT_BINS, DEFAULT_VARIANCE_THRESHOLD,
};
use palmnav_core::hog::VarianceSource;
use palmnav_core::nav::{CameraModel, NavConfig};
use palmnav_core::sim::{SensorScript, SimConfig};
use palmnav_core::track::TrackConfig;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{PalmError, Result};
use crate::world::schema_error;

/// Declares a file section whose fields are all optional and a method that
/// writes the present ones onto a target value.
macro_rules! section {
    ($name:ident => $target:ty { $($field:ident : $ty:ty),* $(,)? } $(extra { $($xf:ident : $xt:ty),* $(,)? })?) => {
        #[derive(Debug, Default, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(pub $field: Option<$ty>,)*
            $($(pub $xf: Option<$xt>,)*)?
        }

        impl $name {
            pub fn apply(&self, target: &mut $target) {
                $(if let Some(v) = &self.$field {
                    target.$field = v.clone();
                })*
            }
        }
    };
}

section!(NavSection => NavConfig {
    tau_p: f64, delta_d: f64, gate_factor: f64, crown_size: f64, k_p: f64, max_speed: f64,
    cruise_speed: f64, k_cross: f64, k_wp: f64, waypoint_tol: f64, merge_factor: f64,
    behind_margin: f64, giveup_radius: f64, giveup_time: f64, recover_timeout: f64,
    recovery_enabled: bool,
});

section!(SimSection => SimConfig {
    dt: f64, camera_period: f64, timeout: f64, altitude: f64, time_constant: f64, render_noise: f64,
} extra { sense: String });

section!(SensorSection => SensorScript {
    pixel_noise_sigma: f64, false_positive_rate: f64, edge_margin: f64,
} extra { dropouts: Vec<[f64; 2]> });

section!(CameraSection => CameraModel { focal: f64, width: usize, height: usize, principal: [f64; 2] });

section!(TrackSection => TrackConfig { sigma_p: f64, sigma_v: f64, sigma_a: f64, max_coast: f64 } extra { r_xx: f64, r_yy: f64 });

section!(DetectorSection => DetectorSettings {
    variance_threshold: f64, nms_overlap: f64, hue_bins: usize, sat_bins: usize,
    hue_threshold: f64, sat_threshold: f64, refine_radius: f64, foliage_hue: [f64; 2], foliage_min_sat: f64,
} extra { variance_source: String });

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathsSection {
    model: Option<PathBuf>,
    world: Option<PathBuf>,
    corpus: Option<PathBuf>,
    template: Option<PathBuf>,
    out: Option<PathBuf>,
}

section!(CorpusSection => CorpusSettings { positives: usize, negatives: usize });
section!(TrainSection => TrainSettings { lambda: f64, epochs: usize, holdout: f64 });
section!(BenchSection => BenchSettings { width: usize, height: usize, frames: usize, palms: usize, confusers: usize });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SenseKind {
    #[default]
    Oracle,
    Rendered,
}

impl SenseKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "oracle" => Some(SenseKind::Oracle),
            "rendered" => Some(SenseKind::Rendered),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSettings {
    pub variance_threshold: f64,
    pub variance_source: VarianceSource,
    pub nms_overlap: f64,
    pub hue_bins: usize,
    pub sat_bins: usize,
    pub hue_threshold: f64,
    pub sat_threshold: f64,
    pub refine_radius: f64,
    pub foliage_hue: [f64; 2],
    pub foliage_min_sat: f64,
}

impl Default for DetectorSettings {
    fn default() -> Self {
        Self {
            variance_threshold: DEFAULT_VARIANCE_THRESHOLD,
            variance_source: VarianceSource::Normalized,
            nms_overlap: DEFAULT_NMS_OVERLAP,
            hue_bins: DEFAULT_HUE_BINS,
            sat_bins: DEFAULT_SAT_BINS,
            hue_threshold: DEFAULT_HUE_THRESHOLD,
            sat_threshold: DEFAULT_SAT_THRESHOLD,
            refine_radius: 120.0,
            foliage_hue: DEFAULT_FOLIAGE_HUE,
            foliage_min_sat: DEFAULT_FOLIAGE_MIN_SAT,
        }
    }
}

/// Input and output locations. Inputs must exist when the file is loaded.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Paths {
    pub model: Option<PathBuf>,
    pub world: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    /// Image whose hue-saturation histogram is the gate template; the
    /// built-in synthetic template when absent.
    pub template: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusSettings {
    pub positives: usize,
    pub negatives: usize,
}

impl Default for CorpusSettings {
    fn default() -> Self {
        Self {
            positives: 1000,
            negatives: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub lambda: f64,
    pub epochs: usize,
    /// Fraction of each class held out for evaluation.
    pub holdout: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            epochs: 40,
            holdout: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchSettings {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub palms: usize,
    pub confusers: usize,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            frames: 30,
            palms: 2,
            confusers: 2,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    #[serde(default)]
    camera: CameraSection,
    #[serde(default)]
    sim: SimSection,
    #[serde(default)]
    nav: NavSection,
    #[serde(default)]
    track: TrackSection,
    #[serde(default)]
    sensor: SensorSection,
    #[serde(default)]
    detector: DetectorSection,
    #[serde(default)]
    corpus: CorpusSection,
    #[serde(default)]
    train: TrainSection,
    #[serde(default)]
    bench: BenchSection,
    #[serde(default)]
    paths: PathsSection,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub sim: SimConfig,
    pub sense: SenseKind,
    /// `seed` is overwritten from [`RunConfig::seed`] when a mission starts.
    pub sensor: SensorScript,
    pub detector: DetectorSettings,
    pub corpus: CorpusSettings,
    pub train: TrainSettings,
    pub bench: BenchSettings,
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sim: SimConfig::default(),
            sense: SenseKind::Oracle,
            sensor: SensorScript::default(),
            detector: DetectorSettings::default(),
            corpus: CorpusSettings::default(),
            train: TrainSettings::default(),
            bench: BenchSettings::default(),
            paths: Paths::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| schema_error(path, text, e.span(), e.message()))?;
        let mut cfg = RunConfig::default();
        if let Some(seed) = file.seed {
            cfg.seed = seed;
        }
        let mut cam = cfg.sim.cam;
        let principal_given = file.camera.principal.is_some();
        file.camera.apply(&mut cam);
        if !principal_given {
            cam.principal = [cam.width as f64 / 2.0, cam.height as f64 / 2.0];
        }
        cfg.sim.cam = cam;
        file.sim.apply(&mut cfg.sim);
        if let Some(s) = &file.sim.sense {
            cfg.sense = SenseKind::parse(s).ok_or_else(|| {
                schema_error(
                    path,
                    text,
                    None,
                    format!("sim.sense must be oracle or rendered, got `{s}`"),
                )
            })?;
        }
        file.nav.apply(&mut cfg.sim.nav);
        file.track.apply(&mut cfg.sim.track);
        if let Some(v) = file.track.r_xx {
            cfg.sim.track.r[0][0] = v;
        }
        if let Some(v) = file.track.r_yy {
            cfg.sim.track.r[1][1] = v;
        }
        file.sensor.apply(&mut cfg.sensor);
        if let Some(d) = &file.sensor.dropouts {
            cfg.sensor.dropout_windows = d.iter().map(|w| (w[0], w[1])).collect();
        }
        file.detector.apply(&mut cfg.detector);
        if let Some(s) = &file.detector.variance_source {
            cfg.detector.variance_source = parse_variance_source(s).ok_or_else(|| {
                schema_error(
                    path,
                    text,
                    None,
                    format!("detector.variance_source must be normalized or raw, got `{s}`"),
                )
            })?;
        }
        let base = path.parent().unwrap_or(Path::new(""));
        let rel = |p: &Option<PathBuf>| p.as_ref().map(|p| base.join(p));
        cfg.paths = Paths {
            model: rel(&file.paths.model),
            world: rel(&file.paths.world),
            corpus: rel(&file.paths.corpus),
            template: rel(&file.paths.template),
            out: rel(&file.paths.out),
        };
        for input in [
            &cfg.paths.model,
            &cfg.paths.world,
            &cfg.paths.corpus,
            &cfg.paths.template,
        ]
        .into_iter()
        .flatten()
        {
            if !input.exists() {
                let err = std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    "referenced by the config file",
                );
                return Err(PalmError::io(input, err));
            }
        }
        file.corpus.apply(&mut cfg.corpus);
        file.train.apply(&mut cfg.train);
        file.bench.apply(&mut cfg.bench);
        cfg.validate()
            .map_err(|e| schema_error(path, text, None, e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PalmError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.sensor.validate()?;
        let d = &self.detector;
        if !(d.variance_threshold > 0.0)
            || !(0.0..=1.0).contains(&d.nms_overlap)
            || d.hue_bins == 0
            || d.sat_bins == 0
        {
            return Err(PalmError::Invalid("detector settings out of range".into()));
        }
        if !(0.0 < self.train.holdout && self.train.holdout < 1.0)
            || self.train.epochs == 0
            || !(self.train.lambda > 0.0)
        {
            return Err(PalmError::Invalid(
                "train.holdout must lie in (0, 1); epochs and lambda must be positive".into(),
            ));
        }
        let b = &self.bench;
        if b.width < 300 || b.height < 300 || b.frames == 0 {
            return Err(PalmError::Invalid(
                "bench frames must be at least 300×300 and non-empty".into(),
            ));
        }
        Ok(())
    }

    /// SHA-256 over the resolved settings.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(format!("{self:?}").as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn parse_variance_source(s: &str) -> Option<VarianceSource> {
    match s {
        "normalized" => Some(VarianceSource::Normalized),
        "raw" => Some(VarianceSource::RawCells),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(
            RunConfig::parse("", Path::new("c.toml")).unwrap(),
            RunConfig::default()
        );
    }

    #[test]
    fn sections_override_defaults() {
        let text = "seed = 9\n[nav]\ntau_p = 10.0\nrecovery_enabled = false\n[sensor]\npixel_noise_sigma = 2.0\ndropouts = [[3.0, 5.0]]\n[camera]\nwidth = 800\nheight = 600\n[detector]\nvariance_source = \"raw\"\n[paths]\nout = \"runs\"\n";
        let cfg = RunConfig::parse(text, Path::new("dir/c.toml")).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.sim.nav.tau_p, 10.0);
        assert!(!cfg.sim.nav.recovery_enabled);
        assert_eq!(cfg.sim.nav.delta_d, NavConfig::default().delta_d);
        assert_eq!(cfg.sensor.dropout_windows, vec![(3.0, 5.0)]);
        assert_eq!(cfg.sim.cam.principal, [400.0, 300.0]);
        assert_eq!(cfg.detector.variance_source, VarianceSource::RawCells);
        assert_eq!(cfg.paths.out.as_deref(), Some(Path::new("dir/runs")));
    }

    #[test]
    fn missing_input_is_an_io_error() {
        let err = RunConfig::parse(
            "[paths]\nmodel = \"absent.fnav\"\n",
            Path::new("/nonexistent/c.toml"),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_key_is_a_schema_error_with_line() {
        match RunConfig::parse("[nav]\ntau_p = 1.0\ntua_d = 2.0\n", Path::new("c.toml")) {
            Err(PalmError::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::parse("[nav]\ntau_p = -1.0\n", Path::new("c.toml")).is_err());
        assert!(RunConfig::parse("[train]\nholdout = 1.0\n", Path::new("c.toml")).is_err());
        assert!(RunConfig::parse("[sim]\nsense = \"lidar\"\n", Path::new("c.toml")).is_err());
    }

    #[test]
    fn hash_tracks_settings() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.sim.nav.tau_p += 1.0;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
