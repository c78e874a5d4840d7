//! Detector throughput on generated scenes.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use palmnav_core::detect::{detect_with, Stage, StageObserver};
use palmnav_core::rng::rng_for;
use palmnav_core::sim::texture::{paint, Placed};
use palmnav_core::sim::Species;
use palmnav_core::{DetectorConfig, ImageBuffer};
use rand::Rng;

use crate::config::BenchSettings;
use crate::error::Result;

/// Scenes of `palms` palms and `confusers` random confusers over soil.
pub fn bench_frames(settings: &BenchSettings, seed: u64) -> Result<Vec<ImageBuffer>> {
    let mut rng = rng_for(seed, "bench");
    let (w, h) = (settings.width as f64, settings.height as f64);
    (0..settings.frames)
        .map(|_| {
            let mut objects = Vec::new();
            for k in 0..settings.palms + settings.confusers {
                let species = if k < settings.palms {
                    Species::Palm
                } else {
                    Species::CONFUSERS[rng.random_range(0..4)]
                };
                let center = [rng.random_range(0.0..w), rng.random_range(0.0..h)];
                let radius = rng.random_range(100.0..125.0);
                objects.push(Placed::randomized(species, center, radius, &mut rng));
            }
            let origin = [rng.random_range(0.0..500.0), rng.random_range(0.0..500.0)];
            let ground = |px: f64, py: f64| [origin[0] + px / 240.0, origin[1] - py / 240.0];
            let ground_seed = rng.random();
            Ok(paint(
                settings.width,
                settings.height,
                &objects,
                ground,
                ground_seed,
                0.012,
                &mut rng,
            )?)
        })
        .collect()
}

#[derive(Default)]
struct StageClock {
    started: Option<Instant>,
    totals: [Duration; 3],
    windows: [usize; 3],
    localize: Duration,
}

fn index(stage: Stage) -> usize {
    Stage::ALL.iter().position(|s| *s == stage).unwrap_or(0)
}

impl StageObserver for StageClock {
    fn begin(&mut self, _stage: Stage) {
        self.started = Some(Instant::now());
    }

    fn end(&mut self, stage: Stage) {
        if let Some(t0) = self.started.take() {
            self.totals[index(stage)] += t0.elapsed();
            self.windows[index(stage)] += 1;
        }
    }

    fn begin_localize(&mut self) {
        self.started = Some(Instant::now());
    }

    fn end_localize(&mut self) {
        if let Some(t0) = self.started.take() {
            self.localize += t0.elapsed();
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub width: usize,
    pub height: usize,
    /// Seconds per frame, in frame order.
    pub frame_times: Vec<f64>,
    /// Seconds spent in each stage over all frames, in [`Stage::ALL`] order.
    pub stage_time: [f64; 3],
    pub stage_windows: [usize; 3],
    /// Seconds spent in suppression and centre refinement.
    pub localize_time: f64,
    pub detections: usize,
}

impl BenchReport {
    pub fn total_time(&self) -> f64 {
        self.frame_times.iter().sum()
    }

    pub fn mean_fps(&self) -> f64 {
        self.frame_times.len() as f64 / self.total_time()
    }

    pub fn median_fps(&self) -> f64 {
        let mut t = self.frame_times.clone();
        t.sort_by(f64::total_cmp);
        let n = t.len();
        let median = if n % 2 == 1 {
            t[n / 2]
        } else {
            0.5 * (t[n / 2 - 1] + t[n / 2])
        };
        1.0 / median
    }

    /// Share of wall time attributed to each stage.
    pub fn stage_shares(&self) -> [f64; 3] {
        let total = self.total_time();
        self.stage_time.map(|s| s / total)
    }

    pub fn localize_share(&self) -> f64 {
        self.localize_time / self.total_time()
    }

    /// Share of wall time covered by the three stages and localization.
    pub fn accounted_share(&self) -> f64 {
        self.stage_shares().iter().sum::<f64>() + self.localize_share()
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "frames: {} at {}x{}, single thread",
            self.frame_times.len(),
            self.width,
            self.height
        );
        let _ = writeln!(s, "mean fps: {:.2}", self.mean_fps());
        let _ = writeln!(s, "median fps: {:.2}", self.median_fps());
        let _ = writeln!(
            s,
            "mean frame time: {:.2} ms",
            1e3 * self.total_time() / self.frame_times.len() as f64
        );
        let shares = self.stage_shares();
        for (k, stage) in Stage::ALL.iter().enumerate() {
            let _ = writeln!(
                s,
                "stage {:<9} {:>6.2} %  {:>8.2} ms  {} windows",
                stage.name(),
                100.0 * shares[k],
                1e3 * self.stage_time[k],
                self.stage_windows[k]
            );
        }
        let _ = writeln!(
            s,
            "localize        {:>6.2} %  {:>8.2} ms",
            100.0 * self.localize_share(),
            1e3 * self.localize_time
        );
        let _ = writeln!(
            s,
            "accounted total: {:.2} %",
            100.0 * self.accounted_share()
        );
        let _ = writeln!(s, "detections: {}", self.detections);
        s
    }
}

/// Runs the detector over every frame on the calling thread.
pub fn run_bench(frames: &[ImageBuffer], det: &DetectorConfig) -> Result<BenchReport> {
    let mut clock = StageClock::default();
    let mut frame_times = Vec::with_capacity(frames.len());
    let mut detections = 0;
    for frame in frames {
        let t0 = Instant::now();
        detections += detect_with(frame, det, &mut clock)?.len();
        frame_times.push(t0.elapsed().as_secs_f64());
    }
    let (width, height) = frames.first().map_or((0, 0), |f| (f.width(), f.height()));
    Ok(BenchReport {
        width,
        height,
        frame_times,
        stage_time: clock.totals.map(|d| d.as_secs_f64()),
        stage_windows: clock.windows,
        localize_time: clock.localize.as_secs_f64(),
        detections,
    })
}
