//! The `palmnav` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use palmnav_core::classify::{SvmModel, TrainCounts};
use palmnav_core::detect::{detect, Stage};
use palmnav_core::hog::hog_descriptor;
use palmnav_core::imgproc::{downsample, rgb_to_hsv};
use palmnav_core::rng::derive_seed;
use palmnav_core::sim::WorldSpec;
use palmnav_core::DetectorConfig;

use crate::bench::{bench_frames, run_bench};
use crate::config::{parse_variance_source, RunConfig, SenseKind};
use crate::error::{PalmError, Result};
use crate::imageio::load_rgb;
use crate::logs::{write_csv, write_detections, write_hog_dump};
use crate::meta::write_run_meta;
use crate::mission::{metrics_text, simulate, write_outputs};
use crate::model::{load_model, save_model};
use crate::pipeline::FeatureSpec;
use crate::svg::{detection_svg, write_text};
use crate::train::{check_balance, evaluate, featurize, train, Evaluation, TrainReport};
use crate::world::load_world;

pub const DEFAULT_OUT: &str = "palmnav-out";

#[derive(Debug, Parser)]
#[command(
    name = "palmnav",
    version,
    about = "Palm crown detection and tree-to-tree navigation"
)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Top-level seed; every random stream is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a labelled corpus of palm and confuser windows.
    GenData(GenDataArgs),
    /// Train the SVM on a corpus and report held-out metrics.
    Train(TrainArgs),
    /// Evaluate the full cascade on a corpus.
    EvalDetector(EvalArgs),
    /// Detect palm crowns in an image.
    Detect(DetectArgs),
    /// Fly a mission over a world file.
    Simulate(SimulateArgs),
    /// Measure detector throughput on generated frames.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Windows per class.
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Corpus directory written by gen-data.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Held-out fraction of each class.
    #[arg(long)]
    pub holdout: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// SVM regularization strength.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file written by train.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Minimum descriptor variance of the texture gate.
    #[arg(long)]
    pub variance_threshold: Option<f64>,
    /// `normalized` or `raw`.
    #[arg(long)]
    pub variance_source: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Corpus directory written by gen-data.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// PNG or PPM image.
    pub image: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Overlap above which the weaker of two windows is suppressed.
    #[arg(long)]
    pub nms_overlap: Option<f64>,
    /// Also write an SVG overlay.
    #[arg(long)]
    pub svg: bool,
    /// Also write the top-layer descriptor of every accepted window.
    #[arg(long)]
    pub dump_hog: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// World file (TOML).
    #[arg(long)]
    pub world: Option<PathBuf>,
    /// `oracle` or `rendered`.
    #[arg(long)]
    pub sense: Option<String>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Pixel noise of oracle detections.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Detection dropout `START,END` in seconds; repeatable.
    #[arg(long, value_parser = parse_interval)]
    pub dropout: Vec<(f64, f64)>,
    /// Probability per frame of one spurious oracle detection.
    #[arg(long)]
    pub false_positive_rate: Option<f64>,
    /// Disable the recovery branch.
    #[arg(long)]
    pub no_recovery: bool,
    /// Mission time limit in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Also write the target's Kalman filter trace.
    #[arg(long)]
    pub kf_trace: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Number of frames timed.
    #[arg(long)]
    pub frames: Option<usize>,
    /// Frame size `WIDTHxHEIGHT`.
    #[arg(long, value_parser = parse_size)]
    pub size: Option<(usize, usize)>,
    /// Model file; a placeholder classifier is timed without one.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

fn parse_interval(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected START,END")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or("expected WIDTHxHEIGHT")?;
    Ok((
        w.parse().map_err(|e| format!("{e}"))?,
        h.parse().map_err(|e| format!("{e}"))?,
    ))
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn say(&self, text: &str) {
        if !self.quiet {
            print!("{text}");
        }
    }

    fn finish(&self, command: &str) -> Result<()> {
        write_run_meta(&self.out, command, &self.cfg)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.paths.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let name = match &cli.command {
        Command::GenData(a) => {
            if let Some(n) = a.count {
                cfg.corpus.positives = n;
                cfg.corpus.negatives = n;
            }
            "gen-data"
        }
        Command::Train(a) => {
            set(&mut cfg.train.holdout, a.holdout);
            set(&mut cfg.train.epochs, a.epochs);
            set(&mut cfg.train.lambda, a.lambda);
            set_path(&mut cfg.paths.corpus, &a.corpus);
            "train"
        }
        Command::EvalDetector(a) => {
            set_path(&mut cfg.paths.corpus, &a.corpus);
            apply_model_args(&mut cfg, &a.model)?;
            "eval-detector"
        }
        Command::Detect(a) => {
            apply_model_args(&mut cfg, &a.model)?;
            set(&mut cfg.detector.nms_overlap, a.nms_overlap);
            "detect"
        }
        Command::Simulate(a) => {
            set_path(&mut cfg.paths.world, &a.world);
            apply_model_args(&mut cfg, &a.model)?;
            if let Some(s) = &a.sense {
                cfg.sense = SenseKind::parse(s)
                    .ok_or_else(|| PalmError::Invalid(format!("unknown sense mode `{s}`")))?;
            }
            set(&mut cfg.sensor.pixel_noise_sigma, a.sigma);
            set(&mut cfg.sensor.false_positive_rate, a.false_positive_rate);
            set(&mut cfg.sim.timeout, a.timeout);
            if !a.dropout.is_empty() {
                cfg.sensor.dropout_windows = a.dropout.clone();
            }
            if a.no_recovery {
                cfg.sim.nav.recovery_enabled = false;
            }
            "simulate"
        }
        Command::Bench(a) => {
            set(&mut cfg.bench.frames, a.frames);
            if let Some((w, h)) = a.size {
                cfg.bench.width = w;
                cfg.bench.height = h;
            }
            set_path(&mut cfg.paths.model, &a.model);
            "bench"
        }
    };
    cfg.validate()?;
    std::fs::create_dir_all(&out).map_err(|e| PalmError::io(&out, e))?;
    let ctx = Ctx {
        cfg,
        out,
        quiet: cli.quiet,
    };
    match &cli.command {
        Command::GenData(_) => cmd_gen_data(&ctx)?,
        Command::Train(_) => cmd_train(&ctx)?,
        Command::EvalDetector(_) => cmd_eval(&ctx)?,
        Command::Detect(a) => cmd_detect(&ctx, a)?,
        Command::Simulate(a) => cmd_simulate(&ctx, a)?,
        Command::Bench(_) => cmd_bench(&ctx)?,
    }
    ctx.finish(name)
}

fn set<T: Copy>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_path(slot: &mut Option<PathBuf>, v: &Option<PathBuf>) {
    if v.is_some() {
        slot.clone_from(v);
    }
}

fn apply_model_args(cfg: &mut RunConfig, a: &ModelArgs) -> Result<()> {
    set_path(&mut cfg.paths.model, &a.model);
    set(&mut cfg.detector.variance_threshold, a.variance_threshold);
    if let Some(s) = &a.variance_source {
        cfg.detector.variance_source = parse_variance_source(s)
            .ok_or_else(|| PalmError::Invalid(format!("unknown variance source `{s}`")))?;
    }
    Ok(())
}

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| {
        PalmError::Invalid(format!("no {what} given (flag or [paths] in the config)"))
    })
}

fn detector(cfg: &RunConfig) -> Result<DetectorConfig> {
    let model = load_model(required(&cfg.paths.model, "model")?)?;
    FeatureSpec::from_config(cfg)?.detector(cfg, model)
}

fn cmd_gen_data(ctx: &Ctx) -> Result<()> {
    let c = &ctx.cfg.corpus;
    let rows = crate::corpus::generate(&ctx.out, c.positives, c.negatives, ctx.cfg.seed)?;
    let mut s = format!("wrote {} windows to {}\n", rows.len(), ctx.out.display());
    for sp in palmnav_core::sim::Species::ALL {
        let n = rows.iter().filter(|r| r.species == sp.name()).count();
        let _ = writeln!(s, "  {:<12} {n}", sp.name());
    }
    ctx.say(&s);
    Ok(())
}

fn evaluation_text(ev: &Evaluation) -> String {
    let c = &ev.confusion;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "windows: {}  tp {}  fp {}  tn {}  fn {}",
        c.total(),
        c.tp,
        c.fp,
        c.tn,
        c.fn_
    );
    let _ = writeln!(s, "accuracy: {:.4}", c.accuracy());
    let _ = writeln!(s, "precision: {:.4}", c.precision());
    let _ = writeln!(s, "recall: {:.4}", c.recall());
    for (k, stage) in Stage::ALL.iter().enumerate() {
        let _ = writeln!(
            s,
            "rejected at {:<9} positives {:>5}  negatives {:>5}",
            stage.name(),
            ev.positives_rejected[k],
            ev.negatives_rejected[k]
        );
    }
    for (sp, n, acc) in &ev.per_species {
        let _ = writeln!(s, "negatives {:<12} {acc:>5} of {n:>5} accepted", sp.name());
    }
    s
}

fn train_text(r: &TrainReport, seed: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "seed: {seed}");
    let _ = writeln!(
        s,
        "training windows: {} positive, {} negative ({} pass both gates)",
        r.train_positives, r.train_negatives, r.cascade_negatives
    );
    match r.calibrated_threshold {
        Some(t) => {
            let _ = writeln!(s, "calibrated variance threshold: {t:.6}");
        }
        None => {
            let _ = writeln!(
                s,
                "no smooth-star negatives; configured variance threshold {:.6} kept",
                r.variance_threshold
            );
        }
    }
    let _ = writeln!(
        s,
        "final objective: {:.6}",
        r.objective.last().copied().unwrap_or(f64::NAN)
    );
    s.push_str("held-out evaluation:\n");
    s.push_str(&evaluation_text(&r.heldout));
    s
}

fn cmd_train(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let dir = required(&cfg.paths.corpus, "corpus")?;
    let samples = crate::corpus::load(dir)?;
    check_balance(&samples)?;
    let t0 = Instant::now();
    let featured = featurize(&samples, &FeatureSpec::from_config(cfg)?)?;
    let (model, report) = train(&featured, cfg, derive_seed(cfg.seed, "train"))?;
    let elapsed = t0.elapsed().as_secs_f64();
    save_model(&model, &ctx.out.join("model.fnav"))?;
    let text = train_text(&report, cfg.seed);
    write_text(&ctx.out.join("train_report.txt"), &text)?;
    write_csv(
        &ctx.out.join("objective.csv"),
        &["epoch", "objective"],
        report
            .objective
            .iter()
            .enumerate()
            .map(|(epoch, objective)| ObjectiveRow {
                epoch: epoch + 1,
                objective: *objective,
            }),
    )?;
    let calibration = format!(
        "# variance threshold calibrated on the training split, seed {}\n[detector]\nvariance_threshold = {}\n",
        cfg.seed, report.variance_threshold
    );
    write_text(&ctx.out.join("calibration.toml"), &calibration)?;
    ctx.say(&text);
    ctx.say(&format!(
        "feature extraction and training: {elapsed:.1} s\n"
    ));
    Ok(())
}

#[derive(serde::Serialize)]
struct ObjectiveRow {
    epoch: usize,
    objective: f64,
}

fn cmd_eval(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let det = detector(cfg)?;
    let samples = crate::corpus::load(required(&cfg.paths.corpus, "corpus")?)?;
    let spec = FeatureSpec::from_config(cfg)?;
    let featured = featurize(&samples, &spec)?;
    let refs: Vec<_> = featured.iter().collect();
    let ev = evaluate(&refs, det.variance_threshold, &det.model)?;
    let text = evaluation_text(&ev);
    write_text(&ctx.out.join("eval_report.txt"), &text)?;
    ctx.say(&text);
    Ok(())
}

fn cmd_detect(ctx: &Ctx, a: &DetectArgs) -> Result<()> {
    let det = detector(&ctx.cfg)?;
    let frame = load_rgb(&a.image)?;
    let dets = detect(&frame, &det)?;
    write_detections(&ctx.out.join("detections.csv"), &dets)?;
    if a.svg {
        write_text(
            &ctx.out.join("detections.svg"),
            &detection_svg(&frame, &dets)?,
        )?;
    }
    if a.dump_hog {
        let value = rgb_to_hsv(&frame)?.value_image();
        let mut rows = Vec::new();
        for d in &dets {
            let w = d.window;
            let small = downsample(&value.crop(w.x, w.y, w.size, w.size)?, det.top_window)?;
            rows.push(((w.x, w.y), hog_descriptor(&small, &det.top_params)?.values));
        }
        write_hog_dump(&ctx.out.join("hog.csv"), &rows)?;
    }
    ctx.say(&format!("{} detections\n", dets.len()));
    Ok(())
}

fn cmd_simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let world: WorldSpec = load_world(required(&cfg.paths.world, "world file")?)?;
    let det = match cfg.sense {
        SenseKind::Oracle => None,
        SenseKind::Rendered => Some(detector(cfg)?),
    };
    let (log, metrics) = simulate(&world, cfg, det.as_ref())?;
    write_outputs(&ctx.out, &world, &log, &metrics, a.kf_trace)?;
    ctx.say(&metrics_text(&log, &metrics));
    Ok(())
}

/// Stand-in classifier for benchmarking without a trained model; the SVM
/// stage costs the same for any weights.
fn placeholder_model() -> SvmModel {
    let params = palmnav_core::HogParams::top_layer();
    SvmModel {
        weights: vec![0.0; params.descriptor_len()],
        bias: 0.0,
        params_fingerprint: params.fingerprint(),
        trained_on: TrainCounts::default(),
    }
}

fn cmd_bench(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let model = match &cfg.paths.model {
        Some(p) => load_model(p)?,
        None => placeholder_model(),
    };
    let det = FeatureSpec::from_config(cfg)?.detector(cfg, model)?;
    let frames = bench_frames(&cfg.bench, cfg.seed)?;
    let report = run_bench(&frames, &det)?;
    let mut text = report.text();
    if cfg.paths.model.is_none() {
        text.push_str("model: placeholder (no model given)\n");
    }
    write_text(&ctx.out.join("bench.txt"), &text)?;
    ctx.say(&text);
    Ok(())
}
