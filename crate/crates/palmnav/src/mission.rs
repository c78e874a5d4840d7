//! Mission runs from a run configuration and their output files.

use std::fmt::Write as _;
use std::path::Path;

use palmnav_core::rng::derive_seed;
use palmnav_core::sim::{
    run_mission, MissionLog, MissionOutcome, SenseMode, SensorScript, WorldSpec,
};
use palmnav_core::DetectorConfig;

use crate::config::RunConfig;
use crate::error::Result;
use crate::logs::{write_events, write_kf_trace, write_metrics, write_mission};
use crate::metrics::{mission_metrics, MissionMetrics};
use crate::svg::{trajectory_svg, write_text};

/// The configured sensor script with its seed derived from the run seed.
pub fn sensor_script(cfg: &RunConfig) -> SensorScript {
    SensorScript {
        seed: derive_seed(cfg.seed, "sensor"),
        ..cfg.sensor.clone()
    }
}

/// Runs one mission; `detector` selects rendered sensing.
pub fn simulate(
    world: &WorldSpec,
    cfg: &RunConfig,
    detector: Option<&DetectorConfig>,
) -> Result<(MissionLog, MissionMetrics)> {
    let mode = detector.map_or(SenseMode::Oracle, SenseMode::Rendered);
    let log = run_mission(world, &cfg.sim, &sensor_script(cfg), mode)?;
    let metrics = mission_metrics(&log, world, &cfg.sim.nav);
    Ok((log, metrics))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.4}"))
}

pub fn metrics_text(log: &MissionLog, m: &MissionMetrics) -> String {
    let mut s = String::new();
    let outcome = match &log.outcome {
        MissionOutcome::Completed => "completed".to_string(),
        MissionOutcome::Timeout => "timeout".to_string(),
        MissionOutcome::Halted(e) => format!("halted: {e}"),
    };
    let _ = writeln!(s, "outcome: {outcome}");
    let _ = writeln!(s, "duration: {:.2} s", m.duration);
    let _ = writeln!(s, "frames: {}", log.frames);
    let sm = &m.summary;
    let _ = writeln!(
        s,
        "in-column trees: {}  reached: {}  missed: {}",
        sm.expected, sm.reached, sm.missed
    );
    let _ = writeln!(s, "out-of-column trees targeted: {}", sm.false_targets);
    let _ = writeln!(s, "targets not matching a tree: {}", sm.spurious_targets);
    let _ = writeln!(s, "gate rejections: {}", log.gate_rejections);
    let _ = writeln!(
        s,
        "mean deviation: {} m  (95% CI ± {} m)",
        opt(sm.mean_deviation),
        opt(sm.ci95)
    );
    let _ = writeln!(s, "max deviation: {} m", opt(sm.max_deviation));
    for t in &m.trees {
        let _ = writeln!(
            s,
            "tree {:>3} ({:>6.2}, {:>6.2}) {:<10} targeted={} reached={} deviation={}",
            t.tree.id,
            t.tree.position[0],
            t.tree.position[1],
            if t.expected {
                "in-column"
            } else {
                "off-column"
            },
            t.targeted,
            t.reached,
            opt(t.deviation)
        );
    }
    s
}

/// Writes the mission, event, metric and trajectory files into `out`.
pub fn write_outputs(
    out: &Path,
    world: &WorldSpec,
    log: &MissionLog,
    m: &MissionMetrics,
    kf_trace: bool,
) -> Result<()> {
    write_mission(&out.join("mission.csv"), log)?;
    write_events(&out.join("events.csv"), log)?;
    write_metrics(&out.join("metrics.csv"), m)?;
    write_text(&out.join("metrics.txt"), &metrics_text(log, m))?;
    write_text(&out.join("trajectory.svg"), &trajectory_svg(world, log))?;
    if kf_trace {
        write_kf_trace(&out.join("kf_trace.csv"), &log.kf_trace)?;
    }
    Ok(())
}
