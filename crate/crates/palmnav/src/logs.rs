//! CSV output.

use std::path::Path;

use palmnav_core::sim::{KfTraceRow, MissionLog};
use palmnav_core::Detection;
use serde::Serialize;

use crate::error::{PalmError, Result};
use crate::metrics::MissionMetrics;

/// Writes `header` then one record per row, so an empty table still has its
/// header line.
pub fn write_csv<T: Serialize>(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    let fail = |e: csv::Error| PalmError::format(path, e.to_string());
    let file = std::fs::File::create(path).map_err(|e| PalmError::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.serialize(row).map_err(fail)?;
    }
    w.flush().map_err(|e| PalmError::io(path, e))
}

pub const MISSION_HEADER: &[&str] = &[
    "t",
    "mode",
    "x",
    "y",
    "z",
    "yaw",
    "vx",
    "vy",
    "target_id",
    "ep_px",
    "ed_m",
    "cmd_x",
    "cmd_y",
];

#[derive(Serialize)]
struct MissionRow {
    t: f64,
    mode: &'static str,
    x: f64,
    y: f64,
    z: f64,
    yaw: f64,
    vx: f64,
    vy: f64,
    target_id: Option<u32>,
    ep_px: Option<f64>,
    ed_m: Option<f64>,
    cmd_x: f64,
    cmd_y: f64,
}

pub fn write_mission(path: &Path, log: &MissionLog) -> Result<()> {
    write_csv(
        path,
        MISSION_HEADER,
        log.rows.iter().map(|r| MissionRow {
            t: r.t,
            mode: r.mode.name(),
            x: r.pose.x,
            y: r.pose.y,
            z: r.pose.z,
            yaw: r.pose.yaw,
            vx: r.velocity[0],
            vy: r.velocity[1],
            target_id: r.target,
            ep_px: r.ep_px,
            ed_m: r.ed_m,
            cmd_x: r.command[0],
            cmd_y: r.command[1],
        }),
    )
}

pub const EVENT_HEADER: &[&str] = &["t", "event", "tree_id"];

#[derive(Serialize)]
struct EventRow {
    t: f64,
    event: &'static str,
    tree_id: u32,
}

pub fn write_events(path: &Path, log: &MissionLog) -> Result<()> {
    write_csv(
        path,
        EVENT_HEADER,
        log.events.iter().map(|e| EventRow {
            t: e.t,
            event: e.kind.name(),
            tree_id: e.tree_id,
        }),
    )
}

pub const TRACE_HEADER: &[&str] = &["t", "id", "z_x", "z_y", "x", "y", "vx", "vy", "trace"];

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    id: u32,
    z_x: Option<f64>,
    z_y: Option<f64>,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    trace: f64,
}

pub fn write_kf_trace(path: &Path, rows: &[KfTraceRow]) -> Result<()> {
    write_csv(
        path,
        TRACE_HEADER,
        rows.iter().map(|r| TraceRow {
            t: r.t,
            id: r.id,
            z_x: r.measured.map(|z| z[0]),
            z_y: r.measured.map(|z| z[1]),
            x: r.mean[0],
            y: r.mean[1],
            vx: r.mean[2],
            vy: r.mean[3],
            trace: r.trace,
        }),
    )
}

pub const DETECTION_HEADER: &[&str] = &["x", "y", "w", "score", "variance", "hue_corr", "sat_corr"];

/// `x, y` is the top-left corner of the kept window and `w` its side.
#[derive(Serialize)]
struct DetectionRow {
    x: usize,
    y: usize,
    w: usize,
    score: f64,
    variance: f64,
    hue_corr: f64,
    sat_corr: f64,
}

pub fn write_detections(path: &Path, dets: &[Detection]) -> Result<()> {
    write_csv(
        path,
        DETECTION_HEADER,
        dets.iter().map(|d| DetectionRow {
            x: d.window.x,
            y: d.window.y,
            w: d.window.size,
            score: d.svm_score,
            variance: d.variance,
            hue_corr: d.hue_corr,
            sat_corr: d.sat_corr,
        }),
    )
}

pub const METRICS_HEADER: &[&str] = &[
    "id",
    "x",
    "y",
    "expected",
    "targeted",
    "reached",
    "gave_up",
    "deviation_m",
    "closest_m",
];

#[derive(Serialize)]
struct TreeRow {
    id: u32,
    x: f64,
    y: f64,
    expected: bool,
    targeted: bool,
    reached: bool,
    gave_up: bool,
    deviation_m: Option<f64>,
    closest_m: f64,
}

pub fn write_metrics(path: &Path, m: &MissionMetrics) -> Result<()> {
    write_csv(
        path,
        METRICS_HEADER,
        m.trees.iter().map(|t| TreeRow {
            id: t.tree.id,
            x: t.tree.position[0],
            y: t.tree.position[1],
            expected: t.expected,
            targeted: t.targeted,
            reached: t.reached,
            gave_up: t.gave_up,
            deviation_m: t.deviation,
            closest_m: t.closest,
        }),
    )
}

/// One row per window: origin followed by the descriptor values.
pub fn write_hog_dump(path: &Path, rows: &[((usize, usize), Vec<f64>)]) -> Result<()> {
    let fail = |e: csv::Error| PalmError::format(path, e.to_string());
    let file = std::fs::File::create(path).map_err(|e| PalmError::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    for ((x, y), values) in rows {
        let mut rec = vec![x.to_string(), y.to_string()];
        rec.extend(values.iter().map(f64::to_string));
        w.write_record(&rec).map_err(fail)?;
    }
    w.flush().map_err(|e| PalmError::io(path, e))
}
