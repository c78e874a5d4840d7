//! Fixed-step mission loop: sense, navigate, integrate.

use alloc::vec::Vec;

use rand::SeedableRng;

use super::dynamics::{step_dynamics, MavDynamics};
use super::sensor::{synth_detections, SensorScript};
use super::world::{render_scene, WorldSpec};
use crate::detect::{detect, DetectorConfig};
use crate::error::{Error, Result};
use crate::math;
use crate::nav::{
    nav_step, CameraModel, MissionState, Mode, NavConfig, NavEvent, Pose, ReachedTree,
};
use crate::rng::{derive_seed, SimRng};
use crate::track::TrackConfig;

#[derive(Debug, Clone, Copy)]
pub enum SenseMode<'a> {
    /// Projected ground truth from [`synth_detections`].
    Oracle,
    /// Rendered frames run through the detector.
    Rendered(&'a DetectorConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    /// Seconds between camera frames; a multiple of `dt`.
    pub camera_period: f64,
    pub timeout: f64,
    pub altitude: f64,
    pub time_constant: f64,
    /// Per-pixel value noise of rendered frames.
    pub render_noise: f64,
    pub cam: CameraModel,
    pub nav: NavConfig,
    pub track: TrackConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            camera_period: 0.05,
            timeout: 600.0,
            altitude: 2.0,
            time_constant: 0.2,
            render_noise: 0.012,
            cam: CameraModel::default(),
            nav: NavConfig::default(),
            track: TrackConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.timeout > 0.0 && self.altitude > 0.0 && self.time_constant > 0.0)
        {
            return Err(Error::InvalidInput(
                "dt, timeout, altitude and time constant must be positive",
            ));
        }
        if !(self.camera_period >= self.dt) {
            return Err(Error::InvalidInput("camera period shorter than dt"));
        }
        if !(self.render_noise >= 0.0) {
            return Err(Error::InvalidInput("render noise must be non-negative"));
        }
        self.cam.validate()?;
        self.nav.validate()?;
        self.track.validate()
    }

    fn frame_every(&self) -> u64 {
        (math::round(self.camera_period / self.dt) as u64).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub mode: Mode,
    pub pose: Pose,
    pub velocity: [f64; 2],
    pub command: [f64; 2],
    pub target: Option<u32>,
    pub ep_px: Option<f64>,
    pub ed_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MissionOutcome {
    Completed,
    Timeout,
    /// Navigation reported an internal error; the MAV was halted.
    Halted(Error),
}

/// A record that was the navigation target at some point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetRecord {
    pub id: u32,
    /// Last estimated ground position.
    pub s_t: [f64; 2],
    pub reached: bool,
}

/// Filter state of the navigation target after one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KfTraceRow {
    pub t: f64,
    pub id: u32,
    /// Detection fed to the filter this step, if any.
    pub measured: Option<[f64; 2]>,
    pub mean: [f64; 4],
    pub trace: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionLog {
    pub rows: Vec<LogRow>,
    pub events: Vec<NavEvent>,
    pub reached: Vec<ReachedTree>,
    pub targets: Vec<TargetRecord>,
    pub outcome: MissionOutcome,
    pub gate_rejections: u64,
    pub frames: u64,
    pub kf_trace: Vec<KfTraceRow>,
}

impl MissionLog {
    pub fn completed(&self) -> bool {
        self.outcome == MissionOutcome::Completed
    }
}

/// Runs one mission from the first waypoint until completion, timeout or
/// halt. Deterministic for a given world, configuration and script seed.
pub fn run_mission(
    world: &WorldSpec,
    cfg: &SimConfig,
    script: &SensorScript,
    mode: SenseMode<'_>,
) -> Result<MissionLog> {
    world.validate()?;
    cfg.validate()?;
    script.validate()?;
    if let SenseMode::Rendered(det) = mode {
        det.validate()?;
    }
    let path = world.flight_path()?;
    let start = path.waypoints()[0];
    let pose = Pose {
        x: start[0],
        y: start[1],
        z: cfg.altitude,
        yaw: 0.0,
    };
    let mut state = MissionState::new(path, pose, cfg.cam, cfg.nav, cfg.track)?;
    let mut dynamics = MavDynamics::at_rest(pose, cfg.nav.max_speed, cfg.time_constant);
    let mut sensor_rng = SimRng::seed_from_u64(derive_seed(script.seed, "sensor"));
    let render_seed = derive_seed(script.seed, "render");
    let every = cfg.frame_every();
    let steps = math::round(cfg.timeout / cfg.dt) as u64;
    let mut log = MissionLog {
        rows: Vec::new(),
        events: Vec::new(),
        reached: Vec::new(),
        targets: Vec::new(),
        outcome: MissionOutcome::Timeout,
        gate_rejections: 0,
        frames: 0,
        kf_trace: Vec::new(),
    };
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        let detections = if k % every == 0 {
            log.frames += 1;
            match mode {
                SenseMode::Oracle => {
                    synth_detections(world, &dynamics.pose, &cfg.cam, script, t, &mut sensor_rng)?
                }
                SenseMode::Rendered(det) => {
                    if script.in_dropout(t) {
                        Vec::new()
                    } else {
                        let mut rng = SimRng::seed_from_u64(derive_seed(render_seed ^ k, "frame"));
                        let frame = render_scene(
                            world,
                            &dynamics.pose,
                            &cfg.cam,
                            cfg.render_noise,
                            &mut rng,
                        )?;
                        detect(&frame, det)?
                    }
                }
            }
        } else {
            Vec::new()
        };
        let out = match nav_step(&mut state, &detections, cfg.dt) {
            Ok(out) => out,
            Err(e) => {
                log.outcome = MissionOutcome::Halted(e);
                break;
            }
        };
        for ev in &out.events {
            if ev.kind == crate::nav::EventKind::SwitchTarget
                && !log.targets.iter().any(|r| r.id == ev.tree_id)
            {
                log.targets.push(TargetRecord {
                    id: ev.tree_id,
                    s_t: [0.0; 2],
                    reached: false,
                });
            }
        }
        for rec in &mut log.targets {
            if let Some(r) = state.tree(rec.id) {
                rec.s_t = r.s_t;
            } else if let Some(r) = state.reached.iter().find(|r| r.id == rec.id) {
                rec.s_t = r.s_t;
                rec.reached = true;
            }
        }
        if let Some(rec) = state.target.and_then(|id| state.tree(id)) {
            if let Some(track) = &rec.track {
                log.kf_trace.push(KfTraceRow {
                    t: state.t,
                    id: rec.id,
                    measured: (track.age == 0.0).then_some(rec.p_t),
                    mean: track.mean,
                    trace: track.trace(),
                });
            }
        }
        log.events.extend(out.events.iter().copied());
        dynamics = step_dynamics(&dynamics, out.command, cfg.dt)?;
        state.mav = dynamics.pose;
        log.rows.push(LogRow {
            t: state.t,
            mode: state.mode,
            pose: dynamics.pose,
            velocity: dynamics.velocity,
            command: out.command,
            target: state.target,
            ep_px: out.ep_px,
            ed_m: out.ed_m,
        });
        if state.complete {
            log.outcome = MissionOutcome::Completed;
            break;
        }
    }
    log.reached = state.reached.clone();
    log.gate_rejections = state.gate_rejections;
    Ok(log)
}
