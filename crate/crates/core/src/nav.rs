//! Tree-targeting navigation.
//!
//! The MAV cruises along a waypoint path. Crowns seen by the downward camera
//! are projected to the ground and kept in the detected-tree set `T_d` when
//! they lie within `gate_factor × crown_size` of the current leg. The nearest
//! pending tree ahead becomes the target; the MAV servoes on its filtered
//! pixel offset `e_p` until `|e_p| < tau_p`, then removes it and resumes the
//! path. If the target's track is dropped while the MAV is farther than
//! `delta_d` from the stored ground position, the MAV flies to that position
//! until the crown is seen again.

use alloc::vec::Vec;

use crate::detect::Detection;
use crate::error::{Error, Result};
use crate::math;
use crate::track::{kf_init, kf_predict, kf_update, TrackConfig, TrackState};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

impl Pose {
    pub fn ground(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// Downward pinhole camera, yaw-aligned with the MAV. Image `x` points along
/// body right, image `y` (down the image) points backwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub focal: f64,
    pub principal: [f64; 2],
    pub width: usize,
    pub height: usize,
}

impl CameraModel {
    /// Principal point at the frame centre.
    pub fn new(focal: f64, width: usize, height: usize) -> Result<Self> {
        let cam = Self {
            focal,
            principal: [width as f64 / 2.0, height as f64 / 2.0],
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.focal > 0.0) || !self.focal.is_finite() {
            return Err(Error::InvalidInput("focal length must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidInput("camera frame must be non-empty"));
        }
        Ok(())
    }

    /// Whether `p` lies in the frame at least `margin` pixels from each edge.
    pub fn contains(&self, p: [f64; 2], margin: f64) -> bool {
        p[0] >= margin
            && p[1] >= margin
            && p[0] <= self.width as f64 - margin
            && p[1] <= self.height as f64 - margin
    }
}

impl Default for CameraModel {
    /// 480 px focal length on an 1100×700 frame. With 300 px windows at a
    /// 100 px stride one window is centred on the principal point.
    fn default() -> Self {
        Self {
            focal: 480.0,
            principal: [550.0, 350.0],
            width: 1100,
            height: 700,
        }
    }
}

/// `e_p = p_hat − principal` and its magnitude.
pub fn pixel_offset(p_hat: [f64; 2], cam: &CameraModel) -> ([f64; 2], f64) {
    let e = [p_hat[0] - cam.principal[0], p_hat[1] - cam.principal[1]];
    (e, math::hypot(e[0], e[1]))
}

/// Ground-plane displacement seen at pixel offset `e` from the principal
/// point.
pub fn offset_to_world(e: [f64; 2], mav: &Pose, cam: &CameraModel) -> Result<[f64; 2]> {
    if !(mav.z > 0.0) {
        return Err(Error::InvalidInput("altitude must be positive"));
    }
    let s = mav.z / cam.focal;
    let (right, forward) = (e[0] * s, -e[1] * s);
    let (sn, cs) = (math::sin(mav.yaw), math::cos(mav.yaw));
    Ok([cs * right - sn * forward, sn * right + cs * forward])
}

/// Flat-ground inverse projection of an image point.
pub fn estimate_tree_position(p_hat: [f64; 2], mav: &Pose, cam: &CameraModel) -> Result<[f64; 2]> {
    let (e, _) = pixel_offset(p_hat, cam);
    let d = offset_to_world(e, mav, cam)?;
    Ok([mav.x + d[0], mav.y + d[1]])
}

/// Forward projection of a ground point, without frame clipping.
pub fn world_to_pixel(p: [f64; 2], mav: &Pose, cam: &CameraModel) -> Result<[f64; 2]> {
    if !(mav.z > 0.0) {
        return Err(Error::InvalidInput("altitude must be positive"));
    }
    let (dx, dy) = (p[0] - mav.x, p[1] - mav.y);
    let (sn, cs) = (math::sin(mav.yaw), math::cos(mav.yaw));
    let (right, forward) = (cs * dx + sn * dy, -sn * dx + cs * dy);
    let k = cam.focal / mav.z;
    Ok([cam.principal[0] + right * k, cam.principal[1] - forward * k])
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlightPath {
    waypoints: Vec<[f64; 2]>,
    pub current_leg: usize,
}

impl FlightPath {
    pub fn new(waypoints: Vec<[f64; 2]>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidInput(
                "a flight path needs at least two waypoints",
            ));
        }
        if waypoints
            .iter()
            .any(|w| !(w[0].is_finite() && w[1].is_finite()))
        {
            return Err(Error::InvalidInput("waypoints must be finite"));
        }
        if waypoints.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("path legs must have nonzero length"));
        }
        Ok(Self {
            waypoints,
            current_leg: 0,
        })
    }

    pub fn waypoints(&self) -> &[[f64; 2]] {
        &self.waypoints
    }

    pub fn leg_count(&self) -> usize {
        self.waypoints.len() - 1
    }

    pub fn leg(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        (self.waypoints[i], self.waypoints[i + 1])
    }

    pub fn current(&self) -> ([f64; 2], [f64; 2]) {
        self.leg(self.current_leg)
    }

    pub fn is_last_leg(&self) -> bool {
        self.current_leg + 1 == self.leg_count()
    }
}

fn leg_frame(a: [f64; 2], b: [f64; 2]) -> Result<([f64; 2], f64)> {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = math::hypot(dx, dy);
    if !(len > 0.0) {
        return Err(Error::InvalidInput("zero-length leg"));
    }
    Ok(([dx / len, dy / len], len))
}

/// Perpendicular distance from `p` to the infinite line through `a`–`b`.
pub fn orthogonal_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Result<f64> {
    Ok(signed_cross_track(p, a, b)?.abs())
}

/// Signed perpendicular offset, positive to the left of `a → b`.
pub fn signed_cross_track(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Result<f64> {
    let (u, _) = leg_frame(a, b)?;
    Ok(u[0] * (p[1] - a[1]) - u[1] * (p[0] - a[0]))
}

/// Coordinate of `p` along `a → b`, measured from `a`.
pub fn along_track(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Result<f64> {
    let (u, _) = leg_frame(a, b)?;
    Ok(u[0] * (p[0] - a[0]) + u[1] * (p[1] - a[1]))
}

/// In-column iff the orthogonal distance is at most `factor × crown_size`.
pub fn gate_tree(
    p: [f64; 2],
    a: [f64; 2],
    b: [f64; 2],
    crown_size: f64,
    factor: f64,
) -> Result<bool> {
    Ok(orthogonal_distance(p, a, b)? <= factor * crown_size)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavConfig {
    /// Pixel offset below which the target counts as reached (px).
    pub tau_p: f64,
    /// Distance to the stored position beyond which recovery engages (m).
    pub delta_d: f64,
    pub gate_factor: f64,
    /// Crown diameter (m).
    pub crown_size: f64,
    /// Visual-servo gain (1/s).
    pub k_p: f64,
    pub max_speed: f64,
    pub cruise_speed: f64,
    /// Cross-track correction gain (1/s).
    pub k_cross: f64,
    /// Along-track slow-down gain near waypoints (1/s).
    pub k_wp: f64,
    pub waypoint_tol: f64,
    /// Detections within `merge_factor × crown_size` of a record update it.
    pub merge_factor: f64,
    /// Trees further than this behind the MAV along the leg are not selected (m).
    pub behind_margin: f64,
    pub giveup_radius: f64,
    pub giveup_time: f64,
    pub recover_timeout: f64,
    pub recovery_enabled: bool,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            tau_p: 15.0,
            delta_d: 0.5,
            gate_factor: 1.5,
            crown_size: 1.0,
            k_p: 0.8,
            max_speed: 0.6,
            cruise_speed: 0.4,
            k_cross: 1.0,
            k_wp: 1.0,
            waypoint_tol: 0.04,
            merge_factor: 0.8,
            behind_margin: 0.5,
            giveup_radius: 0.2,
            giveup_time: 3.0,
            recover_timeout: 20.0,
            recovery_enabled: true,
        }
    }
}

impl NavConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.tau_p,
            self.delta_d,
            self.gate_factor,
            self.crown_size,
            self.k_p,
            self.max_speed,
            self.cruise_speed,
            self.k_cross,
            self.k_wp,
            self.waypoint_tol,
            self.merge_factor,
            self.giveup_radius,
            self.giveup_time,
            self.recover_timeout,
        ];
        if pos.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput(
                "navigation gains and thresholds must be positive",
            ));
        }
        if !(self.behind_margin.is_finite() && self.behind_margin >= 0.0) {
            return Err(Error::InvalidInput("behind_margin must be non-negative"));
        }
        if self.cruise_speed > self.max_speed {
            return Err(Error::InvalidInput("cruise speed exceeds max speed"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Cruise,
    Approach,
    Recover,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Cruise => "cruise",
            Mode::Approach => "approach",
            Mode::Recover => "recover",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeStatus {
    Pending,
    Approaching,
    /// Abandoned target; kept so redetections of it are absorbed.
    Lost,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeRecord {
    pub id: u32,
    pub p_t: [f64; 2],
    pub p_hat: [f64; 2],
    pub s_t: [f64; 2],
    pub track: Option<TrackState>,
    pub status: TreeStatus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachedTree {
    pub id: u32,
    pub s_t: [f64; 2],
    pub t: f64,
    /// `|e_p|` at the marking instant; `None` for a recovery give-up.
    pub ep_px: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Detect,
    Insert,
    SwitchTarget,
    RecoverEnter,
    RecoverExit,
    Reached,
    Removed,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Detect => "detect",
            EventKind::Insert => "insert",
            EventKind::SwitchTarget => "switch_target",
            EventKind::RecoverEnter => "recover_enter",
            EventKind::RecoverExit => "recover_exit",
            EventKind::Reached => "reached",
            EventKind::Removed => "removed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavEvent {
    pub t: f64,
    pub kind: EventKind,
    pub tree_id: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionState {
    pub mode: Mode,
    pub path: FlightPath,
    /// Detected-tree set `T_d`.
    pub trees: Vec<TreeRecord>,
    pub target: Option<u32>,
    pub mav: Pose,
    pub cam: CameraModel,
    pub cfg: NavConfig,
    pub track_cfg: TrackConfig,
    pub t: f64,
    pub reached: Vec<ReachedTree>,
    pub complete: bool,
    /// Detections rejected by the column gate.
    pub gate_rejections: u64,
    next_id: u32,
    /// Seconds spent within `giveup_radius` of a lost target's position.
    hold_time: f64,
    recover_since: f64,
}

/// Per-step result of [`nav_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub command: [f64; 2],
    pub events: Vec<NavEvent>,
    pub ep_px: Option<f64>,
    pub ed_m: Option<f64>,
}

impl MissionState {
    pub fn new(
        path: FlightPath,
        mav: Pose,
        cam: CameraModel,
        cfg: NavConfig,
        track_cfg: TrackConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        cam.validate()?;
        track_cfg.validate()?;
        if !(mav.z > 0.0) {
            return Err(Error::InvalidInput("altitude must be positive"));
        }
        Ok(Self {
            mode: Mode::Cruise,
            path,
            trees: Vec::new(),
            target: None,
            mav,
            cam,
            cfg,
            track_cfg,
            t: 0.0,
            reached: Vec::new(),
            complete: false,
            gate_rejections: 0,
            next_id: 1,
            hold_time: 0.0,
            recover_since: 0.0,
        })
    }

    pub fn tree(&self, id: u32) -> Option<&TreeRecord> {
        self.trees.iter().find(|r| r.id == id)
    }

    fn tree_index(&self, id: u32) -> Option<usize> {
        self.trees.iter().position(|r| r.id == id)
    }

    fn merge_radius(&self) -> f64 {
        self.cfg.merge_factor * self.cfg.crown_size
    }
}

/// Nearest pending in-column tree ahead of the MAV on the current leg; ties
/// go to the smaller orthogonal distance, then to the earlier insertion.
pub fn target_selection(state: &MissionState) -> Option<u32> {
    let (a, b) = state.path.current();
    let mav_along = along_track(state.mav.ground(), a, b).ok()?;
    let mut best: Option<(f64, f64, u32)> = None;
    for r in state
        .trees
        .iter()
        .filter(|r| r.status == TreeStatus::Pending)
    {
        let (Ok(along), Ok(orth)) = (along_track(r.s_t, a, b), orthogonal_distance(r.s_t, a, b))
        else {
            continue;
        };
        if orth > state.cfg.gate_factor * state.cfg.crown_size
            || along < mav_along - state.cfg.behind_margin
        {
            continue;
        }
        let key = (along, orth, r.id);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    best.map(|(_, _, id)| id)
}

fn saturate(v: [f64; 2], max: f64) -> [f64; 2] {
    let n = math::hypot(v[0], v[1]);
    if n > max {
        [v[0] * max / n, v[1] * max / n]
    } else {
        v
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    math::hypot(a[0] - b[0], a[1] - b[1])
}

/// Predicts every live track and drops those that coasted past `max_coast`.
fn predict_tracks(state: &mut MissionState, dt: f64) -> Result<()> {
    let max_coast = state.track_cfg.max_coast;
    for r in &mut state.trees {
        if let Some(tr) = r.track {
            let p = kf_predict(&tr, dt)?;
            if p.age > max_coast {
                r.track = None;
            } else {
                r.p_hat = p.position();
                r.track = Some(p);
            }
        }
    }
    Ok(())
}

fn refresh(state: &MissionState, r: &mut TreeRecord, z: [f64; 2]) -> Result<bool> {
    let fresh = r.track.is_none();
    let tr = match r.track {
        Some(tr) => kf_update(&tr, z)?,
        None => kf_init(z, &state.track_cfg)?,
    };
    r.p_t = z;
    r.p_hat = tr.position();
    r.s_t = estimate_tree_position(r.p_hat, &state.mav, &state.cam)?;
    r.track = Some(tr);
    Ok(fresh)
}

fn associate(
    state: &mut MissionState,
    detections: &[Detection],
    events: &mut Vec<NavEvent>,
) -> Result<()> {
    let radius = state.merge_radius();
    let worlds = detections
        .iter()
        .map(|d| estimate_tree_position(d.center, &state.mav, &state.cam))
        .collect::<Result<Vec<_>>>()?;
    // Nearest detection per record.
    let mut claimed: Vec<Option<(usize, f64)>> = alloc::vec![None; state.trees.len()];
    let mut used = alloc::vec![false; detections.len()];
    for (di, w) in worlds.iter().enumerate() {
        let nearest = state
            .trees
            .iter()
            .enumerate()
            .map(|(ri, r)| (ri, dist(r.s_t, *w)))
            .filter(|(_, d)| *d < radius)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((ri, d)) = nearest {
            used[di] = true;
            if claimed[ri].is_none_or(|(_, cd)| d < cd) {
                claimed[ri] = Some((di, d));
            }
        }
    }
    for ri in 0..state.trees.len() {
        if let Some((di, _)) = claimed[ri] {
            let mut r = state.trees[ri];
            if refresh(state, &mut r, detections[di].center)? {
                events.push(NavEvent {
                    t: state.t,
                    kind: EventKind::Detect,
                    tree_id: r.id,
                });
            }
            state.trees[ri] = r;
        }
    }
    let (a, b) = state.path.current();
    // A crown cut by the frame border is localized towards the frame centre,
    // so new trees are only inserted once the whole crown is in view.
    let crown_px = 0.5 * state.cfg.crown_size * state.cam.focal / state.mav.z;
    for (di, w) in worlds.iter().enumerate() {
        if used[di] || !state.cam.contains(detections[di].center, crown_px) {
            continue;
        }
        if state.reached.iter().any(|r| dist(r.s_t, *w) < radius)
            || state.trees.iter().any(|r| dist(r.s_t, *w) < radius)
        {
            continue;
        }
        if !gate_tree(*w, a, b, state.cfg.crown_size, state.cfg.gate_factor)? {
            state.gate_rejections += 1;
            continue;
        }
        let id = state.next_id;
        state.next_id += 1;
        let mut r = TreeRecord {
            id,
            p_t: [0.0; 2],
            p_hat: [0.0; 2],
            s_t: *w,
            track: None,
            status: TreeStatus::Pending,
        };
        refresh(state, &mut r, detections[di].center)?;
        state.trees.push(r);
        events.push(NavEvent {
            t: state.t,
            kind: EventKind::Detect,
            tree_id: id,
        });
        events.push(NavEvent {
            t: state.t,
            kind: EventKind::Insert,
            tree_id: id,
        });
    }
    Ok(())
}

fn cruise_command(state: &mut MissionState) -> Result<[f64; 2]> {
    loop {
        let (a, b) = state.path.current();
        let (u, len) = leg_frame(a, b)?;
        let p = state.mav.ground();
        let remaining = len - along_track(p, a, b)?;
        if state.path.is_last_leg() {
            if dist(p, b) < state.cfg.waypoint_tol {
                state.complete = true;
                return Ok([0.0, 0.0]);
            }
        } else if remaining < state.cfg.waypoint_tol {
            state.path.current_leg += 1;
            continue;
        }
        let cross = signed_cross_track(p, a, b)?;
        let speed =
            (state.cfg.k_wp * remaining).clamp(-state.cfg.cruise_speed, state.cfg.cruise_speed);
        let left = [-u[1], u[0]];
        let cmd = [
            speed * u[0] - state.cfg.k_cross * cross * left[0],
            speed * u[1] - state.cfg.k_cross * cross * left[1],
        ];
        return Ok(saturate(cmd, state.cfg.max_speed));
    }
}

fn remove_target(
    state: &mut MissionState,
    id: u32,
    ep_px: Option<f64>,
    events: &mut Vec<NavEvent>,
) -> Result<()> {
    let idx = state
        .tree_index(id)
        .ok_or(Error::Internal("target missing from T_d"))?;
    let r = state.trees.remove(idx);
    state.reached.push(ReachedTree {
        id,
        s_t: r.s_t,
        t: state.t,
        ep_px,
    });
    if ep_px.is_some() {
        events.push(NavEvent {
            t: state.t,
            kind: EventKind::Reached,
            tree_id: id,
        });
    }
    events.push(NavEvent {
        t: state.t,
        kind: EventKind::Removed,
        tree_id: id,
    });
    state.target = None;
    state.mode = Mode::Cruise;
    Ok(())
}

fn abandon_target(state: &mut MissionState, id: u32, events: &mut Vec<NavEvent>) -> Result<()> {
    let idx = state
        .tree_index(id)
        .ok_or(Error::Internal("target missing from T_d"))?;
    state.trees[idx].status = TreeStatus::Lost;
    events.push(NavEvent {
        t: state.t,
        kind: EventKind::Removed,
        tree_id: id,
    });
    state.target = None;
    state.mode = Mode::Cruise;
    Ok(())
}

enum Outcome {
    Command([f64; 2]),
    /// Target gone; fall through to cruise this step.
    Released,
}

/// Flies to the stored position of a target whose track was dropped.
fn steer_to_stored(
    state: &mut MissionState,
    r: &TreeRecord,
    dt: f64,
    events: &mut Vec<NavEvent>,
) -> Result<Outcome> {
    let ed = dist(state.mav.ground(), r.s_t);
    if ed <= state.cfg.giveup_radius {
        state.hold_time += dt;
    } else {
        state.hold_time = 0.0;
    }
    if state.hold_time >= state.cfg.giveup_time {
        remove_target(state, r.id, None, events)?;
        return Ok(Outcome::Released);
    }
    if state.mode == Mode::Recover && state.t - state.recover_since > state.cfg.recover_timeout {
        abandon_target(state, r.id, events)?;
        return Ok(Outcome::Released);
    }
    let p = state.mav.ground();
    let v = [
        state.cfg.k_p * (r.s_t[0] - p[0]),
        state.cfg.k_p * (r.s_t[1] - p[1]),
    ];
    Ok(Outcome::Command(saturate(v, state.cfg.max_speed)))
}

fn pursue(state: &mut MissionState, id: u32, dt: f64, out: &mut StepOutput) -> Result<Outcome> {
    let r = *state
        .tree(id)
        .ok_or(Error::Internal("target missing from T_d"))?;
    out.ed_m = Some(dist(state.mav.ground(), r.s_t));
    match r.track {
        Some(tr) => {
            if state.mode == Mode::Recover {
                out.events.push(NavEvent {
                    t: state.t,
                    kind: EventKind::RecoverExit,
                    tree_id: id,
                });
                state.mode = Mode::Approach;
            }
            state.hold_time = 0.0;
            let (e, mag) = pixel_offset(tr.position(), &state.cam);
            out.ep_px = Some(mag);
            if tr.age == 0.0 && mag < state.cfg.tau_p {
                remove_target(state, id, Some(mag), &mut out.events)?;
                return Ok(Outcome::Released);
            }
            let w = offset_to_world(e, &state.mav, &state.cam)?;
            Ok(Outcome::Command(saturate(
                [state.cfg.k_p * w[0], state.cfg.k_p * w[1]],
                state.cfg.max_speed,
            )))
        }
        None if !state.cfg.recovery_enabled => {
            abandon_target(state, id, &mut out.events)?;
            Ok(Outcome::Released)
        }
        None => {
            if state.mode == Mode::Approach && out.ed_m.unwrap_or(0.0) > state.cfg.delta_d {
                state.mode = Mode::Recover;
                state.recover_since = state.t;
                out.events.push(NavEvent {
                    t: state.t,
                    kind: EventKind::RecoverEnter,
                    tree_id: id,
                });
            }
            steer_to_stored(state, &r, dt, &mut out.events)
        }
    }
}

/// One navigation step: advance time by `dt`, fold in this step's detections,
/// and return the horizontal velocity command.
pub fn nav_step(state: &mut MissionState, detections: &[Detection], dt: f64) -> Result<StepOutput> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput("dt must be positive"));
    }
    if state.target.is_some() == (state.mode == Mode::Cruise) {
        return Err(Error::Internal("target set iff mode is not cruise"));
    }
    let mut out = StepOutput {
        command: [0.0, 0.0],
        events: Vec::new(),
        ep_px: None,
        ed_m: None,
    };
    if state.complete {
        return Ok(out);
    }
    state.t += dt;
    predict_tracks(state, dt)?;
    associate(state, detections, &mut out.events)?;

    // A reached target hands over to cruise, which may pick the next target
    // in the same step; at most two passes.
    for _ in 0..2 {
        if state.mode == Mode::Cruise {
            if let Some(id) = target_selection(state) {
                let idx = state
                    .tree_index(id)
                    .ok_or(Error::Internal("selected tree missing"))?;
                state.trees[idx].status = TreeStatus::Approaching;
                state.target = Some(id);
                state.mode = Mode::Approach;
                state.hold_time = 0.0;
                out.events.push(NavEvent {
                    t: state.t,
                    kind: EventKind::SwitchTarget,
                    tree_id: id,
                });
            } else {
                out.command = cruise_command(state)?;
                return Ok(out);
            }
        }
        let id = state
            .target
            .ok_or(Error::Internal("approach without target"))?;
        match pursue(state, id, dt, &mut out)? {
            Outcome::Command(c) => {
                out.command = c;
                return Ok(out);
            }
            Outcome::Released => continue,
        }
    }
    out.command = cruise_command(state)?;
    Ok(out)
}
