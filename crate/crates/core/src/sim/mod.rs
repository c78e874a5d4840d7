//! Deterministic plantation simulator.
//!
//! * [`texture`]: procedural palms, confusers and soil.
//! * [`world`]: world description, forward projection and scene rendering.
//! * [`sensor`]: oracle detections with scripted noise and dropout.
//! * [`dynamics`]: first-order MAV velocity response.
//! * [`mission`]: the sense / navigate / integrate loop.
//! * [`corpus`]: labelled training windows and the template crown.

pub mod corpus;
pub mod dynamics;
pub mod mission;
pub mod sensor;
pub mod texture;
pub mod world;

pub use self::dynamics::{step_dynamics, MavDynamics};
pub use self::mission::{
    run_mission, KfTraceRow, LogRow, MissionLog, MissionOutcome, SenseMode, SimConfig, TargetRecord,
};
pub use self::sensor::{synth_detections, SensorScript};
pub use self::texture::Species;
pub use self::world::{project_tree, render_scene, TreeSpec, WorldSpec};
