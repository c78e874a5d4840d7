//! File formats, metrics, benchmarking and the command line around
//! `palmnav-core`.
//!
//! The core crate is IO-free; this crate reads and writes worlds, run
//! configurations, corpora, model files, CSV logs and SVG plots.

pub mod bench;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod imageio;
mod logs;
pub mod meta;
pub mod metrics;
pub mod mission;
pub mod model;
pub mod pipeline;
pub mod svg;
pub mod train;
pub mod world;

pub use palmnav_core as core;

pub use crate::config::RunConfig;
pub use crate::error::{PalmError, Result};
pub use crate::logs::{
    write_csv, write_detections, write_events, write_hog_dump, write_kf_trace, write_metrics,
    write_mission,
};
