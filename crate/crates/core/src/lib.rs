//! Tree detection, pixel tracking and target-oriented navigation for micro air
//! vehicles flying over plantations.
//!
//! The crate is `no_std` (it needs `alloc`) and free of IO. It contains the
//! whole pipeline:
//!
//! 1. [`imgproc`] rasters, HSV conversion, box-filter downsampling and
//!    hue/saturation histograms.
//! 2. [`hog`] gradient fields, cell histograms, block normalization and the
//!    global descriptor variance.
//! 3. [`classify`] Pearson hue/saturation gating and a linear SVM trained with
//!    a Pegasos-style subgradient method.
//! 4. [`detect`] the sliding-window detector with its three gating stages and
//!    non-maximum suppression.
//! 5. [`track`] a constant-velocity Kalman filter over image coordinates.
//! 6. [`nav`] the mission state machine: cruise, approach, recover, remove.
//! 7. [`sim`] a deterministic plantation world, camera, synthetic imagery and
//!    the fixed-step mission loop.
//!
//! File formats, metrics reports and the command line live in the `palmnav`
//! companion crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod classify;
pub mod detect;
pub mod error;
pub mod hog;
pub mod imgproc;
pub(crate) mod math;
pub mod nav;
pub mod rng;
pub mod sim;
pub mod track;

pub use crate::classify::{SvmModel, TemplateProfile};
pub use crate::detect::{Detection, DetectorConfig};
pub use crate::error::{Error, Result};
pub use crate::hog::{HogDescriptor, HogParams};
pub use crate::imgproc::{HsvImage, HueSatHistogram, ImageBuffer};
pub use crate::nav::{CameraModel, FlightPath, MissionState, Pose};
pub use crate::track::TrackState;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
