//! Attitude estimation for IMUs moving on a known surface.
//!
//! The crate provides a multiplicative extended Kalman filter (`mekf`), a
//! geometric-constraint solver that recovers the gravity direction from the
//! plane the platform moves on (`geo`), and a heuristic variant that switches
//! between the two per sample (`heuristic`). Synthetic data generation
//! (`synth`), dataset ingestion (`ingest`), and trace-comparison metrics
//! (`metric`) round out the toolbox; `run` drives whole streams.

pub mod error;
pub mod geo;
pub mod heuristic;
pub mod ingest;
pub mod mekf;
pub mod metric;
pub mod run;
pub mod so3;
pub mod synth;

pub use error::{Error, Result};
pub use so3::{AxisAngle, Quaternion, Real, Rotation3};
