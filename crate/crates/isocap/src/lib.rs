//! Experiments on high-dimensional spheres built on `isocap-core`: set
//! descriptors, configuration, CSV output and the five experiment runners
//! behind the `isocap` command.

pub mod config;
pub mod descriptor;
pub mod error;
pub mod experiments;
pub mod output;
pub mod parallel;

pub use error::{AppError, AppResult};
