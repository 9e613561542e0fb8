//! Backstepping boundary control of a wave equation with in-domain
//! anti-damping and a pointwise actuator at an interior point ξ.
//!
//! The crate computes the transformation kernels on both sides of ξ, turns
//! them into feedback gains, applies the state transformation and its
//! inverse, and simulates plant and target systems to check the design.

pub mod config;
pub mod cli;
pub mod control;
pub mod error;
pub mod exec;
pub mod field;
pub mod kernels;
pub mod oracle;
pub mod pipeline;
pub mod presets;
pub mod problem;
pub mod sim;
pub mod profile;
pub mod report;
pub mod state;
pub mod transform;

pub use error::{Error, Result};
