//! Molecular dynamics of a shifted-truncated Lennard-Jones (WCA) fluid with
//! an exactly conservative control-volume accounting layer.
//!
//! The crate simulates bulk and slit-channel WCA systems with half-step
//! leapfrog integration, measures per-control-volume mass / momentum /
//! energy budgets event-by-event so that the discrete balance
//! `Accumulation - Forcing + Advection = 0` holds to machine precision,
//! and computes local pressure by the virial, volume-average and
//! method-of-planes routes, validated against the analytic start-up Couette
//! solution.

pub mod analytic;
pub mod config;
pub mod cv_budget;
pub mod dynamics;
pub mod error;
pub mod forces;
pub mod geom;
pub mod grid;
pub mod harness;
pub mod lcv;
pub mod pressure;
pub mod state;

pub use error::{CvmdError, Result};
