//! Dark-frame simulation and row-noise characterisation of CMOS image
//! sensors under power-supply ripple.
//!
//! The crate models a rolling-shutter sensor whose rows pick up a
//! frequency-dependent disturbance from a sinusoidal supply ripple,
//! quantifies the resulting horizontal banding with a row-noise metric,
//! and automates frequency sweeps that map out susceptibility curves,
//! repeatability, and critical frequency ranges.
//!
//! Main building blocks:
//!
//! - [`sensor`] — deterministic simulated sensor and dark-frame capture
//! - [`raw`] — Bayer plane extraction, bilinear demosaic, luma
//! - [`pgm`] — 16-bit binary PGM frame interchange with sidecar metadata
//! - [`metric`] — row-noise metric, burst statistics, banding spectrum
//! - [`analysis`] — pluggable analysis-plane extractors (registry)
//! - [`sweep`] — frequency schedules, sweep execution, range detection
//! - [`report`] — curve CSV, run manifest, SVG overlay plots
//! - [`config`] — structured run-configuration files

pub mod analysis;
pub mod config;
pub mod error;
pub mod metric;
pub mod pgm;
pub mod raw;
pub mod report;
pub mod rng;
pub mod sensor;
pub mod sweep;

pub use error::{Error, Result};
