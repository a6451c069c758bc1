//! Deterministic quadcopter simulator and experiment harness for comparing
//! parcels mounted above and below the airframe.
//!
//! The pipeline per time step is geometry → aero → control → dynamics →
//! sensing; [`experiments`] wires it into hover scenarios, sweeps and the
//! command-line front end.

pub mod aero;
pub mod calibration;
pub mod control;
pub mod dynamics;
pub mod geometry;
pub mod sensing;
pub mod units;
pub mod experiments;
