//! Hover scenarios, parameter sweeps, plots and the command-line front end.

pub mod cli;
pub mod config;
pub mod plots;
pub mod scenario;
pub mod sweeps;
pub mod validate;

pub use config::{ConfigError, DroneChoice, ExperimentConfig, PayloadChoice, Scenario};
pub use scenario::{render_report, run_hover_scenario, simulate_hover, ScenarioResult};

use thiserror::Error;

use crate::dynamics::IntegrationError;
use crate::sensing::TelemetryError;

/// Text written into reports next to the error-rate numbers.
pub const ERROR_RATE_DEFINITION: &str = "mean |wrap(actual - desired)| over samples after settle_time, divided by full_scale, times 100";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Plot(String),
    #[error("{0}")]
    Runtime(String),
}

impl ExperimentError {
    /// Process exit code: 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 1,
            _ => 2,
        }
    }
}
