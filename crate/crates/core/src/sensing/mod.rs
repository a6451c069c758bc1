//! Simulated sensors, telemetry logs and the attitude error-rate metric.

mod metrics;
mod telemetry;

pub use metrics::{rpy_error_rate, ErrorRates, DEFAULT_FULL_SCALE, DEFAULT_SETTLE_TIME};
pub use telemetry::{
    read_telemetry, read_telemetry_from, write_telemetry, write_telemetry_to, TelemetryError,
    TelemetryRecord, HEADER,
};
pub(crate) use telemetry::write_atomic as telemetry_write_atomic;

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::aero::AirflowSamples;
use crate::dynamics::VehicleState;
use crate::units::GRAVITY;

/// Gaussian noise and constant bias per channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub gyro_std: f64,
    pub accel_std: f64,
    pub anemometer_std: f64,
    pub range_std: f64,
    pub gyro_bias: [f64; 3],
    pub accel_bias: [f64; 3],
    pub anemometer_bias: f64,
    pub range_bias: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            gyro_std: 0.002,
            accel_std: 0.05,
            anemometer_std: 0.05,
            range_std: 0.005,
            gyro_bias: [0.0; 3],
            accel_bias: [0.0; 3],
            anemometer_bias: 0.0,
            range_bias: 0.0,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            gyro_std: 0.0,
            accel_std: 0.0,
            anemometer_std: 0.0,
            range_std: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("gyro_std", self.gyro_std),
            ("accel_std", self.accel_std),
            ("anemometer_std", self.anemometer_std),
            ("range_std", self.range_std),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("{name} must be non-negative"));
            }
        }
        let biases = self
            .gyro_bias
            .iter()
            .chain(&self.accel_bias)
            .chain([&self.anemometer_bias, &self.range_bias]);
        if biases.into_iter().any(|b| !b.is_finite()) {
            return Err("sensor biases must be finite".into());
        }
        Ok(())
    }
}

fn noisy<R: Rng + ?Sized>(truth: f64, bias: f64, std: f64, rng: &mut R) -> f64 {
    if std == 0.0 {
        truth + bias
    } else {
        let z: f64 = rng.sample(StandardNormal);
        truth + bias + std * z
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Body rates (rad/s).
    pub gyro: Vector3<f64>,
    /// Specific force in body axes (m/s²); reads +g on z at rest.
    pub accel: Vector3<f64>,
    /// Attitude solution (roll, pitch, yaw), taken from truth.
    pub rpy: [f64; 3],
}

/// IMU reading given the vehicle's inertial acceleration.
pub fn sample_imu<R: Rng + ?Sized>(
    state: &VehicleState,
    inertial_accel: &Vector3<f64>,
    noise: &NoiseModel,
    rng: &mut R,
) -> ImuSample {
    let specific = state.attitude.inverse() * (inertial_accel + Vector3::new(0.0, 0.0, GRAVITY));
    let mut gyro = Vector3::zeros();
    let mut accel = Vector3::zeros();
    for i in 0..3 {
        gyro[i] = noisy(state.angular_rate[i], noise.gyro_bias[i], noise.gyro_std, rng);
    }
    for i in 0..3 {
        accel[i] = noisy(specific[i], noise.accel_bias[i], noise.accel_std, rng);
    }
    ImuSample {
        gyro,
        accel,
        rpy: state.euler().as_array(),
    }
}

/// Anemometer readings, floored at zero.
pub fn sample_anemometer<R: Rng + ?Sized>(
    airflow: &AirflowSamples,
    noise: &NoiseModel,
    rng: &mut R,
) -> AirflowSamples {
    airflow.map(|v| noisy(v, noise.anemometer_bias, noise.anemometer_std, rng).max(0.0))
}

/// Downward rangefinder: slant distance to flat ground along body -z.
pub fn sample_rangefinder<R: Rng + ?Sized>(
    state: &VehicleState,
    noise: &NoiseModel,
    rng: &mut R,
) -> f64 {
    let down = state.attitude * Vector3::new(0.0, 0.0, -1.0);
    let cos_tilt = (-down.z).max(1e-3);
    let slant = state.position.z.max(0.0) / cos_tilt;
    noisy(slant, noise.range_bias, noise.range_std, rng).max(0.0)
}
