use std::f64::consts::PI;

use crate::calibration::TORQUE_TO_THRUST_COEFF;
use crate::geometry::{DroneSpec, GeometryError, Spin};
use crate::units::{self, AIR_DENSITY};

use super::AeroError;

/// Static propeller model, `T = k_T ρ n² D⁴` and `Q = k_Q ρ n² D⁵` with `n`
/// in rev/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorModel {
    pub thrust_coeff: f64,
    pub torque_coeff: f64,
    pub diameter: f64,
    pub disk_area: f64,
    pub rpm_max: f64,
    pub air_density: f64,
}

/// A value that may have been clamped into its valid range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped {
    pub value: f64,
    pub saturated: bool,
}

impl RotorModel {
    pub fn new(
        thrust_coeff: f64,
        torque_coeff: f64,
        diameter: f64,
        rpm_max: f64,
        air_density: f64,
    ) -> Result<Self, AeroError> {
        let model = Self {
            thrust_coeff,
            torque_coeff,
            diameter,
            disk_area: PI * diameter * diameter / 4.0,
            rpm_max,
            air_density,
        };
        model.validate()?;
        Ok(model)
    }

    /// Solves `k_T` so that one rotor at `rpm_max` delivers the airframe's
    /// `max_thrust_per_rotor`.
    pub fn calibrated(spec: &DroneSpec) -> Result<Self, GeometryError> {
        spec.validate()?;
        let diameter = units::mm(spec.prop_diameter_mm());
        let n = spec.rpm_max / 60.0;
        let max_thrust = units::gf_to_newton(spec.max_thrust_per_rotor);
        let k_t = max_thrust / (AIR_DENSITY * n * n * diameter.powi(4));
        Self::new(
            k_t,
            k_t * TORQUE_TO_THRUST_COEFF,
            diameter,
            spec.rpm_max,
            AIR_DENSITY,
        )
        .map_err(|e| GeometryError::InvalidConfig {
            field: "max_thrust_per_rotor",
            reason: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<(), AeroError> {
        let bad = |field: &'static str, reason: &str| AeroError::InvalidModel {
            field,
            reason: reason.into(),
        };
        for (field, v) in [
            ("thrust_coeff", self.thrust_coeff),
            ("torque_coeff", self.torque_coeff),
            ("diameter", self.diameter),
            ("rpm_max", self.rpm_max),
            ("air_density", self.air_density),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(field, "must be positive"));
            }
        }
        if self.torque_coeff >= self.thrust_coeff {
            return Err(bad("torque_coeff", "must be smaller than thrust_coeff"));
        }
        Ok(())
    }

    /// Thrust of one unoccluded rotor at `rpm_max` (N).
    pub fn max_thrust(&self) -> f64 {
        self.thrust_at(self.rpm_max)
    }

    fn thrust_at(&self, rpm: f64) -> f64 {
        let n = rpm / 60.0;
        self.thrust_coeff * self.air_density * n * n * self.diameter.powi(4)
    }

    fn clamp_rpm(&self, rpm: f64) -> Clamped {
        if rpm.is_nan() || rpm < 0.0 {
            Clamped { value: 0.0, saturated: true }
        } else if rpm > self.rpm_max {
            Clamped { value: self.rpm_max, saturated: true }
        } else {
            Clamped { value: rpm, saturated: false }
        }
    }
}

/// Thrust (N) of one rotor with occlusion multiplier `eta`. Out-of-range rpm is
/// clamped and flagged rather than rejected.
pub fn rotor_thrust(model: &RotorModel, rpm: f64, eta: f64) -> Result<Clamped, AeroError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(AeroError::InvalidArgument(format!(
            "occlusion multiplier must lie in (0, 1], got {eta}"
        )));
    }
    let rpm = model.clamp_rpm(rpm);
    Ok(Clamped {
        value: eta * model.thrust_at(rpm.value),
        saturated: rpm.saturated,
    })
}

/// Reaction torque about body +z (N·m); opposite spins at equal rpm cancel.
pub fn rotor_yaw_torque(model: &RotorModel, rpm: f64, spin: Spin) -> Clamped {
    let rpm = model.clamp_rpm(rpm);
    let n = rpm.value / 60.0;
    let q = model.torque_coeff * model.air_density * n * n * model.diameter.powi(5);
    Clamped {
        value: spin.reaction_sign() * q,
        saturated: rpm.saturated,
    }
}

/// Inverse of the unoccluded thrust curve, clamped to `[0, rpm_max]`.
pub fn thrust_to_rpm(model: &RotorModel, thrust: f64) -> Clamped {
    if thrust.is_nan() || thrust < 0.0 {
        return Clamped { value: 0.0, saturated: true };
    }
    let per_rev2 = model.thrust_coeff * model.air_density * model.diameter.powi(4);
    model.clamp_rpm(60.0 * (thrust / per_rev2).sqrt())
}
