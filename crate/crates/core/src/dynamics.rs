//! 6-DOF rigid-body propagation with a fixed-step semi-implicit Euler
//! integrator.
//!
//! Frames: inertial is x/y horizontal, z up. Body is x forward, y left, z up.
//! The attitude quaternion maps body vectors into the inertial frame.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use thiserror::Error;

use crate::aero::WindForces;
use crate::geometry::{combined_cg, DroneSpec, GeometryError, PayloadSpec, RotorLayout};
use crate::units::{self, GRAVITY};

/// Default integration step (500 Hz).
pub const DEFAULT_DT: f64 = 0.002;
pub const MAX_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("time step must lie in (0, {MAX_DT}], got {0}")]
    InvalidStep(f64),
    #[error("non-finite {quantity} at t = {time:.4} s: {detail}")]
    NonFinite {
        quantity: &'static str,
        time: f64,
        detail: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub attitude: UnitQuaternion<f64>,
    pub angular_rate: Vector3<f64>,
    pub time: f64,
}

impl Default for VehicleState {
    fn default() -> Self {
        Self {
            position: Vector3::zeros(),
            velocity: Vector3::zeros(),
            attitude: UnitQuaternion::identity(),
            angular_rate: Vector3::zeros(),
            time: 0.0,
        }
    }
}

impl VehicleState {
    pub fn at_rest(position: Vector3<f64>) -> Self {
        Self {
            position,
            ..Default::default()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.attitude.coords.iter().all(|v| v.is_finite())
            && self.angular_rate.iter().all(|v| v.is_finite())
            && self.time.is_finite()
    }

    pub fn euler(&self) -> EulerAngles {
        euler_angles(&self.attitude)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    /// Pitch within 1e-6 rad of ±90°, where roll and yaw are not separable.
    pub gimbal_lock: bool,
}

impl EulerAngles {
    pub fn as_array(&self) -> [f64; 3] {
        [self.roll, self.pitch, self.yaw]
    }
}

/// Z-Y-X (yaw, pitch, roll) decomposition.
pub fn euler_angles(attitude: &UnitQuaternion<f64>) -> EulerAngles {
    let (roll, pitch, yaw) = attitude.euler_angles();
    EulerAngles {
        roll,
        pitch,
        yaw,
        gimbal_lock: (pitch.abs() - FRAC_PI_2).abs() < 1e-6,
    }
}

pub fn quaternion_from_euler(roll: f64, pitch: f64, yaw: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_euler_angles(roll, pitch, yaw)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaModel {
    pub total_mass: f64,
    pub inertia_diag: Vector3<f64>,
    pub cg_offset: Vector3<f64>,
}

impl InertiaModel {
    /// Airframe as a uniform plate of its bounding box, plus the parcel as a
    /// cuboid at its mounting height; taken about the geometric center.
    pub fn from_specs(spec: &DroneSpec, payload: &PayloadSpec) -> Result<Self, GeometryError> {
        let m = spec.dry_mass_kg();
        let (fx, fy, h) = (
            units::mm(spec.footprint_x),
            units::mm(spec.footprint_y),
            units::mm(spec.height),
        );
        let mut inertia = Vector3::new(
            m * (fy * fy + h * h) / 12.0,
            m * (fx * fx + h * h) / 12.0,
            m * (fx * fx + fy * fy) / 12.0,
        );
        let mp = payload.mass_kg();
        if payload.is_present() && mp > 0.0 {
            let (bx, by, bz) = (
                units::mm(payload.box_x),
                units::mm(payload.box_y),
                units::mm(payload.box_z),
            );
            let zc = payload.center_height();
            inertia += Vector3::new(
                mp * (by * by + bz * bz) / 12.0 + mp * zc * zc,
                mp * (bx * bx + bz * bz) / 12.0 + mp * zc * zc,
                mp * (bx * bx + by * by) / 12.0,
            );
        }
        Ok(Self {
            total_mass: m + mp,
            inertia_diag: inertia,
            cg_offset: combined_cg(spec, payload)?,
        })
    }

    pub fn weight(&self) -> f64 {
        self.total_mass * GRAVITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceTorqueSum {
    /// Net force, inertial frame (N).
    pub force: Vector3<f64>,
    /// Net torque about the geometric center, body frame (N·m).
    pub torque: Vector3<f64>,
}

/// Sums rotor thrust, gravity, wind loads, the gravity moment of an offset
/// CoG and the turbulence torque.
///
/// Wind loads are applied as a body-frame force: `f_pitch` along x, `f_yaw`
/// along y and `f_roll` along z. Callers that already account for rotor
/// thrust and gravity separately pass a `WindForces` built with zero thrust
/// and zero mass.
pub fn assemble_forces(
    state: &VehicleState,
    thrusts: &[f64; 4],
    yaw_torques: &[f64; 4],
    wind: &WindForces,
    inertia: &InertiaModel,
    disturbance: &Vector3<f64>,
    layout: &RotorLayout,
) -> ForceTorqueSum {
    let total_thrust: f64 = thrusts.iter().sum();
    let wind_body = Vector3::new(wind.f_pitch, wind.f_yaw, wind.f_roll);
    let gravity = Vector3::new(0.0, 0.0, -inertia.total_mass * GRAVITY);
    let force = state.attitude * (Vector3::new(0.0, 0.0, total_thrust) + wind_body) + gravity;

    let mut torque = *disturbance;
    for ((rotor, &thrust), &q) in layout.rotors.iter().zip(thrusts).zip(yaw_torques) {
        let arm = Vector3::new(rotor.center.x, rotor.center.y, 0.0);
        torque += arm.cross(&Vector3::new(0.0, 0.0, thrust));
        torque.z += q;
    }
    let gravity_body = state.attitude.inverse() * gravity;
    torque += inertia.cg_offset.cross(&gravity_body);
    ForceTorqueSum { force, torque }
}

fn check_finite(v: &Vector3<f64>, quantity: &'static str, time: f64) -> Result<(), IntegrationError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(IntegrationError::NonFinite {
            quantity,
            time,
            detail: format!("{:?}", v.as_slice()),
        })
    }
}

/// Body-rate update with the gyroscopic term taken at the step midpoint,
/// which keeps torque-free rotational energy and |L| exact up to the
/// fixed-point tolerance.
fn rotational_step(w: &Vector3<f64>, torque: &Vector3<f64>, i: &Vector3<f64>, dt: f64) -> Vector3<f64> {
    let mut next = w + (torque - w.cross(&i.component_mul(w))).component_div(i) * dt;
    for _ in 0..20 {
        let mid = (w + next) * 0.5;
        let candidate = w + (torque - mid.cross(&i.component_mul(&mid))).component_div(i) * dt;
        let change = (candidate - next).norm();
        next = candidate;
        if change <= 1e-15 * (1.0 + next.norm()) {
            break;
        }
    }
    next
}

/// One semi-implicit Euler step: velocities first, then positions and
/// attitude from the updated velocities.
pub fn step(
    state: &VehicleState,
    sum: &ForceTorqueSum,
    inertia: &InertiaModel,
    dt: f64,
) -> Result<VehicleState, IntegrationError> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(IntegrationError::InvalidStep(dt));
    }
    check_finite(&sum.force, "force", state.time)?;
    check_finite(&sum.torque, "torque", state.time)?;

    let velocity = state.velocity + sum.force / inertia.total_mass * dt;
    let position = state.position + velocity * dt;

    let angular_rate = rotational_step(&state.angular_rate, &sum.torque, &inertia.inertia_diag, dt);

    let delta = UnitQuaternion::from_scaled_axis(angular_rate * dt);
    let q: Quaternion<f64> = (state.attitude * delta).into_inner();
    let attitude = UnitQuaternion::new_normalize(q);

    let next = VehicleState {
        position,
        velocity,
        attitude,
        angular_rate,
        time: state.time + dt,
    };
    if !next.is_finite() {
        return Err(IntegrationError::NonFinite {
            quantity: "state",
            time: next.time,
            detail: format!("{next:?}"),
        });
    }
    Ok(next)
}
