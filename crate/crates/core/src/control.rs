//! Altitude hold, cascaded attitude stabilization and the X-frame mixer.

use nalgebra::{Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::aero::{thrust_to_rpm, RotorModel};
use crate::calibration;
use crate::dynamics::{InertiaModel, VehicleState};
use crate::geometry::RotorLayout;
use crate::units::GRAVITY;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub const fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd }
    }

    fn is_valid(&self) -> bool {
        [self.kp, self.ki, self.kd]
            .iter()
            .all(|g| g.is_finite() && *g >= 0.0)
    }
}

/// Per-axis gains are ordered roll, pitch, yaw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerGains {
    pub altitude: PidGains,
    pub attitude: [PidGains; 3],
    pub rate: [PidGains; 3],
    /// Clamp on the altitude integral term (N).
    pub altitude_integrator_limit: f64,
    /// Clamp on the angle-loop integral term (rad/s).
    pub attitude_integrator_limit: f64,
    /// Clamp on the rate-loop integral term (N·m).
    pub rate_integrator_limit: f64,
}

impl ControllerGains {
    pub fn zero() -> Self {
        Self {
            altitude: PidGains::default(),
            attitude: [PidGains::default(); 3],
            rate: [PidGains::default(); 3],
            altitude_integrator_limit: 1.0,
            attitude_integrator_limit: 1.0,
            rate_integrator_limit: 1.0,
        }
    }

    /// Default tune derived from the loaded airframe's mass and inertia.
    pub fn for_airframe(inertia: &InertiaModel) -> Self {
        let m = inertia.total_mass;
        let wn = calibration::ALTITUDE_BANDWIDTH;
        // triple closed-loop pole at -wn
        let altitude = PidGains::new(3.0 * m * wn * wn, m * wn.powi(3), 3.0 * m * wn);
        let angle = calibration::ATTITUDE_ANGLE_GAIN;
        let rate_bw = calibration::ATTITUDE_RATE_BANDWIDTH;
        let rate = |i: f64| PidGains::new(i * rate_bw, i * rate_bw * 0.5, 0.0);
        let j = inertia.inertia_diag;
        Self {
            altitude,
            attitude: [
                PidGains::new(angle, 0.0, 0.0),
                PidGains::new(angle, 0.0, 0.0),
                PidGains::new(angle, 0.0, 0.0),
            ],
            rate: [rate(j.x), rate(j.y), rate(j.z)],
            altitude_integrator_limit: m * GRAVITY,
            attitude_integrator_limit: 0.5,
            rate_integrator_limit: 0.5 * m * GRAVITY * 0.05,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = std::iter::once(("altitude", self.altitude))
            .chain(self.attitude.iter().map(|g| ("attitude", *g)))
            .chain(self.rate.iter().map(|g| ("rate", *g)));
        for (name, g) in all {
            if !g.is_valid() {
                return Err(format!("{name} gains must be finite and non-negative"));
            }
        }
        for (name, limit) in [
            ("altitude_integrator_limit", self.altitude_integrator_limit),
            ("attitude_integrator_limit", self.attitude_integrator_limit),
            ("rate_integrator_limit", self.rate_integrator_limit),
        ] {
            if !(limit.is_finite() && limit > 0.0) {
                return Err(format!("{name} must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setpoint {
    pub target_altitude: f64,
    /// Roll, pitch, yaw (rad).
    pub target_rpy: [f64; 3],
}

impl Setpoint {
    pub fn hover(altitude: f64) -> Self {
        Self {
            target_altitude: altitude,
            target_rpy: [0.0; 3],
        }
    }
}

/// PID memory. The integral is stored as the clamped integral *term*
/// (`ki * ∫e`), which makes anti-windup a plain clamp.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pid {
    pub gains: PidGains,
    pub integrator_limit: f64,
    integral: f64,
    prev_error: Option<f64>,
}

impl Pid {
    pub fn new(gains: PidGains, integrator_limit: f64) -> Self {
        Self {
            gains,
            integrator_limit,
            integral: 0.0,
            prev_error: None,
        }
    }

    pub fn integral_term(&self) -> f64 {
        self.integral
    }

    /// `derivative` overrides the finite-difference error derivative, e.g. with
    /// a measured rate.
    pub fn update(&mut self, error: f64, derivative: Option<f64>, dt: f64) -> f64 {
        self.update_gated(error, derivative, dt, true)
    }

    /// As [`Pid::update`], but the integral is frozen when `integrate` is false.
    pub fn update_gated(&mut self, error: f64, derivative: Option<f64>, dt: f64, integrate: bool) -> f64 {
        if integrate {
            self.integral = (self.integral + self.gains.ki * error * dt)
                .clamp(-self.integrator_limit, self.integrator_limit);
        }
        let d = derivative.unwrap_or_else(|| match self.prev_error {
            Some(prev) => (error - prev) / dt,
            None => 0.0,
        });
        self.prev_error = Some(error);
        self.gains.kp * error + self.integral + self.gains.kd * d
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.prev_error = None;
    }
}

/// Collective-thrust controller driven by the altitude error and climb rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltitudeController {
    pid: Pid,
    max_collective: f64,
}

impl AltitudeController {
    pub fn new(gains: &ControllerGains, max_collective: f64) -> Self {
        Self {
            pid: Pid::new(gains.altitude, gains.altitude_integrator_limit),
            max_collective,
        }
    }

    pub fn integral_term(&self) -> f64 {
        self.pid.integral_term()
    }

    /// Collective thrust command (N), clamped to `[0, max_collective]`.
    pub fn altitude_hold(
        &mut self,
        state: &VehicleState,
        setpoint: &Setpoint,
        dt: f64,
        hover_feedforward: f64,
    ) -> f64 {
        let error = setpoint.target_altitude - state.position.z;
        let integrate = error.abs() < calibration::ALTITUDE_INTEGRATION_BAND
            || state.velocity.z.abs() < calibration::ALTITUDE_INTEGRATION_MAX_CLIMB;
        let correction = self.pid.update_gated(error, Some(-state.velocity.z), dt, integrate);
        (hover_feedforward + correction).clamp(0.0, self.max_collective)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeCommand {
    pub rate_setpoint: Vector3<f64>,
    pub torque: Vector3<f64>,
}

/// Angle loop feeding a body-rate loop, one independent channel per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeController {
    angle: [Pid; 3],
    rate: [Pid; 3],
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let w = (a + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if w == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        w
    }
}

impl AttitudeController {
    pub fn new(gains: &ControllerGains) -> Self {
        Self {
            angle: gains
                .attitude
                .map(|g| Pid::new(g, gains.attitude_integrator_limit)),
            rate: gains.rate.map(|g| Pid::new(g, gains.rate_integrator_limit)),
        }
    }

    pub fn update(&mut self, state: &VehicleState, setpoint: &Setpoint, dt: f64) -> AttitudeCommand {
        let actual = state.euler().as_array();
        let mut rate_setpoint = Vector3::zeros();
        let mut torque = Vector3::zeros();
        for axis in 0..3 {
            let angle_error = wrap_angle(setpoint.target_rpy[axis] - actual[axis]);
            rate_setpoint[axis] = self.angle[axis].update(angle_error, None, dt);
            let rate_error = rate_setpoint[axis] - state.angular_rate[axis];
            torque[axis] = self.rate[axis].update(rate_error, None, dt);
        }
        AttitudeCommand {
            rate_setpoint,
            torque,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixerOutput {
    pub rpm_commands: [f64; 4],
    pub saturated: [bool; 4],
    pub throttle_fraction: f64,
    /// Per-rotor thrust demanded before inversion and clamping (N).
    pub thrust_demand: [f64; 4],
}

/// Rows map rotor thrusts to (collective, τx, τy, τz).
fn allocation_matrix(model: &RotorModel, layout: &RotorLayout) -> Matrix4<f64> {
    let yaw_per_thrust = model.torque_coeff * model.diameter / model.thrust_coeff;
    let mut m = Matrix4::zeros();
    for (i, rotor) in layout.rotors.iter().enumerate() {
        m[(0, i)] = 1.0;
        m[(1, i)] = rotor.center.y;
        m[(2, i)] = -rotor.center.x;
        m[(3, i)] = rotor.spin.reaction_sign() * yaw_per_thrust;
    }
    m
}

/// Per-rotor thrust solving the allocation for the demanded wrench, before
/// any clamping. Linear in its inputs.
pub fn mix_thrusts(
    collective: f64,
    torques: &Vector3<f64>,
    model: &RotorModel,
    layout: &RotorLayout,
) -> [f64; 4] {
    let inverse = allocation_matrix(model, layout)
        .try_inverse()
        .expect("X layout allocation is invertible");
    let t = inverse * Vector4::new(collective, torques.x, torques.y, torques.z);
    [t[0], t[1], t[2], t[3]]
}

pub fn mixer(
    collective: f64,
    torques: &Vector3<f64>,
    model: &RotorModel,
    layout: &RotorLayout,
) -> MixerOutput {
    let thrust_demand = mix_thrusts(collective, torques, model, layout);
    let mut rpm_commands = [0.0; 4];
    let mut saturated = [false; 4];
    for i in 0..4 {
        let rpm = thrust_to_rpm(model, thrust_demand[i]);
        rpm_commands[i] = rpm.value;
        saturated[i] = rpm.saturated;
    }
    let throttle_fraction = rpm_commands.iter().sum::<f64>() / (4.0 * model.rpm_max);
    MixerOutput {
        rpm_commands,
        saturated,
        throttle_fraction,
        thrust_demand,
    }
}
