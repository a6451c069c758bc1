//! Frozen calibration of the occlusion/turbulence surrogate and the default
//! controller tuning. None of these numbers are measurements; each is chosen
//! to serve the behaviour noted next to it and can be overridden from a
//! scenario config.

/// Thrust-loss slope for a parcel under the rotor plane. Makes below-mounted
/// thrust drop clearly (airflow survey: AF1-AF4 fall below the empty-frame
/// baseline) while keeping the multiplier positive for full coverage.
pub const ALPHA_BELOW: f64 = 0.35;

/// Thrust-loss slope above the coverage threshold for a parcel over the rotor
/// plane. Only coverage past `C0_ABOVE` costs thrust.
pub const ALPHA_ABOVE: f64 = 0.04;

/// Coverage up to which an above-mounted parcel costs no thrust (half a disk).
pub const C0_ABOVE: f64 = 0.5;

/// Turbulence torque scale below the frame. Sized so below-mounted parcels at
/// 35 % coverage or more exceed the 1 % attitude error threshold.
pub const TURB_BETA_BELOW: f64 = 0.08;

/// Turbulence torque scale above the frame. 200x smaller than below, which
/// keeps above-mounted error under 0.5 % at 50 % coverage and gives the
/// >= 10x below/above error ratio.
pub const TURB_BETA_ABOVE: f64 = 0.0004;

/// Yaw disturbance relative to the roll/pitch standard deviation.
pub const YAW_DISTURBANCE_RATIO: f64 = 0.25;

/// Reaction torque coefficient relative to the thrust coefficient.
pub const TORQUE_TO_THRUST_COEFF: f64 = 0.06;

/// Closed-loop natural frequencies (rad/s) used to derive default gains from
/// each airframe's mass and inertia. The altitude loop settles a climb to
/// 2.5 m inside 10 s; the attitude loop is deliberately soft, like a stock
/// flight stack's conservative tune.
pub const ALTITUDE_BANDWIDTH: f64 = 1.6;
pub const ATTITUDE_ANGLE_GAIN: f64 = 1.2;
pub const ATTITUDE_RATE_BANDWIDTH: f64 = 4.0;

/// Altitude error (m) inside which the altitude integrator runs; keeps the
/// take-off climb from winding it up.
pub const ALTITUDE_INTEGRATION_BAND: f64 = 0.25;
/// Outside the band the integrator still runs once the climb rate (m/s) drops
/// below this, so a stalled offset is trimmed out.
pub const ALTITUDE_INTEGRATION_MAX_CLIMB: f64 = 0.1;
