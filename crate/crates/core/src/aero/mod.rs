//! Aerodynamic loads: rotor thrust and reaction torque, drag/lift
//! coefficients, wind-force decomposition, the parcel occlusion surrogate and
//! rotor downwash at the airflow sample points.

mod downwash;
mod forces;
mod occlusion;
mod rotor;

pub use downwash::{downwash_velocity, induced_velocity, AirflowSamples};
pub use forces::{
    drag_coefficient, drag_force, lift_coefficient, lift_force, wind_forces, AeroCoefficients,
    WindForces,
};
pub use occlusion::{disturbance_sigma, disturbance_torque, occlusion_multiplier, OcclusionModel};
pub use rotor::{rotor_thrust, rotor_yaw_torque, thrust_to_rpm, Clamped, RotorModel};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AeroError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular input: {0}")]
    Singular(String),
    #[error("invalid model: `{field}` {reason}")]
    InvalidModel { field: &'static str, reason: String },
}
