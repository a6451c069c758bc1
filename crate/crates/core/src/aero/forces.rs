use super::AeroError;

/// Drag and lift coefficients with the reference quantities they were
/// derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroCoefficients {
    pub c_drag: f64,
    pub c_lift: f64,
    pub reference_area: f64,
    pub airflow_speed: f64,
}

impl AeroCoefficients {
    pub fn from_forces(
        f_drag: f64,
        f_lift: f64,
        reference_area: f64,
        rho: f64,
        airflow_speed: f64,
    ) -> Result<Self, AeroError> {
        Ok(Self {
            c_drag: drag_coefficient(f_drag, reference_area, rho, airflow_speed)?,
            c_lift: lift_coefficient(f_lift, reference_area, rho, airflow_speed)?,
            reference_area,
            airflow_speed,
        })
    }
}

fn dynamic_pressure_area(a_p: f64, rho: f64, v: f64) -> Result<f64, AeroError> {
    if !(a_p > 0.0 && a_p.is_finite()) {
        return Err(AeroError::Singular(format!(
            "reference area must be positive, got {a_p}"
        )));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(AeroError::Singular(format!("density must be positive, got {rho}")));
    }
    if !(v.is_finite() && v != 0.0) {
        return Err(AeroError::Singular(format!(
            "airflow speed must be non-zero, got {v}"
        )));
    }
    Ok(a_p * rho * v * v)
}

/// `C = 2F / (A ρ v²)`.
pub fn drag_coefficient(f_drag: f64, a_p: f64, rho: f64, v: f64) -> Result<f64, AeroError> {
    Ok(2.0 * f_drag / dynamic_pressure_area(a_p, rho, v)?)
}

/// Same form as [`drag_coefficient`], applied to lift.
pub fn lift_coefficient(f_lift: f64, a_p: f64, rho: f64, v: f64) -> Result<f64, AeroError> {
    Ok(2.0 * f_lift / dynamic_pressure_area(a_p, rho, v)?)
}

/// `F = C A ρ v² / 2`. Zero airspeed is allowed here and yields zero force.
pub fn drag_force(c_drag: f64, a_p: f64, rho: f64, v: f64) -> f64 {
    c_drag * a_p * rho * v * v / 2.0
}

pub fn lift_force(c_lift: f64, a_p: f64, rho: f64, v: f64) -> f64 {
    c_lift * a_p * rho * v * v / 2.0
}

/// Wind loads split by the axis they disturb. `f_roll` carries the thrust
/// term, so it acts along the body z axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WindForces {
    pub f_pitch: f64,
    pub f_roll: f64,
    pub f_yaw: f64,
    pub f_drag: f64,
    pub f_lift: f64,
    pub theta: f64,
    pub psi: f64,
    pub thrust: f64,
    pub weight: f64,
}

/// ```text
/// F_pitch = -F_D cosθ cosψ - (F_L - mg) sinθ cosψ
/// F_roll  = -F_D sinθ      + (F_L - mg) cosθ      + T
/// F_yaw   = -F_D cosθ sinψ - (F_L - mg) sinθ sinψ
/// ```
///
/// Roll angle does not enter the decomposition.
pub fn wind_forces(
    theta: f64,
    psi: f64,
    f_drag: f64,
    f_lift: f64,
    mass: f64,
    g: f64,
    thrust: f64,
) -> WindForces {
    let weight = mass * g;
    let excess_lift = f_lift - weight;
    let (s_theta, c_theta) = theta.sin_cos();
    let (s_psi, c_psi) = psi.sin_cos();
    WindForces {
        f_pitch: -f_drag * c_theta * c_psi - excess_lift * s_theta * c_psi,
        f_roll: -f_drag * s_theta + excess_lift * c_theta + thrust,
        f_yaw: -f_drag * c_theta * s_psi - excess_lift * s_theta * s_psi,
        f_drag,
        f_lift,
        theta,
        psi,
        thrust,
        weight,
    }
}
