use crate::geometry::{AfId, AfPointLayout, MountPosition, PayloadSpec};

use super::{occlusion_multiplier, rotor_thrust, AeroError, OcclusionModel, RotorModel};

/// Share of the adjacent rotors' mean downwash seen between two disks.
pub const SPILLOVER_FACTOR: f64 = 0.5;

/// Airflow speeds (m/s) at the eight sample points, in [`AfId::ALL`] order.
pub type AirflowSamples = [f64; 8];

/// Momentum-theory induced velocity `sqrt(T / (2 ρ A))`.
pub fn induced_velocity(thrust: f64, rho: f64, disk_area: f64) -> f64 {
    (thrust.max(0.0) / (2.0 * rho * disk_area)).sqrt()
}

/// Downwash at each airflow point. Each rotor's induced velocity comes from
/// its unoccluded thrust at the given rpm; a parcel below the frame blocks the
/// outflow and scales it by the rotor's occlusion multiplier.
pub fn downwash_velocity(
    layout: &AfPointLayout,
    rpms: &[f64; 4],
    model: &RotorModel,
    occlusion: &OcclusionModel,
    payload: &PayloadSpec,
    coverages: &[f64; 4],
) -> Result<AirflowSamples, AeroError> {
    let mut per_rotor = [0.0; 4];
    for i in 0..4 {
        let thrust = rotor_thrust(model, rpms[i], 1.0)?.value;
        let mut v = induced_velocity(thrust, model.air_density, model.disk_area);
        if payload.position == MountPosition::Below {
            v *= occlusion_multiplier(occlusion, payload.position, coverages[i])?;
        }
        per_rotor[i] = v;
    }
    let mut out = [0.0; 8];
    for (slot, point) in out.iter_mut().zip(&layout.points) {
        let (a, b) = point.id.rotors();
        *slot = if point.id.is_under_disk() {
            per_rotor[a]
        } else {
            SPILLOVER_FACTOR * 0.5 * (per_rotor[a] + per_rotor[b])
        };
    }
    debug_assert!(layout.points.iter().map(|p| p.id).eq(AfId::ALL));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aero::thrust_to_rpm;
    use crate::geometry::{af_points, build_rotor_layout, DroneSpec};
    use approx::assert_relative_eq;

    #[test]
    fn momentum_theory_value() {
        // sqrt(12 / (2 * 1.225 * 0.0856))
        assert_relative_eq!(induced_velocity(12.0, 1.225, 0.0856), 7.564_334_031_623_655, max_relative = 1e-12);
    }

    #[test]
    fn stopped_rotors_no_airflow() {
        let spec = DroneSpec::big();
        let af = af_points(&build_rotor_layout(&spec).unwrap());
        let model = RotorModel::calibrated(&spec).unwrap();
        let out = downwash_velocity(
            &af,
            &[0.0; 4],
            &model,
            &OcclusionModel::default(),
            &PayloadSpec::none(),
            &[0.0; 4],
        )
        .unwrap();
        assert_eq!(out, [0.0; 8]);
    }

    #[test]
    fn hover_symmetry_and_spillover() {
        let spec = DroneSpec::big();
        let af = af_points(&build_rotor_layout(&spec).unwrap());
        let model = RotorModel::calibrated(&spec).unwrap();
        let rpm = thrust_to_rpm(&model, 6.0).value;
        let out = downwash_velocity(
            &af,
            &[rpm; 4],
            &model,
            &OcclusionModel::default(),
            &PayloadSpec::none(),
            &[0.0; 4],
        )
        .unwrap();
        assert!(out[..4].iter().all(|&v| v == out[0]));
        assert!(out[4..].iter().all(|&v| v == 0.5 * out[0]));
        assert_relative_eq!(out[0], induced_velocity(6.0, model.air_density, model.disk_area), max_relative = 1e-12);
    }

    #[test]
    fn below_parcel_scales_outflow() {
        let spec = DroneSpec::big();
        let af = af_points(&build_rotor_layout(&spec).unwrap());
        let model = RotorModel::calibrated(&spec).unwrap();
        let occ = OcclusionModel::default();
        let rpm = [4000.0; 4];
        let mut payload = PayloadSpec {
            box_x: 500.0,
            box_y: 500.0,
            box_z: 100.0,
            mass: 100.0,
            position: MountPosition::Below,
            vertical_offset: 10.0,
        };
        let below = downwash_velocity(&af, &rpm, &model, &occ, &payload, &[0.4; 4]).unwrap();
        payload.position = MountPosition::Above;
        let above = downwash_velocity(&af, &rpm, &model, &occ, &payload, &[0.4; 4]).unwrap();
        for i in 0..8 {
            assert_relative_eq!(below[i], above[i] * 0.86, max_relative = 1e-12);
        }
    }
}
