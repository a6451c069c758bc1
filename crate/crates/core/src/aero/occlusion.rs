use nalgebra::Vector3;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::calibration;
use crate::geometry::MountPosition;

use super::AeroError;

/// Surrogate for how a parcel disturbs the rotor flow: a linear thrust loss
/// and a Gaussian turbulence torque, both proportional to disk coverage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcclusionModel {
    pub alpha_below: f64,
    pub alpha_above: f64,
    pub c0_above: f64,
    pub turb_beta_below: f64,
    pub turb_beta_above: f64,
}

impl Default for OcclusionModel {
    fn default() -> Self {
        Self {
            alpha_below: calibration::ALPHA_BELOW,
            alpha_above: calibration::ALPHA_ABOVE,
            c0_above: calibration::C0_ABOVE,
            turb_beta_below: calibration::TURB_BETA_BELOW,
            turb_beta_above: calibration::TURB_BETA_ABOVE,
        }
    }
}

impl OcclusionModel {
    pub fn validate(&self) -> Result<(), AeroError> {
        for (field, v) in [
            ("alpha_below", self.alpha_below),
            ("alpha_above", self.alpha_above),
            ("c0_above", self.c0_above),
            ("turb_beta_below", self.turb_beta_below),
            ("turb_beta_above", self.turb_beta_above),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(AeroError::InvalidModel {
                    field,
                    reason: format!("must be non-negative, got {v}"),
                });
            }
        }
        if self.c0_above > 1.0 {
            return Err(AeroError::InvalidModel {
                field: "c0_above",
                reason: "must lie in [0, 1]".into(),
            });
        }
        // keep the multiplier strictly positive at full coverage
        if self.alpha_below >= 1.0 {
            return Err(AeroError::InvalidModel {
                field: "alpha_below",
                reason: "must be below 1".into(),
            });
        }
        if self.alpha_above * (1.0 - self.c0_above) >= 1.0 {
            return Err(AeroError::InvalidModel {
                field: "alpha_above",
                reason: "drives the multiplier to zero at full coverage".into(),
            });
        }
        Ok(())
    }

    pub fn turbulence_scale(&self, position: MountPosition) -> f64 {
        match position {
            MountPosition::Above => self.turb_beta_above,
            MountPosition::Below => self.turb_beta_below,
            MountPosition::None => 0.0,
        }
    }
}

fn check_coverage(coverage: f64) -> Result<(), AeroError> {
    if (0.0..=1.0).contains(&coverage) {
        Ok(())
    } else {
        Err(AeroError::InvalidArgument(format!(
            "coverage must lie in [0, 1], got {coverage}"
        )))
    }
}

/// Fraction of thrust a rotor keeps with the given coverage.
pub fn occlusion_multiplier(
    model: &OcclusionModel,
    position: MountPosition,
    coverage: f64,
) -> Result<f64, AeroError> {
    check_coverage(coverage)?;
    Ok(match position {
        MountPosition::None => 1.0,
        MountPosition::Below => 1.0 - model.alpha_below * coverage,
        MountPosition::Above => 1.0 - model.alpha_above * (coverage - model.c0_above).max(0.0),
    })
}

/// Standard deviation of the roll/pitch turbulence torque (N·m).
pub fn disturbance_sigma(
    model: &OcclusionModel,
    position: MountPosition,
    coverage: f64,
    nominal_thrust: f64,
    lever: f64,
) -> f64 {
    model.turbulence_scale(position) * coverage * nominal_thrust * lever
}

/// One draw of the turbulence torque in body axes. Consumes exactly three
/// normal samples from `rng` whenever the scale is non-zero, none otherwise.
pub fn disturbance_torque<R: Rng + ?Sized>(
    model: &OcclusionModel,
    position: MountPosition,
    coverage: f64,
    nominal_thrust: f64,
    lever: f64,
    rng: &mut R,
) -> Vector3<f64> {
    let sigma = disturbance_sigma(model, position, coverage, nominal_thrust, lever);
    if sigma == 0.0 {
        return Vector3::zeros();
    }
    let roll: f64 = rng.sample(StandardNormal);
    let pitch: f64 = rng.sample(StandardNormal);
    let yaw: f64 = rng.sample(StandardNormal);
    Vector3::new(
        sigma * roll,
        sigma * pitch,
        calibration::YAW_DISTURBANCE_RATIO * sigma * yaw,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn multiplier_examples() {
        let m = OcclusionModel::default();
        for pos in [MountPosition::Above, MountPosition::Below, MountPosition::None] {
            assert_eq!(occlusion_multiplier(&m, pos, 0.0).unwrap(), 1.0);
        }
        assert_eq!(occlusion_multiplier(&m, MountPosition::Above, 0.5).unwrap(), 1.0);
        assert!((occlusion_multiplier(&m, MountPosition::Below, 0.5).unwrap() - 0.825).abs() < 1e-15);
        assert!(occlusion_multiplier(&m, MountPosition::Below, 1.01).is_err());
        assert!(occlusion_multiplier(&m, MountPosition::Below, -0.1).is_err());
    }

    #[test]
    fn zero_coverage_means_zero_torque() {
        let m = OcclusionModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = disturbance_torque(&m, MountPosition::Below, 0.0, 20.0, 0.25, &mut rng);
        assert_eq!(t, Vector3::zeros());
        let t = disturbance_torque(&m, MountPosition::None, 0.7, 20.0, 0.25, &mut rng);
        assert_eq!(t, Vector3::zeros());
    }

    #[test]
    fn below_to_above_sigma_ratio() {
        let m = OcclusionModel::default();
        let below = disturbance_sigma(&m, MountPosition::Below, 0.4, 20.0, 0.25);
        let above = disturbance_sigma(&m, MountPosition::Above, 0.4, 20.0, 0.25);
        assert!((below / above - 200.0).abs() < 1e-9);
    }

    #[test]
    fn sample_mean_is_near_zero() {
        let m = OcclusionModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let sigma = disturbance_sigma(&m, MountPosition::Below, 0.5, 20.0, 0.25);
        let mut sum = Vector3::zeros();
        for _ in 0..n {
            sum += disturbance_torque(&m, MountPosition::Below, 0.5, 20.0, 0.25, &mut rng);
        }
        let mean = sum / n as f64;
        let bound = 4.0 * sigma / (n as f64).sqrt();
        assert!(mean.x.abs() < bound && mean.y.abs() < bound);
        assert!(mean.z.abs() < bound * calibration::YAW_DISTURBANCE_RATIO);
    }

    #[test]
    fn invalid_models() {
        let m = OcclusionModel {
            alpha_below: 1.0,
            ..Default::default()
        };
        assert!(m.validate().is_err());
        let m = OcclusionModel {
            c0_above: 1.5,
            ..Default::default()
        };
        assert!(m.validate().is_err());
        OcclusionModel::default().validate().unwrap();
    }
}
