//! Scenario configuration (JSON) and its resolution into simulation inputs.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aero::{occlusion_multiplier, OcclusionModel, RotorModel};
use crate::control::ControllerGains;
use crate::dynamics::{InertiaModel, MAX_DT};
use crate::geometry::{
    af_points, build_rotor_layout, layout_coverage, square_box_side_for_coverage, AfPointLayout,
    Coverage, DroneSpec, GeometryError, MountPosition, PayloadSpec, RotorLayout,
};
use crate::sensing::{NoiseModel, DEFAULT_SETTLE_TIME};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config error in `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<GeometryError> for ConfigError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::InvalidConfig { field, reason } => ConfigError::invalid(field, reason),
            GeometryError::InvalidArgument(reason) => ConfigError::invalid("geometry", reason),
        }
    }
}

/// Built-in name or a full airframe description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DroneChoice {
    Builtin(String),
    Custom(DroneSpec),
}

impl Default for DroneChoice {
    fn default() -> Self {
        DroneChoice::Builtin("big".into())
    }
}

impl DroneChoice {
    pub fn resolve(&self) -> Result<DroneSpec, ConfigError> {
        let spec = match self {
            DroneChoice::Builtin(name) => DroneSpec::builtin(name).ok_or_else(|| {
                ConfigError::invalid("drone", format!("unknown drone `{name}` (small|medium|big)"))
            })?,
            DroneChoice::Custom(spec) => spec.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Named parcel preset or an explicit box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PayloadChoice {
    Preset(String),
    Custom(PayloadSpec),
}

impl Default for PayloadChoice {
    fn default() -> Self {
        PayloadChoice::Custom(PayloadSpec::none())
    }
}

/// Parcel presets. Box sides are solved per airframe so that the largest
/// per-rotor coverage hits the listed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayloadPreset {
    pub name: &'static str,
    pub position: MountPosition,
    pub coverage: f64,
    /// Box height (mm).
    pub box_z: f64,
    /// Mass (g).
    pub mass: f64,
}

pub const PAYLOAD_PRESETS: [PayloadPreset; 7] = [
    PayloadPreset { name: "below-small", position: MountPosition::Below, coverage: 0.15, box_z: 120.0, mass: 100.0 },
    PayloadPreset { name: "below-medium", position: MountPosition::Below, coverage: 0.35, box_z: 160.0, mass: 100.0 },
    PayloadPreset { name: "below-large", position: MountPosition::Below, coverage: 0.6, box_z: 200.0, mass: 100.0 },
    PayloadPreset { name: "above-small", position: MountPosition::Above, coverage: 0.2, box_z: 100.0, mass: 100.0 },
    PayloadPreset { name: "above-medium", position: MountPosition::Above, coverage: 0.4, box_z: 120.0, mass: 100.0 },
    PayloadPreset { name: "above-large", position: MountPosition::Above, coverage: 0.5, box_z: 140.0, mass: 100.0 },
    PayloadPreset { name: "above-xl", position: MountPosition::Above, coverage: 0.7, box_z: 160.0, mass: 100.0 },
];

/// Gap between parcel face and propeller plane used by presets (mm).
pub const DEFAULT_MOUNT_GAP: f64 = 20.0;

/// Parcel used when only a mounting position is requested: the 200 g flight
/// test load, 100 mm tall.
pub fn default_parcel(position: MountPosition) -> PayloadSpec {
    PayloadSpec {
        box_x: 0.0,
        box_y: 0.0,
        box_z: 100.0,
        mass: 200.0,
        position,
        vertical_offset: DEFAULT_MOUNT_GAP,
    }
}

pub fn preset(name: &str) -> Option<PayloadPreset> {
    PAYLOAD_PRESETS.iter().copied().find(|p| p.name == name)
}

impl PayloadPreset {
    pub fn build(&self, drone: &DroneSpec) -> Result<PayloadSpec, ConfigError> {
        let side = square_box_side_for_coverage(drone, self.coverage)?;
        Ok(PayloadSpec {
            box_x: side,
            box_y: side,
            box_z: self.box_z,
            mass: self.mass,
            position: self.position,
            vertical_offset: DEFAULT_MOUNT_GAP,
        })
    }
}

fn default_duration() -> f64 {
    30.0
}
fn default_dt() -> f64 {
    crate::dynamics::DEFAULT_DT
}
fn default_target_altitude() -> f64 {
    2.5
}
fn default_settle_time() -> f64 {
    DEFAULT_SETTLE_TIME
}
fn default_full_scale() -> f64 {
    FRAC_PI_4
}
fn default_telemetry_rate() -> f64 {
    50.0
}
fn default_settle_band() -> f64 {
    0.05
}
fn default_box_drag() -> f64 {
    1.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub drone: DroneChoice,
    #[serde(default)]
    pub payload: PayloadChoice,
    /// Resize the parcel to a square box reaching this per-rotor coverage.
    #[serde(default)]
    pub coverage: Option<f64>,
    #[serde(default)]
    pub occlusion: OcclusionModel,
    #[serde(default)]
    pub gains: Option<ControllerGains>,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_target_altitude")]
    pub target_altitude: f64,
    #[serde(default = "default_settle_time")]
    pub settle_time: f64,
    /// Altitude band for the settled flag (m).
    #[serde(default = "default_settle_band")]
    pub settle_band: f64,
    /// Full-scale attitude range of the error-rate metric (rad).
    #[serde(default = "default_full_scale")]
    pub full_scale: f64,
    #[serde(default = "default_telemetry_rate")]
    pub telemetry_rate_hz: f64,
    /// Horizontal ambient wind, inertial x/y (m/s).
    #[serde(default)]
    pub ambient_wind: [f64; 2],
    #[serde(default = "default_box_drag")]
    pub drag_coefficient: f64,
    #[serde(default)]
    pub lift_coefficient: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|source| ConfigError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The payload box before any coverage resizing.
    pub fn resolve_payload(&self) -> Result<PayloadSpec, ConfigError> {
        match &self.payload {
            PayloadChoice::Preset(name) => preset(name)
                .ok_or_else(|| ConfigError::invalid("payload", format!("unknown preset `{name}`")))?
                .build(&self.drone.resolve()?),
            PayloadChoice::Custom(p) => Ok(p.clone()),
        }
    }

    pub fn resolve(&self) -> Result<Scenario, ConfigError> {
        let drone = self.drone.resolve()?;
        let mut payload = self.resolve_payload()?;
        if let Some(c) = self.coverage {
            if !(0.0..=1.0).contains(&c) {
                return Err(ConfigError::invalid(
                    "coverage",
                    format!("must lie in [0, 1], got {c}"),
                ));
            }
            if !payload.is_present() && c > 0.0 {
                return Err(ConfigError::invalid(
                    "coverage",
                    "needs a payload mounted above or below",
                ));
            }
            let side = square_box_side_for_coverage(&drone, c)?;
            payload.box_x = side;
            payload.box_y = side;
        }
        payload.validate()?;
        if payload.mass > drone.max_load {
            return Err(ConfigError::invalid(
                "payload.mass",
                format!("{} g exceeds the {} g max load of `{}`", payload.mass, drone.max_load, drone.name),
            ));
        }
        self.occlusion
            .validate()
            .map_err(|e| ConfigError::invalid("occlusion", e.to_string()))?;
        self.noise
            .validate()
            .map_err(|e| ConfigError::invalid("noise", e))?;

        let positive = [
            ("duration", self.duration),
            ("target_altitude", self.target_altitude),
            ("full_scale", self.full_scale),
            ("telemetry_rate_hz", self.telemetry_rate_hz),
            ("settle_band", self.settle_band),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::invalid(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.settle_time.is_finite() && self.settle_time >= 0.0) {
            return Err(ConfigError::invalid("settle_time", "must be non-negative"));
        }
        if self.duration <= self.settle_time {
            return Err(ConfigError::invalid(
                "duration",
                format!(
                    "{} s must exceed the {} s settle time",
                    self.duration, self.settle_time
                ),
            ));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(ConfigError::invalid(
                "dt",
                format!("must lie in (0, {MAX_DT}], got {}", self.dt),
            ));
        }
        if 1.0 / self.telemetry_rate_hz < self.dt {
            return Err(ConfigError::invalid(
                "telemetry_rate_hz",
                "cannot log faster than the integration rate",
            ));
        }
        if self.ambient_wind.iter().any(|w| !w.is_finite()) {
            return Err(ConfigError::invalid("ambient_wind", "must be finite"));
        }
        for (field, v) in [
            ("drag_coefficient", self.drag_coefficient),
            ("lift_coefficient", self.lift_coefficient),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::invalid(field, "must be non-negative"));
            }
        }

        let layout = build_rotor_layout(&drone)?;
        let af = af_points(&layout);
        let rotor = RotorModel::calibrated(&drone)?;
        let coverage = layout_coverage(&layout, &payload)?;
        let mut eta = [1.0; 4];
        for (slot, &c) in eta.iter_mut().zip(&coverage.per_rotor) {
            *slot = occlusion_multiplier(&self.occlusion, payload.position, c)
                .map_err(|e| ConfigError::invalid("occlusion", e.to_string()))?;
        }
        let inertia = InertiaModel::from_specs(&drone, &payload)?;
        let gains = match self.gains {
            Some(g) => {
                g.validate().map_err(|e| ConfigError::invalid("gains", e))?;
                g
            }
            None => ControllerGains::for_airframe(&inertia),
        };
        let mut noise = self.noise;
        noise.seed = self.seed;
        Ok(Scenario {
            config: self.clone(),
            drone,
            payload,
            layout,
            af,
            rotor,
            coverage,
            eta,
            inertia,
            gains,
            noise,
        })
    }
}

/// A fully validated scenario ready to simulate.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ExperimentConfig,
    pub drone: DroneSpec,
    pub payload: PayloadSpec,
    pub layout: RotorLayout,
    pub af: AfPointLayout,
    pub rotor: RotorModel,
    pub coverage: Coverage,
    pub eta: [f64; 4],
    pub inertia: InertiaModel,
    pub gains: ControllerGains,
    pub noise: NoiseModel,
}
