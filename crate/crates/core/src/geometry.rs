//! Airframe and parcel geometry: footprints, rotor disk placement, parcel/disk
//! coverage, airflow sample points and the combined center of gravity.
//!
//! Specs are ingested in millimetres and grams; every value returned from this
//! module is SI.
//!
//! Rotor numbering follows the common X-frame convention used by flight
//! stacks (body frame x forward, y left, z up):
//!
//! ```text
//!        front
//!    3 (CW)   1 (CCW)
//!         \ /
//!          X
//!         / \
//!    2 (CCW)  4 (CW)
//! ```
//!
//! Rotors 1/2 and 3/4 are the diagonals, so the four adjacent pairs are
//! 1-3, 1-4, 2-3 and 2-4, which is where the between-rotor airflow points
//! AF13, AF14, AF23 and AF24 sit.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{self, INCH_TO_MM};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid configuration: `{field}` {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn config_err(field: &'static str, reason: impl Into<String>) -> GeometryError {
    GeometryError::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

/// Propeller diameter of the largest airframe (13 inch); smaller frames scale
/// it with their footprint.
pub const REFERENCE_PROP_DIAMETER_MM: f64 = 13.0 * INCH_TO_MM;
pub const REFERENCE_FOOTPRINT_MM: f64 = 675.0;

/// Default arm half-span as a fraction of half the footprint.
pub const DEFAULT_ARM_FRACTION: f64 = 0.8;

/// Physical configuration of a quadcopter, in ingestion units (mm, g, gf).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroneSpec {
    pub name: String,
    pub footprint_x: f64,
    pub footprint_y: f64,
    pub height: f64,
    /// Distance from body center to each rotor center (mm). Defaults to
    /// `0.8 * footprint_x / 2`.
    #[serde(default)]
    pub arm_half_span: Option<f64>,
    /// Propeller diameter (mm). Defaults to 13 inch scaled by footprint.
    #[serde(default)]
    pub prop_diameter: Option<f64>,
    pub dry_mass: f64,
    pub motor_kv: f64,
    pub rpm_max: f64,
    pub max_load: f64,
    /// Static thrust of one rotor at `rpm_max` (gf).
    pub max_thrust_per_rotor: f64,
    #[serde(default)]
    pub frame_material: String,
}

impl DroneSpec {
    /// 295 x 295 x 55 mm carbon frame, 1750 kV.
    pub fn small() -> Self {
        Self {
            name: "small".into(),
            footprint_x: 295.0,
            footprint_y: 295.0,
            height: 55.0,
            arm_half_span: None,
            prop_diameter: None,
            dry_mass: 700.0,
            motor_kv: 1750.0,
            rpm_max: 22_000.0,
            max_load: 1100.0,
            max_thrust_per_rotor: 1100.0,
            frame_material: "Carbon Fiber".into(),
        }
    }

    /// 450 x 450 x 55 mm polyamide-nylon frame, 930 kV.
    pub fn medium() -> Self {
        Self {
            name: "medium".into(),
            footprint_x: 450.0,
            footprint_y: 450.0,
            height: 55.0,
            arm_half_span: None,
            prop_diameter: None,
            dry_mass: 1300.0,
            motor_kv: 930.0,
            rpm_max: 11_500.0,
            max_load: 2280.0,
            max_thrust_per_rotor: 1500.0,
            frame_material: "Polyamide-Nylon".into(),
        }
    }

    /// 675 x 675 x 210 mm carbon frame, 400 kV, 13 inch propellers.
    pub fn big() -> Self {
        Self {
            name: "big".into(),
            footprint_x: 675.0,
            footprint_y: 675.0,
            height: 210.0,
            arm_half_span: None,
            prop_diameter: None,
            dry_mass: 2200.0,
            motor_kv: 400.0,
            rpm_max: 7500.0,
            max_load: 3200.0,
            max_thrust_per_rotor: 1980.0,
            frame_material: "Carbon Fiber".into(),
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "small" => Some(Self::small()),
            "medium" => Some(Self::medium()),
            "big" => Some(Self::big()),
            _ => None,
        }
    }

    pub fn builtins() -> [Self; 3] {
        [Self::small(), Self::medium(), Self::big()]
    }

    pub fn arm_half_span_mm(&self) -> f64 {
        self.arm_half_span
            .unwrap_or(DEFAULT_ARM_FRACTION * self.footprint_x / 2.0)
    }

    pub fn prop_diameter_mm(&self) -> f64 {
        self.prop_diameter.unwrap_or(
            REFERENCE_PROP_DIAMETER_MM * self.footprint_x / REFERENCE_FOOTPRINT_MM,
        )
    }

    pub fn dry_mass_kg(&self) -> f64 {
        units::grams(self.dry_mass)
    }

    pub fn max_load_kg(&self) -> f64 {
        units::grams(self.max_load)
    }

    /// Distance between the body center and a rotor axis along x and y (m).
    pub fn rotor_offset(&self) -> f64 {
        units::mm(self.arm_half_span_mm()) / SQRT_2
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let positive = [
            ("footprint_x", self.footprint_x),
            ("footprint_y", self.footprint_y),
            ("height", self.height),
            ("dry_mass", self.dry_mass),
            ("rpm_max", self.rpm_max),
            ("max_load", self.max_load),
            ("max_thrust_per_rotor", self.max_thrust_per_rotor),
            ("prop_diameter", self.prop_diameter_mm()),
            ("arm_half_span", self.arm_half_span_mm()),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(config_err(field, format!("must be positive, got {value}")));
            }
        }
        if !(self.motor_kv.is_finite() && self.motor_kv >= 0.0) {
            return Err(config_err("motor_kv", "must be non-negative"));
        }
        let diameter = self.prop_diameter_mm();
        if diameter >= self.footprint_x || diameter >= self.footprint_y {
            return Err(config_err(
                "prop_diameter",
                format!("{diameter} mm does not fit inside the footprint"),
            ));
        }
        // Adjacent disks must not overlap, which also keeps the between-rotor
        // sample points outside every disk.
        let offset_mm = self.arm_half_span_mm() / SQRT_2;
        if offset_mm <= diameter / 2.0 {
            return Err(config_err(
                "arm_half_span",
                format!(
                    "{} mm is too short for {diameter} mm propellers (adjacent disks overlap)",
                    self.arm_half_span_mm()
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MountPosition {
    Above,
    Below,
    #[default]
    None,
}

impl MountPosition {
    pub fn as_str(&self) -> &'static str {
        match self {
            MountPosition::Above => "above",
            MountPosition::Below => "below",
            MountPosition::None => "none",
        }
    }
}

impl fmt::Display for MountPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MountPosition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "above" => Ok(MountPosition::Above),
            "below" => Ok(MountPosition::Below),
            "none" => Ok(MountPosition::None),
            other => Err(format!("unknown payload position `{other}`")),
        }
    }
}

/// A parcel, always mounted laterally centered on the airframe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayloadSpec {
    pub box_x: f64,
    pub box_y: f64,
    pub box_z: f64,
    pub mass: f64,
    pub position: MountPosition,
    /// Gap between the box face and the propeller plane (mm).
    #[serde(default)]
    pub vertical_offset: f64,
}

impl Default for PayloadSpec {
    fn default() -> Self {
        Self::none()
    }
}

impl PayloadSpec {
    pub fn none() -> Self {
        Self {
            box_x: 0.0,
            box_y: 0.0,
            box_z: 0.0,
            mass: 0.0,
            position: MountPosition::None,
            vertical_offset: 0.0,
        }
    }

    pub fn is_present(&self) -> bool {
        self.position != MountPosition::None
    }

    pub fn mass_kg(&self) -> f64 {
        units::grams(self.mass)
    }

    /// Footprint rectangle in the body frame (m).
    pub fn footprint(&self) -> Rect {
        let hx = units::mm(self.box_x) / 2.0;
        let hy = units::mm(self.box_y) / 2.0;
        Rect::new(-hx, -hy, hx, hy)
    }

    /// Height of the box center above (+) or below (-) the propeller plane (m).
    pub fn center_height(&self) -> f64 {
        let distance = units::mm(self.vertical_offset + self.box_z / 2.0);
        match self.position {
            MountPosition::Above => distance,
            MountPosition::Below => -distance,
            MountPosition::None => 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        for (field, value) in [
            ("box_x", self.box_x),
            ("box_y", self.box_y),
            ("box_z", self.box_z),
            ("mass", self.mass),
            ("vertical_offset", self.vertical_offset),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(config_err(field, format!("must be non-negative, got {value}")));
            }
        }
        if self.position == MountPosition::None && self.mass != 0.0 {
            return Err(config_err("mass", "must be 0 when position is none"));
        }
        Ok(())
    }
}

/// Axis-aligned rectangle in the body plane (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min_x: min_x.min(max_x),
            min_y: min_y.min(max_y),
            max_x: max_x.max(min_x),
            max_y: max_y.max(min_y),
        }
    }

    pub fn contains(&self, p: Vector2<f64>) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.min_x + dx, self.min_y + dy, self.max_x + dx, self.max_y + dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    #[serde(rename = "CW")]
    Cw,
    #[serde(rename = "CCW")]
    Ccw,
}

impl Spin {
    /// Sign of the reaction torque the rotor applies to the airframe about +z.
    /// A clockwise rotor (seen from above) pushes the frame counterclockwise.
    pub fn reaction_sign(&self) -> f64 {
        match self {
            Spin::Cw => 1.0,
            Spin::Ccw => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotor {
    pub center: Vector2<f64>,
    pub spin: Spin,
    pub disk_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotorLayout {
    pub rotors: [Rotor; 4],
}

impl RotorLayout {
    /// Index of the rotor sharing a diagonal with `index`.
    pub fn diagonal_partner(index: usize) -> usize {
        [1, 0, 3, 2][index]
    }

    pub fn disk_radius(&self) -> f64 {
        self.rotors[0].disk_radius
    }

    pub fn arm_length(&self) -> f64 {
        self.rotors[0].center.norm()
    }

    /// Rotor whose center is the mirror image of `index` after a 90° turn
    /// of the airframe about +z.
    pub fn rotated_index(&self, index: usize) -> usize {
        let c = self.rotors[index].center;
        let turned = Vector2::new(-c.y, c.x);
        (0..4)
            .min_by(|&a, &b| {
                let da = (self.rotors[a].center - turned).norm();
                let db = (self.rotors[b].center - turned).norm();
                da.total_cmp(&db)
            })
            .unwrap()
    }
}

pub fn build_rotor_layout(spec: &DroneSpec) -> Result<RotorLayout, GeometryError> {
    spec.validate()?;
    let a = spec.rotor_offset();
    let radius = units::mm(spec.prop_diameter_mm()) / 2.0;
    let rotor = |x: f64, y: f64, spin: Spin| Rotor {
        center: Vector2::new(x, y),
        spin,
        disk_radius: radius,
    };
    Ok(RotorLayout {
        rotors: [
            rotor(a, -a, Spin::Ccw),
            rotor(-a, a, Spin::Ccw),
            rotor(a, a, Spin::Cw),
            rotor(-a, -a, Spin::Cw),
        ],
    })
}

/// Antiderivative of `sqrt(r² - t²) - h`.
fn chord_integral(t: f64, h: f64, r: f64) -> f64 {
    let s = (r * r - t * t).max(0.0).sqrt();
    0.5 * (t * s + r * r * (t / r).clamp(-1.0, 1.0).asin()) - h * t
}

/// Area of the origin-centered circle inside the strip `x0 <= x <= x1`,
/// `y >= h`, for `h >= 0`: a circular segment cut by the chord at `h` and the
/// strip walls.
fn area_above(x0: f64, x1: f64, h: f64, r: f64) -> f64 {
    if h >= r {
        return 0.0;
    }
    let s = (r * r - h * h).sqrt();
    let lo = x0.clamp(-s, s);
    let hi = x1.clamp(-s, s);
    chord_integral(hi, h, r) - chord_integral(lo, h, r)
}

/// Area of the origin-centered circle inside the rectangle.
fn circle_rect_area(x0: f64, x1: f64, y0: f64, y1: f64, r: f64) -> f64 {
    if y0 >= 0.0 {
        area_above(x0, x1, y0, r) - area_above(x0, x1, y1, r)
    } else if y1 <= 0.0 {
        // mirror into the upper half
        area_above(x0, x1, -y1, r) - area_above(x0, x1, -y0, r)
    } else {
        let upper = area_above(x0, x1, 0.0, r) - area_above(x0, x1, y1, r);
        let lower = area_above(x0, x1, 0.0, r) - area_above(x0, x1, -y0, r);
        upper + lower
    }
}

/// Fraction of a disk's area covered by an axis-aligned rectangle.
pub fn disk_box_coverage(
    disk_center: Vector2<f64>,
    disk_radius: f64,
    rect: &Rect,
) -> Result<f64, GeometryError> {
    if !(disk_radius.is_finite() && disk_radius > 0.0) {
        return Err(GeometryError::InvalidArgument(format!(
            "disk radius must be positive, got {disk_radius}"
        )));
    }
    let local = rect.translate(-disk_center.x, -disk_center.y);
    if local.max_x <= local.min_x || local.max_y <= local.min_y {
        return Ok(0.0);
    }
    let area = circle_rect_area(local.min_x, local.max_x, local.min_y, local.max_y, disk_radius);
    Ok((area / (PI * disk_radius * disk_radius)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coverage {
    pub per_rotor: [f64; 4],
    pub max: f64,
}

impl Coverage {
    pub const ZERO: Coverage = Coverage {
        per_rotor: [0.0; 4],
        max: 0.0,
    };
}

pub fn payload_coverage(
    spec: &DroneSpec,
    payload: &PayloadSpec,
) -> Result<Coverage, GeometryError> {
    let layout = build_rotor_layout(spec)?;
    layout_coverage(&layout, payload)
}

pub fn layout_coverage(
    layout: &RotorLayout,
    payload: &PayloadSpec,
) -> Result<Coverage, GeometryError> {
    if !payload.is_present() {
        return Ok(Coverage::ZERO);
    }
    let rect = payload.footprint();
    let mut per_rotor = [0.0; 4];
    for (slot, rotor) in per_rotor.iter_mut().zip(&layout.rotors) {
        *slot = disk_box_coverage(rotor.center, rotor.disk_radius, &rect)?;
    }
    let max = per_rotor.iter().copied().fold(0.0, f64::max);
    Ok(Coverage { per_rotor, max })
}

/// Side length (mm) of a centered square box whose largest per-rotor coverage
/// equals `target`.
pub fn square_box_side_for_coverage(
    spec: &DroneSpec,
    target: f64,
) -> Result<f64, GeometryError> {
    if !(0.0..=1.0).contains(&target) {
        return Err(GeometryError::InvalidArgument(format!(
            "coverage must lie in [0, 1], got {target}"
        )));
    }
    let layout = build_rotor_layout(spec)?;
    let rotor = layout.rotors[0];
    let coverage_at = |side_mm: f64| -> Result<f64, GeometryError> {
        let h = units::mm(side_mm) / 2.0;
        disk_box_coverage(rotor.center, rotor.disk_radius, &Rect::new(-h, -h, h, h))
    };
    let a_mm = spec.rotor_offset() / units::MM_TO_M;
    let r_mm = spec.prop_diameter_mm() / 2.0;
    // coverage is zero up to the inner disk edge and one past the outer edge
    let mut lo = 2.0 * (a_mm - r_mm);
    let mut hi = 2.0 * (a_mm + r_mm);
    if target <= 0.0 {
        return Ok(0.0);
    }
    if target >= 1.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if coverage_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AfId {
    AF1,
    AF2,
    AF3,
    AF4,
    AF13,
    AF14,
    AF23,
    AF24,
}

impl AfId {
    pub const ALL: [AfId; 8] = [
        AfId::AF1,
        AfId::AF2,
        AfId::AF3,
        AfId::AF4,
        AfId::AF13,
        AfId::AF14,
        AfId::AF23,
        AfId::AF24,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            AfId::AF1 => "AF1",
            AfId::AF2 => "AF2",
            AfId::AF3 => "AF3",
            AfId::AF4 => "AF4",
            AfId::AF13 => "AF13",
            AfId::AF14 => "AF14",
            AfId::AF23 => "AF23",
            AfId::AF24 => "AF24",
        }
    }

    /// Rotor indices (0-based) this point samples. Under-disk points name a
    /// single rotor twice.
    pub fn rotors(&self) -> (usize, usize) {
        match self {
            AfId::AF1 => (0, 0),
            AfId::AF2 => (1, 1),
            AfId::AF3 => (2, 2),
            AfId::AF4 => (3, 3),
            AfId::AF13 => (0, 2),
            AfId::AF14 => (0, 3),
            AfId::AF23 => (1, 2),
            AfId::AF24 => (1, 3),
        }
    }

    pub fn is_under_disk(&self) -> bool {
        let (a, b) = self.rotors();
        a == b
    }
}

impl fmt::Display for AfId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfPoint {
    pub id: AfId,
    pub location: Vector2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AfPointLayout {
    pub points: [AfPoint; 8],
}

pub fn af_points(layout: &RotorLayout) -> AfPointLayout {
    let points = AfId::ALL.map(|id| {
        let (a, b) = id.rotors();
        let location = (layout.rotors[a].center + layout.rotors[b].center) / 2.0;
        AfPoint { id, location }
    });
    AfPointLayout { points }
}

/// Center of gravity of airframe plus parcel, relative to the geometric
/// center (m, body frame).
pub fn combined_cg(spec: &DroneSpec, payload: &PayloadSpec) -> Result<Vector3<f64>, GeometryError> {
    let frame = spec.dry_mass_kg();
    let parcel = payload.mass_kg();
    if frame < 0.0 || parcel < 0.0 {
        return Err(GeometryError::InvalidArgument("masses must be non-negative".into()));
    }
    let total = frame + parcel;
    if total <= 0.0 {
        return Err(GeometryError::InvalidArgument("total mass is zero".into()));
    }
    let z = parcel * payload.center_height() / total;
    Ok(Vector3::new(0.0, 0.0, z))
}
