//! Airflow survey, static thrust sweep and coverage sweep.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::aero::{downwash_velocity, rotor_thrust, AirflowSamples};
use crate::geometry::{AfId, DroneSpec, MountPosition, PayloadSpec};
use crate::sensing::ErrorRates;
use crate::units;

use super::config::{default_parcel, ConfigError, ExperimentConfig, PayloadChoice, PAYLOAD_PRESETS};
use super::scenario::{simulate_hover, write_text};
use super::ExperimentError;

/// Default pass threshold of the coverage sweep (% error, any axis).
pub const DEFAULT_ERROR_THRESHOLD: f64 = 1.0;

/// Shortest round-trip float text, `-0` folded into `0`.
pub(crate) fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

fn af_header() -> String {
    AfId::ALL.iter().map(|a| a.label()).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AirflowVariant {
    pub name: String,
    pub position: MountPosition,
    pub coverage: f64,
    pub mean_airflow: AirflowSamples,
    pub settled: bool,
}

impl AirflowVariant {
    /// Mean of the four under-disk points.
    pub fn mean_rotor_airflow(&self) -> f64 {
        self.mean_airflow[..4].iter().sum::<f64>() / 4.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AirflowSurvey {
    pub baseline: AirflowVariant,
    pub variants: Vec<AirflowVariant>,
}

impl AirflowSurvey {
    /// Relative change of the mean AF1-AF4 reading against the baseline.
    pub fn relative_change(&self, variant: &AirflowVariant) -> f64 {
        variant.mean_rotor_airflow() / self.baseline.mean_rotor_airflow() - 1.0
    }

    /// Radar data: `variant,AF1,...,AF24`, baseline first.
    pub fn to_csv(&self) -> String {
        let mut out = format!("variant,{}\n", af_header());
        for v in std::iter::once(&self.baseline).chain(&self.variants) {
            let values: Vec<String> = v.mean_airflow.iter().map(|&x| num(x)).collect();
            let _ = writeln!(out, "{},{}", v.name, values.join(","));
        }
        out
    }
}

/// Payload variants surveyed when none is named: the configured payload if
/// there is one, otherwise every preset.
pub fn default_airflow_variants(config: &ExperimentConfig) -> Vec<(String, PayloadChoice)> {
    match &config.payload {
        PayloadChoice::Custom(p) if !p.is_present() => PAYLOAD_PRESETS
            .iter()
            .map(|p| (p.name.to_string(), PayloadChoice::Preset(p.name.into())))
            .collect(),
        PayloadChoice::Preset(name) => vec![(name.clone(), config.payload.clone())],
        PayloadChoice::Custom(p) => vec![(format!("custom-{}", p.position), config.payload.clone())],
    }
}

/// Hovers the baseline (no payload) and each variant, averaging anemometer
/// readings after the settle window. Variants run in parallel and are
/// reported in input order.
pub fn run_airflow_survey(
    config: &ExperimentConfig,
    variants: &[(String, PayloadChoice)],
) -> Result<AirflowSurvey, ExperimentError> {
    let baseline_cfg = ExperimentConfig {
        payload: PayloadChoice::default(),
        coverage: None,
        output_dir: None,
        ..config.clone()
    };
    let mut jobs = vec![("baseline".to_string(), baseline_cfg)];
    for (name, payload) in variants {
        let coverage = match payload {
            // presets carry their own coverage
            PayloadChoice::Preset(_) => None,
            PayloadChoice::Custom(_) => config.coverage,
        };
        jobs.push((
            name.clone(),
            ExperimentConfig {
                payload: payload.clone(),
                coverage,
                output_dir: None,
                ..config.clone()
            },
        ));
    }
    let scenarios = jobs
        .iter()
        .map(|(name, cfg)| cfg.resolve().map(|s| (name.clone(), s)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut results: Vec<AirflowVariant> = scenarios
        .par_iter()
        .map(|(name, s)| {
            let (r, _) = simulate_hover(s);
            AirflowVariant {
                name: name.clone(),
                position: s.payload.position,
                coverage: s.coverage.max,
                mean_airflow: r.mean_airflow,
                settled: r.settled,
            }
        })
        .collect();
    let baseline = results.remove(0);
    Ok(AirflowSurvey {
        baseline,
        variants: results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThrustRow {
    pub drone: String,
    pub rpm_fraction: f64,
    pub rpm: f64,
    /// Per-rotor thrust after occlusion (N).
    pub thrust: [f64; 4],
    pub total_thrust_gf: f64,
    pub airflow: AirflowSamples,
    /// Sum of the eight airflow samples (m/s).
    pub total_airflow: f64,
}

/// Default sweep grid as fractions of each airframe's `rpm_max`.
pub fn default_rpm_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

fn payload_for(config: &ExperimentConfig, drone: &DroneSpec) -> Result<PayloadSpec, ConfigError> {
    let cfg = ExperimentConfig {
        drone: super::config::DroneChoice::Custom(drone.clone()),
        ..config.clone()
    };
    let mut payload = cfg.resolve_payload()?;
    if let Some(c) = cfg.coverage {
        if !(0.0..=1.0).contains(&c) {
            return Err(ConfigError::invalid("coverage", format!("must lie in [0, 1], got {c}")));
        }
        let side = crate::geometry::square_box_side_for_coverage(drone, c)?;
        payload.box_x = side;
        payload.box_y = side;
    }
    payload.validate()?;
    Ok(payload)
}

/// Static thrust and airflow across an rpm grid, given as fractions of each
/// built-in airframe's `rpm_max`, with the configured payload fitted to each.
pub fn run_thrust_sweep(
    config: &ExperimentConfig,
    rpm_grid: &[f64],
) -> Result<Vec<ThrustRow>, ExperimentError> {
    if rpm_grid.is_empty() {
        return Err(ConfigError::invalid("rpm_grid", "must not be empty").into());
    }
    if let Some(bad) = rpm_grid.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(ConfigError::invalid(
            "rpm_grid",
            format!("fractions of rpm_max must lie in [0, 1], got {bad}"),
        )
        .into());
    }
    let mut rows = Vec::new();
    for drone in DroneSpec::builtins() {
        let payload = payload_for(config, &drone)?;
        let cfg = ExperimentConfig {
            drone: super::config::DroneChoice::Custom(drone.clone()),
            payload: PayloadChoice::Custom(payload.clone()),
            coverage: None,
            ..config.clone()
        };
        let scenario = cfg.resolve()?;
        for &fraction in rpm_grid {
            let rpm = fraction * drone.rpm_max;
            let rpms = [rpm; 4];
            let mut thrust = [0.0; 4];
            for r in 0..4 {
                thrust[r] = rotor_thrust(&scenario.rotor, rpm, scenario.eta[r])
                    .expect("multiplier validated")
                    .value;
            }
            let airflow = downwash_velocity(
                &scenario.af,
                &rpms,
                &scenario.rotor,
                &scenario.config.occlusion,
                &scenario.payload,
                &scenario.coverage.per_rotor,
            )
            .expect("inputs validated");
            rows.push(ThrustRow {
                drone: drone.name.clone(),
                rpm_fraction: fraction,
                rpm,
                thrust,
                total_thrust_gf: units::newton_to_gf(thrust.iter().sum()),
                airflow,
                total_airflow: airflow.iter().sum(),
            });
        }
    }
    Ok(rows)
}

pub fn thrust_table_csv(rows: &[ThrustRow]) -> String {
    let mut out = format!(
        "drone,rpm_fraction,rpm,thrust1,thrust2,thrust3,thrust4,total_thrust_gf,{},total_airflow\n",
        af_header()
    );
    for r in rows {
        let mut fields = vec![r.drone.clone(), num(r.rpm_fraction), num(r.rpm)];
        fields.extend(r.thrust.iter().map(|&t| num(t)));
        fields.push(num(r.total_thrust_gf));
        fields.extend(r.airflow.iter().map(|&a| num(a)));
        fields.push(num(r.total_airflow));
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

/// Line-plot data `series,x,y`: total thrust (gf) against rpm, and against
/// the mean AF1-AF4 airflow.
pub fn thrust_line_data(rows: &[ThrustRow]) -> (String, String) {
    let mut by_rpm = String::from("series,x,y\n");
    let mut by_airflow = String::from("series,x,y\n");
    for r in rows {
        let _ = writeln!(by_rpm, "{},{},{}", r.drone, num(r.rpm), num(r.total_thrust_gf));
        let mean_af = r.airflow[..4].iter().sum::<f64>() / 4.0;
        let _ = writeln!(by_airflow, "{},{},{}", r.drone, num(mean_af), num(r.total_thrust_gf));
    }
    (by_rpm, by_airflow)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    pub coverage: f64,
    pub position: MountPosition,
    pub error_rates: ErrorRates,
    /// `1 - eta` of the most covered rotor.
    pub thrust_loss: f64,
    pub settled: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageSweep {
    pub threshold: f64,
    pub rows: Vec<CoverageRow>,
    /// Largest grid coverage up to which every Above run passes.
    pub max_passing_above: Option<f64>,
    pub max_passing_below: Option<f64>,
}

impl CoverageSweep {
    pub fn row(&self, position: MountPosition, coverage: f64) -> Option<&CoverageRow> {
        self.rows
            .iter()
            .find(|r| r.position == position && r.coverage == coverage)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "coverage,position,roll_error_pct,pitch_error_pct,yaw_error_pct,thrust_loss,settled,passed\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                num(r.coverage),
                r.position,
                num(r.error_rates.roll_pct),
                num(r.error_rates.pitch_pct),
                num(r.error_rates.yaw_pct),
                num(r.thrust_loss),
                r.settled,
                r.passed
            );
        }
        out
    }

    /// Recomputes pass flags and maxima for another threshold.
    pub fn with_threshold(&self, threshold: f64) -> Self {
        let rows: Vec<CoverageRow> = self
            .rows
            .iter()
            .map(|r| CoverageRow {
                passed: passes(r.settled, &r.error_rates, threshold),
                ..r.clone()
            })
            .collect();
        Self {
            threshold,
            max_passing_above: max_passing(&rows, MountPosition::Above),
            max_passing_below: max_passing(&rows, MountPosition::Below),
            rows,
        }
    }
}

fn passes(settled: bool, rates: &ErrorRates, threshold: f64) -> bool {
    settled && rates.max() < threshold
}

fn max_passing(rows: &[CoverageRow], position: MountPosition) -> Option<f64> {
    let mut best = None;
    for r in rows.iter().filter(|r| r.position == position) {
        if !r.passed {
            break;
        }
        best = Some(r.coverage);
    }
    best
}

pub fn default_coverage_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// Hovers the configured parcel (or the default 200 g parcel) mounted above
/// and below at every coverage of the grid.
pub fn run_coverage_sweep(
    config: &ExperimentConfig,
    coverage_grid: &[f64],
    threshold: f64,
) -> Result<CoverageSweep, ExperimentError> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(ConfigError::invalid("threshold", "must be positive").into());
    }
    if coverage_grid.is_empty() {
        return Err(ConfigError::invalid("coverage_grid", "must not be empty").into());
    }
    let mut grid = coverage_grid.to_vec();
    if let Some(bad) = grid.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(ConfigError::invalid("coverage_grid", format!("must lie in [0, 1], got {bad}")).into());
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let drone = config.drone.resolve()?;
    let base = match &config.payload {
        PayloadChoice::Custom(p) if !p.is_present() => default_parcel(MountPosition::Above),
        _ => payload_for(config, &drone)?,
    };
    let mut scenarios = Vec::new();
    for position in [MountPosition::Above, MountPosition::Below] {
        for &c in &grid {
            let cfg = ExperimentConfig {
                payload: PayloadChoice::Custom(PayloadSpec {
                    position,
                    ..base.clone()
                }),
                coverage: Some(c),
                output_dir: None,
                ..config.clone()
            };
            scenarios.push((c, position, cfg.resolve()?));
        }
    }
    let rows: Vec<CoverageRow> = scenarios
        .par_iter()
        .map(|(c, position, s)| {
            let (r, _) = simulate_hover(s);
            let eta_min = s.eta.iter().copied().fold(1.0, f64::min);
            CoverageRow {
                coverage: *c,
                position: *position,
                error_rates: r.error_rates,
                thrust_loss: 1.0 - eta_min,
                settled: r.settled,
                passed: passes(r.settled, &r.error_rates, threshold),
            }
        })
        .collect();
    Ok(CoverageSweep {
        threshold,
        max_passing_above: max_passing(&rows, MountPosition::Above),
        max_passing_below: max_passing(&rows, MountPosition::Below),
        rows,
    })
}

pub(crate) fn write_artifact(dir: &Path, name: &str, text: &str) -> Result<(), ExperimentError> {
    std::fs::create_dir_all(dir)?;
    write_text(&dir.join(name), text)
}
