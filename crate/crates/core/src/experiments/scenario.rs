//! Closed-loop hover scenario: the per-step geometry → aero → control →
//! dynamics → sensing loop.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::aero::{
    disturbance_torque, downwash_velocity, drag_force, lift_force, rotor_thrust, rotor_yaw_torque,
    wind_forces,
};
use crate::control::{mixer, AltitudeController, AttitudeController, Setpoint};
use crate::dynamics::{assemble_forces, step, VehicleState};
use crate::geometry::AfId;
use crate::sensing::{
    rpy_error_rate, sample_anemometer, sample_imu, sample_rangefinder, write_telemetry, ErrorRates,
    TelemetryRecord,
};
use crate::units::{self, GRAVITY};

use super::config::Scenario;
use super::{ExperimentError, ERROR_RATE_DEFINITION};

const DISTURBANCE_STREAM: u64 = 1;
const SENSOR_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub telemetry_path: Option<PathBuf>,
    pub error_rates: ErrorRates,
    pub mean_thrust_per_rotor: [f64; 4],
    pub mean_airflow: [f64; 8],
    pub throttle_mean: f64,
    /// Altitude held inside the settle band from `settling_time` to the end.
    pub settled: bool,
    pub settling_time: Option<f64>,
    pub final_altitude: f64,
    pub horizontal_drift: f64,
    pub diagnostic: Option<String>,
}

impl ScenarioResult {
    pub fn total_mean_thrust(&self) -> f64 {
        self.mean_thrust_per_rotor.iter().sum()
    }
}

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs the scenario in memory and returns its summary plus the telemetry log.
pub fn simulate_hover(scenario: &Scenario) -> (ScenarioResult, Vec<TelemetryRecord>) {
    let cfg = &scenario.config;
    let dt = cfg.dt;
    let steps = (cfg.duration / dt).round() as usize;
    let log_every = ((1.0 / cfg.telemetry_rate_hz) / dt).round().max(1.0) as usize;

    let setpoint = Setpoint::hover(cfg.target_altitude);
    let max_collective = 4.0 * scenario.rotor.max_thrust();
    let mut altitude_ctl = AltitudeController::new(&scenario.gains, max_collective);
    let mut attitude_ctl = AttitudeController::new(&scenario.gains);
    let mut disturbance_rng = rng_stream(cfg.seed, DISTURBANCE_STREAM);
    let mut sensor_rng = rng_stream(cfg.seed, SENSOR_STREAM);

    let weight = scenario.inertia.weight();
    let lever = scenario.layout.arm_length();
    let coverage = scenario.coverage.max;
    let position = scenario.payload.position;

    let frontal_area = {
        let airframe = units::mm(scenario.drone.footprint_y) * units::mm(scenario.drone.height);
        let parcel = if scenario.payload.is_present() {
            units::mm(scenario.payload.box_y) * units::mm(scenario.payload.box_z)
        } else {
            0.0
        };
        airframe + parcel
    };

    let mut state = VehicleState::default();
    let mut log = Vec::with_capacity(steps / log_every + 1);
    let mut diagnostic = None;

    for i in 0..steps {
        let collective = altitude_ctl.altitude_hold(&state, &setpoint, dt, weight);
        let command = attitude_ctl.update(&state, &setpoint, dt);
        let mix = mixer(collective, &command.torque, &scenario.rotor, &scenario.layout);

        let mut thrusts = [0.0; 4];
        let mut yaw_torques = [0.0; 4];
        for r in 0..4 {
            let rpm = mix.rpm_commands[r];
            thrusts[r] = rotor_thrust(&scenario.rotor, rpm, scenario.eta[r])
                .expect("multiplier validated at resolve time")
                .value;
            yaw_torques[r] =
                rotor_yaw_torque(&scenario.rotor, rpm, scenario.layout.rotors[r].spin).value;
        }

        let euler = state.euler();
        let relative_air = Vector3::new(
            cfg.ambient_wind[0] - state.velocity.x,
            cfg.ambient_wind[1] - state.velocity.y,
            0.0,
        );
        let airspeed = relative_air.norm();
        let rho = scenario.rotor.air_density;
        // thrust and gravity enter assemble_forces separately
        let wind = wind_forces(
            euler.pitch,
            euler.yaw,
            drag_force(cfg.drag_coefficient, frontal_area, rho, airspeed),
            lift_force(cfg.lift_coefficient, frontal_area, rho, airspeed),
            0.0,
            GRAVITY,
            0.0,
        );
        let disturbance = disturbance_torque(
            &scenario.config.occlusion,
            position,
            coverage,
            weight,
            lever,
            &mut disturbance_rng,
        );
        let sum = assemble_forces(
            &state,
            &thrusts,
            &yaw_torques,
            &wind,
            &scenario.inertia,
            &disturbance,
            &scenario.layout,
        );

        if i % log_every == 0 {
            let accel = sum.force / scenario.inertia.total_mass;
            let imu = sample_imu(&state, &accel, &scenario.noise, &mut sensor_rng);
            let airflow = downwash_velocity(
                &scenario.af,
                &mix.rpm_commands,
                &scenario.rotor,
                &scenario.config.occlusion,
                &scenario.payload,
                &scenario.coverage.per_rotor,
            )
            .expect("inputs validated at resolve time");
            let airflow = sample_anemometer(&airflow, &scenario.noise, &mut sensor_rng);
            let altitude_sensed = sample_rangefinder(&state, &scenario.noise, &mut sensor_rng);
            log.push(TelemetryRecord {
                time: state.time,
                position: [state.position.x, state.position.y, state.position.z],
                rpy_actual: imu.rpy,
                rpy_desired: setpoint.target_rpy,
                rpm: mix.rpm_commands,
                thrust: thrusts,
                airflow,
                altitude_sensed,
                throttle_fraction: mix.throttle_fraction,
            });
        }

        match step(&state, &sum, &scenario.inertia, dt) {
            Ok(mut next) => {
                // flat ground at z = 0
                if next.position.z < 0.0 {
                    next.position.z = 0.0;
                    next.velocity.z = next.velocity.z.max(0.0);
                }
                state = next;
            }
            Err(e) => {
                diagnostic = Some(e.to_string());
                break;
            }
        }
    }

    let result = summarize(scenario, &log, &state, diagnostic);
    (result, log)
}

fn summarize(
    scenario: &Scenario,
    log: &[TelemetryRecord],
    state: &VehicleState,
    diagnostic: Option<String>,
) -> ScenarioResult {
    let cfg = &scenario.config;
    let crashed = diagnostic.is_some();
    let error_rates = if crashed {
        None
    } else {
        rpy_error_rate(log, cfg.settle_time, [cfg.full_scale; 3]).ok()
    };
    let nan_rates = ErrorRates {
        roll_pct: f64::NAN,
        pitch_pct: f64::NAN,
        yaw_pct: f64::NAN,
    };

    let start = log.first().map(|r| r.time).unwrap_or(0.0) + cfg.settle_time;
    let window: Vec<&TelemetryRecord> = log.iter().filter(|r| r.time > start).collect();
    let n = window.len().max(1) as f64;
    let mut mean_thrust = [0.0; 4];
    let mut mean_airflow = [0.0; 8];
    let mut throttle = 0.0;
    for r in &window {
        for k in 0..4 {
            mean_thrust[k] += r.thrust[k] / n;
        }
        for k in 0..8 {
            mean_airflow[k] += r.airflow[k] / n;
        }
        throttle += r.throttle_fraction / n;
    }

    let band = cfg.settle_band;
    let target = cfg.target_altitude;
    let last_violation = log
        .iter()
        .rposition(|r| (r.position[2] - target).abs() >= band);
    let settling_time = match last_violation {
        None => log.first().map(|r| r.time),
        Some(idx) if idx + 1 < log.len() => Some(log[idx + 1].time),
        Some(_) => None,
    };
    let settled = !crashed && settling_time.is_some() && error_rates.is_some();

    ScenarioResult {
        telemetry_path: None,
        error_rates: error_rates.unwrap_or(nan_rates),
        mean_thrust_per_rotor: mean_thrust,
        mean_airflow,
        throttle_mean: throttle,
        settled,
        settling_time,
        final_altitude: state.position.z,
        horizontal_drift: state.position.xy().norm(),
        diagnostic,
    }
}

/// Key-value summary written next to the telemetry.
pub fn render_report(scenario: &Scenario, result: &ScenarioResult) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("drone", scenario.drone.name.clone());
    kv("payload_position", scenario.payload.position.to_string());
    kv("payload_mass_g", format!("{}", scenario.payload.mass));
    kv("payload_box_mm", format!(
        "{:.3} x {:.3} x {:.3}",
        scenario.payload.box_x, scenario.payload.box_y, scenario.payload.box_z
    ));
    kv("coverage_max", format!("{:.6}", scenario.coverage.max));
    kv("seed", scenario.config.seed.to_string());
    kv("duration_s", format!("{}", scenario.config.duration));
    kv("dt_s", format!("{}", scenario.config.dt));
    kv("target_altitude_m", format!("{}", scenario.config.target_altitude));
    kv("settle_time_s", format!("{}", scenario.config.settle_time));
    kv("error_rate_definition", ERROR_RATE_DEFINITION.to_string());
    kv("full_scale_rad", format!("{:.9}", scenario.config.full_scale));
    kv("roll_error_pct", format!("{:.6}", result.error_rates.roll_pct));
    kv("pitch_error_pct", format!("{:.6}", result.error_rates.pitch_pct));
    kv("yaw_error_pct", format!("{:.6}", result.error_rates.yaw_pct));
    kv("throttle_mean", format!("{:.6}", result.throttle_mean));
    for (i, t) in result.mean_thrust_per_rotor.iter().enumerate() {
        kv(&format!("mean_thrust_rotor{}_n", i + 1), format!("{t:.6}"));
    }
    kv("mean_total_thrust_gf", format!("{:.3}", units::newton_to_gf(result.total_mean_thrust())));
    for (id, v) in AfId::ALL.iter().zip(result.mean_airflow) {
        kv(&format!("mean_airflow_{id}_mps"), format!("{v:.6}"));
    }
    kv("settled", result.settled.to_string());
    kv(
        "settling_time_s",
        result
            .settling_time
            .map(|t| format!("{t:.3}"))
            .unwrap_or_else(|| "none".into()),
    );
    kv("final_altitude_m", format!("{:.6}", result.final_altitude));
    kv("horizontal_drift_m", format!("{:.6}", result.horizontal_drift));
    if let Some(d) = &result.diagnostic {
        kv("diagnostic", d.clone());
    }
    out
}

/// Runs the scenario and writes `telemetry.csv` and `report.txt` into the
/// configured output directory, if any.
pub fn run_hover_scenario(scenario: &Scenario) -> Result<ScenarioResult, ExperimentError> {
    let (mut result, log) = simulate_hover(scenario);
    if let Some(dir) = &scenario.config.output_dir {
        std::fs::create_dir_all(dir)?;
        let telemetry = dir.join("telemetry.csv");
        write_telemetry(&log, &telemetry)?;
        result.telemetry_path = Some(telemetry);
        write_text(&dir.join("report.txt"), &render_report(scenario, &result))?;
    }
    Ok(result)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), ExperimentError> {
    crate::sensing::telemetry_write_atomic(path, text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{default_parcel, ExperimentConfig, PayloadChoice};
    use crate::geometry::MountPosition;

    fn quick(position: MountPosition, coverage: f64) -> Scenario {
        let payload = if position == MountPosition::None {
            PayloadChoice::default()
        } else {
            PayloadChoice::Custom(default_parcel(position))
        };
        ExperimentConfig {
            payload,
            coverage: Some(coverage),
            duration: 12.0,
            ..Default::default()
        }
        .resolve()
        .unwrap()
    }

    #[test]
    fn bare_hover_settles() {
        let (r, log) = simulate_hover(&quick(MountPosition::None, 0.0));
        assert!(r.settled, "{r:?}");
        assert!((r.final_altitude - 2.5).abs() < 0.05);
        assert_eq!(r.error_rates.max(), 0.0);
        assert!(log.windows(2).all(|w| w[1].time > w[0].time));
    }

    #[test]
    fn same_seed_same_log() {
        let s = quick(MountPosition::Below, 0.4);
        assert_eq!(simulate_hover(&s).1, simulate_hover(&s).1);
    }

    #[test]
    fn different_seed_different_log() {
        let a = quick(MountPosition::Below, 0.4);
        let mut b = a.clone();
        b.config.seed = 1;
        assert_ne!(simulate_hover(&a).1, simulate_hover(&b).1);
    }

    #[test]
    fn report_names_metric_definition() {
        let s = quick(MountPosition::Above, 0.3);
        let (r, _) = simulate_hover(&s);
        let text = render_report(&s, &r);
        assert!(text.contains("error_rate_definition = "));
        assert!(text.contains("payload_position = above"));
    }
}
