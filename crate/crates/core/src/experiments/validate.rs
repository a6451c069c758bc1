//! Runtime self-check behind the `validate` subcommand: hand-derived oracles
//! plus randomized invariant checks on a fixed seed.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::aero::{
    drag_coefficient, drag_force, lift_coefficient, lift_force, occlusion_multiplier, rotor_thrust,
    wind_forces, OcclusionModel, RotorModel,
};
use crate::control::mix_thrusts;
use crate::dynamics::{assemble_forces, quaternion_from_euler, step, InertiaModel, VehicleState};
use crate::geometry::{build_rotor_layout, disk_box_coverage, DroneSpec, MountPosition, PayloadSpec, Rect};
use crate::sensing::{read_telemetry_from, rpy_error_rate, write_telemetry_to, TelemetryRecord};
use crate::units::GRAVITY;

use super::config::{default_parcel, ExperimentConfig, PayloadChoice};
use super::scenario::simulate_hover;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub cases: usize,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

type Check = fn(&mut ChaCha8Rng, usize) -> Result<String, String>;

const CHECKS: [(&str, Check); 11] = [
    ("wind_forces_hand_cases", wind_hand_cases),
    ("coefficient_round_trip", coefficient_round_trip),
    ("coverage_monte_carlo", coverage_monte_carlo),
    ("coverage_monotone_in_box", coverage_monotone),
    ("thrust_monotone_in_rpm", thrust_monotone),
    ("occlusion_continuity", occlusion_continuity),
    ("mixer_round_trip", mixer_round_trip),
    ("quaternion_norm", quaternion_norm),
    ("telemetry_round_trip", telemetry_round_trip),
    ("error_rate_time_translation", error_rate_translation),
    ("hover_settles", hover_settles),
];

/// Runs every check with `cases` random inputs each (where applicable).
pub fn run_validation(cases: usize, seed: u64) -> ValidationReport {
    let checks = CHECKS
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (passed, detail) = match check(&mut rng, cases) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome { name, passed, detail }
        })
        .collect();
    ValidationReport { cases, checks }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

fn wind_hand_cases(_: &mut ChaCha8Rng, _: usize) -> Result<String, String> {
    let (fd, fl, m, g, t) = (3.0, 2.0, 1.5, GRAVITY, 20.0);
    let w = fl - m * g;
    let cases = [
        (0.0, 0.0, [-fd, w + t, 0.0]),
        (0.0, FRAC_PI_2, [-fd * FRAC_PI_2.cos(), w + t, -fd]),
        (
            FRAC_PI_6,
            0.0,
            [
                -fd * FRAC_PI_6.cos() - w * FRAC_PI_6.sin(),
                -fd * FRAC_PI_6.sin() + w * FRAC_PI_6.cos() + t,
                0.0,
            ],
        ),
    ];
    for (theta, psi, expect) in cases {
        let f = wind_forces(theta, psi, fd, fl, m, g, t);
        let got = [f.f_pitch, f.f_roll, f.f_yaw];
        for k in 0..3 {
            let ok = if expect[k] == 0.0 {
                got[k].abs() < 1e-12
            } else {
                close(got[k], expect[k], 1e-12)
            };
            if !ok {
                return Err(format!("theta {theta} psi {psi}: {got:?} vs {expect:?}"));
            }
        }
    }
    Ok("3 cases".into())
}

fn coefficient_round_trip(rng: &mut ChaCha8Rng, cases: usize) -> Result<String, String> {
    for _ in 0..cases {
        let c = rng.random_range(0.01..3.0);
        let a = rng.random_range(0.001..2.0);
        let rho = rng.random_range(0.5..1.5);
        let v = rng.random_range(0.1..40.0);
        let cd = drag_coefficient(drag_force(c, a, rho, v), a, rho, v).map_err(|e| e.to_string())?;
        let cl = lift_coefficient(lift_force(c, a, rho, v), a, rho, v).map_err(|e| e.to_string())?;
        if !close(cd, c, 1e-12) || !close(cl, c, 1e-12) {
            return Err(format!("C {c} came back as {cd}/{cl}"));
        }
    }
    Ok(format!("{cases} cases"))
}

fn random_rect(rng: &mut ChaCha8Rng) -> Rect {
    let x0 = rng.random_range(-0.4..0.3);
    let y0 = rng.random_range(-0.4..0.3);
    Rect::new(x0, y0, x0 + rng.random_range(0.01..0.5), y0 + rng.random_range(0.01..0.5))
}

fn coverage_monte_carlo(rng: &mut ChaCha8Rng, cases: usize) -> Result<String, String> {
    let configs = (cases / 100).clamp(1, 20);
    let samples = 200_000;
    let mut worst: f64 = 0.0;
    for _ in 0..configs {
        let center = Vector2::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
        let r = rng.random_range(0.02..0.25);
        let rect = random_rect(rng);
        let exact = disk_box_coverage(center, r, &rect).map_err(|e| e.to_string())?;
        let mut hits = 0usize;
        let mut n = 0usize;
        while n < samples {
            let p = Vector2::new(rng.random_range(-r..r), rng.random_range(-r..r));
            if p.norm_squared() > r * r {
                continue;
            }
            n += 1;
            if rect.contains(center + p) {
                hits += 1;
            }
        }
        let estimate = hits as f64 / samples as f64;
        worst = worst.max((estimate - exact).abs());
    }
    // 200k samples: standard error <= 1.2e-3
    if worst > 5e-3 {
        return Err(format!("worst deviation {worst:.2e}"));
    }
    Ok(format!("{configs} configs, worst deviation {worst:.2e}"))
}

fn coverage_monotone(rng: &mut ChaCha8Rng, cases: usize) -> Result<String, String> {
    for _ in 0..cases {
        let center = Vector2::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
        let r = rng.random_range(0.02..0.25);
        let small = random_rect(rng);
        let grow = rng.random_range(0.0..0.2);
        let big = Rect::new(small.min_x - grow, small.min_y, small.max_x, small.max_y + grow);
        let a = disk_box_coverage(center, r, &small).map_err(|e| e.to_string())?;
        let b = disk_box_coverage(center, r, &big).map_err(|e| e.to_string())?;
        if !(0.0..=1.0).contains(&a) || b + 1e-12 < a {
            return Err(format!("coverage {a} grew to {b}"));
        }
    }
    Ok(format!("{cases} cases"))
}

fn thrust_monotone(rng: &mut ChaCha8Rng, cases: usize) -> Result<String, String> {
    let models: Vec<RotorModel> = DroneSpec::builtins()
        .iter()
        .map(RotorModel::calibrated)
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for _ in 0..cases {
        let m = &models[rng.random_range(0..models.len())];
        let a = rng.random_range(0.0..m.rpm_max);
        let b = rng.random_range(a..=m.rpm_max);
        let eta = rng.random_range(0.01..=1.0);
        let ta = rotor_thrust(m, a, eta).map_err(|e| e.to_string())?.value;
        let tb = rotor_thrust(m, b, eta).map_err(|e| e.to_string())?.value;
        if tb < ta || ta < 0.0 {
            return Err(format!("thrust({a}) = {ta} > thrust({b}) = {tb}"));
        }
    }
    Ok(format!("{cases} cases"))
}

fn occlusion_continuity(rng: &mut ChaCha8Rng, cases: usize) -> Result<String, String> {
    let model = OcclusionModel::default();
    for _ in 0..cases {
        let c = rng.random_range(0.0..0.999);
        for pos in [MountPosition::Below, MountPosition::Above] {
            let a = occlusion_multiplier(&model, pos, c).map_err(|e| e.to_string())?;
            let b = occlusion_multiplier(&model, pos, c + 1e-6).map_err(|e| e.to_string())?;
            if (a - b).abs() > 1e-5 || b > a || !(a > 0.0 && a <= 1.0) {
                return Err(format!("{pos} at {c}: {a} -> {b}"));
            }
        }
    }
    Ok(format!("{cases} cases"))
}

fn mixer_round_trip(rng: &mut ChaCha8Rng, cases: usize) -> Result<String, String> {
    let spec = DroneSpec::big();
    let layout = build_rotor_layout(&spec).map_err(|e| e.to_string())?;
    let model = RotorModel::calibrated(&spec).map_err(|e| e.to_string())?;
    let inertia = InertiaModel::from_specs(&spec, &PayloadSpec::none()).map_err(|e| e.to_string())?;
    for _ in 0..cases {
        let collective = rng.random_range(5.0..60.0);
        let torque = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-0.2..0.2),
        );
        let thrusts = mix_thrusts(collective, &torque, &model, &layout);
        let yaw: [f64; 4] = std::array::from_fn(|i| {
            layout.rotors[i].spin.reaction_sign() * model.torque_coeff / model.thrust_coeff
                * model.diameter
                * thrusts[i]
        });
        let sum = assemble_forces(
            &VehicleState::default(),
            &thrusts,
            &yaw,
            &Default::default(),
            &inertia,
            &Vector3::zeros(),
            &layout,
        );
        let total: f64 = thrusts.iter().sum();
        if !close(total, collective, 1e-9) || (sum.torque - torque).norm() > 1e-9 {
            return Err(format!("requested {torque:?}, produced {:?}", sum.torque));
        }
    }
    Ok(format!("{cases} cases"))
}

fn quaternion_norm(rng: &mut ChaCha8Rng, cases: usize) -> Result<String, String> {
    let spec = DroneSpec::big();
    let inertia = InertiaModel::from_specs(&spec, &PayloadSpec::none()).map_err(|e| e.to_string())?;
    let steps = cases.max(1) * 100;
    let mut state = VehicleState {
        attitude: quaternion_from_euler(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.3),
        angular_rate: Vector3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), 1.0),
        ..Default::default()
    };
    let sum = crate::dynamics::ForceTorqueSum {
        force: Vector3::zeros(),
        torque: Vector3::zeros(),
    };
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        state = step(&state, &sum, &inertia, 0.002).map_err(|e| e.to_string())?;
        worst = worst.max((state.attitude.quaternion().norm() - 1.0).abs());
    }
    if worst > 1e-12 {
        return Err(format!("norm drifted by {worst:e}"));
    }
    Ok(format!("{steps} steps, drift {worst:.1e}"))
}

fn random_log(rng: &mut ChaCha8Rng, n: usize) -> Vec<TelemetryRecord> {
    let mut t = rng.random_range(-5.0..5.0);
    (0..n)
        .map(|_| {
            t += rng.random_range(0.001..0.1);
            let mut r = TelemetryRecord {
                time: t,
                ..Default::default()
            };
            for v in r
                .position
                .iter_mut()
                .chain(&mut r.rpy_actual)
                .chain(&mut r.rpy_desired)
                .chain(&mut r.rpm)
                .chain(&mut r.thrust)
                .chain(&mut r.airflow)
            {
                *v = rng.random_range(-1e4..1e4) * rng.random_range(0.0..1.0f64).powi(8);
            }
            r.altitude_sensed = rng.random_range(0.0..10.0);
            r.throttle_fraction = rng.random_range(0.0..1.0);
            r
        })
        .collect()
}

fn telemetry_round_trip(rng: &mut ChaCha8Rng, cases: usize) -> Result<String, String> {
    let log = random_log(rng, cases.max(2));
    let mut buf = Vec::new();
    write_telemetry_to(&log, &mut buf).map_err(|e| e.to_string())?;
    let back = read_telemetry_from(buf.as_slice()).map_err(|e| e.to_string())?;
    if back != log {
        return Err("telemetry changed on round trip".into());
    }
    Ok(format!("{} records", log.len()))
}

fn error_rate_translation(rng: &mut ChaCha8Rng, cases: usize) -> Result<String, String> {
    for _ in 0..cases.div_ceil(10) {
        let log = random_log(rng, 200);
        let shift = rng.random_range(-100.0..100.0);
        let shifted: Vec<TelemetryRecord> = log
            .iter()
            .map(|r| TelemetryRecord {
                time: r.time + shift,
                ..*r
            })
            .collect();
        let settle = 0.5;
        let a = rpy_error_rate(&log, settle, [1.0; 3])?;
        let b = rpy_error_rate(&shifted, settle, [1.0; 3])?;
        let window = |l: &[TelemetryRecord]| l.iter().filter(|r| r.time > l[0].time + settle).count();
        if window(&log) != window(&shifted) {
            // float rounding moved a sample across the window edge
            continue;
        }
        for (x, y) in a.as_array().iter().zip(b.as_array()) {
            if !close(*x, y, 1e-9) {
                return Err(format!("shift {shift}: {a} vs {b}"));
            }
        }
    }
    Ok(format!("{} logs", cases.div_ceil(10)))
}

fn hover_settles(_: &mut ChaCha8Rng, _: usize) -> Result<String, String> {
    let scenario = ExperimentConfig {
        payload: PayloadChoice::Custom(default_parcel(MountPosition::Above)),
        coverage: Some(0.5),
        duration: 30.0,
        ..Default::default()
    }
    .resolve()
    .map_err(|e| e.to_string())?;
    let (r, log) = simulate_hover(&scenario);
    let target = scenario.config.target_altitude;
    let late = log.iter().filter(|x| x.time >= 10.0);
    if let Some(bad) = late.clone().find(|x| (x.position[2] - target).abs() >= 0.05) {
        return Err(format!("altitude {} at t = {}", bad.position[2], bad.time));
    }
    if !r.settled {
        return Err(format!("not settled: {:?}", r.diagnostic));
    }
    Ok(format!(
        "settled at {:.2} s, throttle {:.3}",
        r.settling_time.unwrap_or(f64::NAN),
        r.throttle_mean
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_validation_passes() {
        let report = run_validation(50, 3);
        for c in &report.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert_eq!(report.checks.len(), CHECKS.len());
    }
}
