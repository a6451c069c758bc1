//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, TAU};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use parcel_sim::aero::{drag_coefficient, drag_force, lift_coefficient, lift_force, wind_forces, RotorModel};
use parcel_sim::experiments::config::{default_parcel, ExperimentConfig, PayloadChoice};
use parcel_sim::experiments::sweeps::{
    default_airflow_variants, run_airflow_survey, run_coverage_sweep, run_thrust_sweep,
};
use parcel_sim::experiments::validate::run_validation;
use parcel_sim::experiments::simulate_hover;
use parcel_sim::geometry::{disk_box_coverage, DroneSpec, MountPosition, Rect};
use parcel_sim::units::{newton_to_gf, GRAVITY};

type Outcome = Result<String, String>;

fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    if b == 0.0 {
        a.abs() <= tol
    } else {
        ((a - b) / b).abs() <= tol
    }
}

fn c1_equation_fidelity() -> Outcome {
    let (fd, fl, m, g, t) = (2.75, 1.4, 2.4, GRAVITY, 23.5);
    let lift_minus_weight = fl - m * g;
    // (theta, psi, [pitch, roll, yaw]) written out by hand
    let cases = [
        (0.0, 0.0, [-fd, lift_minus_weight + t, 0.0]),
        (0.0, FRAC_PI_2, [-fd * FRAC_PI_2.cos(), lift_minus_weight + t, -fd]),
        (
            FRAC_PI_6,
            0.0,
            [
                -fd * (3f64.sqrt() / 2.0) - lift_minus_weight * 0.5,
                -fd * 0.5 + lift_minus_weight * (3f64.sqrt() / 2.0) + t,
                0.0,
            ],
        ),
    ];
    for (theta, psi, expect) in cases {
        let w = wind_forces(theta, psi, fd, fl, m, g, t);
        let got = [w.f_pitch, w.f_roll, w.f_yaw];
        for k in 0..3 {
            let ok = if expect[k].abs() < 1e-9 {
                (got[k] - expect[k]).abs() <= 1e-12 * fd
            } else {
                rel_eq(got[k], expect[k], 1e-12)
            };
            if !ok {
                return Err(format!("theta={theta} psi={psi}: got {got:?}, want {expect:?}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let coeff = rng.random_range(0.01..3.0);
        let (a, rho, v) = (rng.random_range(0.001..1.0), rng.random_range(0.8..1.4), rng.random_range(0.5..30.0));
        let cd = drag_coefficient(drag_force(coeff, a, rho, v), a, rho, v).map_err(|e| e.to_string())?;
        let cl = lift_coefficient(lift_force(coeff, a, rho, v), a, rho, v).map_err(|e| e.to_string())?;
        worst = worst.max(((cd - coeff) / coeff).abs()).max(((cl - coeff) / coeff).abs());
    }
    if worst > 1e-12 {
        return Err(format!("coefficient round trip error {worst:e}"));
    }
    Ok(format!("3 hand cases at 1e-12, round trip worst {worst:.1e}"))
}

/// Fraction of uniform disk samples falling inside `rect`.
fn monte_carlo_coverage(center: Vector2<f64>, r: f64, rect: &Rect, samples: usize, seed: u64) -> f64 {
    let chunks = 64;
    let per_chunk = samples / chunks;
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let mut hits = 0;
            for _ in 0..per_chunk {
                let rho = r * rng.random::<f64>().sqrt();
                let phi = TAU * rng.random::<f64>();
                let (x, y) = (center.x + rho * phi.cos(), center.y + rho * phi.sin());
                if x >= rect.min_x && x <= rect.max_x && y >= rect.min_y && y <= rect.max_y {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    hits as f64 / (per_chunk * chunks) as f64
}

fn c2_geometry_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..100u64 {
        let r = rng.random_range(0.03..0.25);
        let center = Vector2::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
        // keep the rectangle near the disk so the fraction is not trivially 0
        let x0 = center.x + rng.random_range(-1.5 * r..0.8 * r);
        let y0 = center.y + rng.random_range(-1.5 * r..0.8 * r);
        let rect = Rect::new(x0, y0, x0 + rng.random_range(0.1 * r..2.5 * r), y0 + rng.random_range(0.1 * r..2.5 * r));
        let exact = disk_box_coverage(center, r, &rect).map_err(|e| e.to_string())?;
        let estimate = monte_carlo_coverage(center, r, &rect, 10_000_000, case);
        let err = (exact - estimate).abs();
        if err > 1e-3 {
            return Err(format!("case {case}: exact {exact} vs Monte-Carlo {estimate}"));
        }
        worst = worst.max(err);
    }
    Ok(format!("100 configurations x 1e7 samples, worst deviation {worst:.2e} (tol 1e-3)"))
}

fn c3_thrust_calibration() -> Outcome {
    let mut detail = Vec::new();
    for spec in DroneSpec::builtins() {
        let model = RotorModel::calibrated(&spec).map_err(|e| e.to_string())?;
        let n = spec.rpm_max / 60.0;
        let per_rotor = newton_to_gf(model.thrust_coeff * model.air_density * n * n * model.diameter.powi(4));
        if !(1000.0..=2000.0).contains(&per_rotor) {
            return Err(format!("{}: {per_rotor:.1} gf per rotor", spec.name));
        }
        detail.push(format!("{} {per_rotor:.0} gf", spec.name));
    }
    let rows = run_thrust_sweep(&ExperimentConfig::default(), &[1.0]).map_err(|e| e.to_string())?;
    let big = rows.iter().find(|r| r.drone == "big").ok_or("no big row")?;
    if !rel_eq(big.total_thrust_gf, 8000.0, 0.05) {
        return Err(format!("big total {:.0} gf", big.total_thrust_gf));
    }
    Ok(format!("{}; big total {:.0} gf (8000 +/- 5%)", detail.join(", "), big.total_thrust_gf))
}

fn parcel_config(position: MountPosition, coverage: f64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        payload: PayloadChoice::Custom(default_parcel(position)),
        coverage: Some(coverage),
        seed,
        ..Default::default()
    }
}

fn c4_hover_regression() -> Outcome {
    let config = ExperimentConfig {
        duration: 30.0,
        ..parcel_config(MountPosition::Above, 0.5, 0)
    };
    let scenario = config.resolve().map_err(|e| e.to_string())?;
    if (scenario.payload.mass - 200.0).abs() > 0.0 || scenario.drone.name != "big" {
        return Err("scenario is not big + 200 g".into());
    }
    let start = Instant::now();
    let (result, log) = simulate_hover(&scenario);
    let wall = start.elapsed().as_secs_f64();
    let settle = result.settling_time.ok_or("never settled")?;
    let outside = log
        .iter()
        .filter(|r| r.time >= 10.0)
        .map(|r| (r.position[2] - 2.5).abs())
        .fold(0.0, f64::max);
    if settle > 10.0 || outside >= 0.05 {
        return Err(format!("settled at {settle:.2} s, worst late deviation {outside:.3} m"));
    }
    if (result.throttle_mean - 0.55).abs() > 0.08 {
        return Err(format!("throttle {:.3}", result.throttle_mean));
    }
    if wall >= 10.0 {
        return Err(format!("wall time {wall:.2} s"));
    }
    Ok(format!(
        "settled {settle:.2} s, final {:.3} m, throttle {:.3}, wall {wall:.3} s",
        result.final_altitude, result.throttle_mean
    ))
}

fn c5_error_ordering() -> Outcome {
    let mut lines = Vec::new();
    for seed in [0, 1, 2] {
        let above = simulate_hover(&parcel_config(MountPosition::Above, 0.5, seed).resolve().map_err(|e| e.to_string())?).0;
        let below = simulate_hover(&parcel_config(MountPosition::Below, 0.5, seed).resolve().map_err(|e| e.to_string())?).0;
        let a = above.error_rates;
        let b = below.error_rates;
        if a.as_array().iter().any(|v| !(v.is_finite() && *v <= 0.5)) {
            return Err(format!("seed {seed}: above {a}"));
        }
        if b.roll_pct < 10.0 * a.roll_pct || b.pitch_pct < 10.0 * a.pitch_pct {
            return Err(format!("seed {seed}: below {b} vs above {a}"));
        }
        lines.push(format!(
            "seed {seed}: above max {:.4}%, below/above roll {:.0}x pitch {:.0}x",
            a.max(),
            b.roll_pct / a.roll_pct,
            b.pitch_pct / a.pitch_pct
        ));
    }
    Ok(lines.join("; "))
}

fn c6_coverage_claim() -> Outcome {
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let sweep = run_coverage_sweep(&ExperimentConfig::default(), &grid, 1.0).map_err(|e| e.to_string())?;
    let above = sweep.max_passing_above.unwrap_or(-1.0);
    if above < 0.5 {
        return Err(format!("max passing above coverage {above}"));
    }
    let passing_below: Vec<f64> = sweep
        .rows
        .iter()
        .filter(|r| r.position == MountPosition::Below && r.coverage >= 0.35 - 1e-12 && r.passed)
        .map(|r| r.coverage)
        .collect();
    if !passing_below.is_empty() {
        return Err(format!("below passes at {passing_below:?}"));
    }
    let below_035 = sweep
        .rows
        .iter()
        .find(|r| r.position == MountPosition::Below && (r.coverage - 0.35).abs() < 1e-12)
        .ok_or("grid lacks 0.35")?;
    Ok(format!(
        "max passing above {above}; below fails for c >= 0.35 (at 0.35: {})",
        below_035.error_rates
    ))
}

fn c7_airflow_direction() -> Outcome {
    let config = ExperimentConfig::default();
    let survey = run_airflow_survey(&config, &default_airflow_variants(&config)).map_err(|e| e.to_string())?;
    let base = survey.baseline.mean_rotor_airflow();
    let mut worst_above: f64 = 0.0;
    let mut below_count = 0;
    let mut above_count = 0;
    for v in &survey.variants {
        let change = survey.relative_change(v);
        match v.position {
            MountPosition::Below => {
                below_count += 1;
                if v.mean_rotor_airflow() >= base {
                    return Err(format!("{}: {:.4} m/s vs baseline {base:.4}", v.name, v.mean_rotor_airflow()));
                }
            }
            MountPosition::Above if v.coverage <= 0.5 + 1e-9 => {
                above_count += 1;
                worst_above = worst_above.max(change.abs());
                if change.abs() > 0.03 {
                    return Err(format!("{}: {:+.2}% vs baseline", v.name, 100.0 * change));
                }
            }
            _ => {}
        }
    }
    if below_count == 0 || above_count == 0 {
        return Err("survey lacks below or above variants".into());
    }
    Ok(format!(
        "{below_count} below variants under baseline {base:.3} m/s; {above_count} above variants within {:.2}%",
        100.0 * worst_above
    ))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_parcel-sim"))
        .args(args)
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} exited with {status}"))
    }
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn c8_determinism() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for run in ["a", "b"] {
        let out = root.path().join(run);
        let out_s = out.to_str().ok_or("non-utf8 temp path")?;
        run_cli(&["run", "--drone", "big", "--payload-pos", "below", "--coverage", "0.4", "--seed", "7", "--out", out_s])?;
        run_cli(&["airflow", "--seed", "7", "--out", out_s])?;
        run_cli(&["thrust-sweep", "--out", out_s])?;
        let telemetry = out.join("telemetry.csv");
        let tel = telemetry.to_str().ok_or("non-utf8 temp path")?;
        run_cli(&["plot", "--kind", "tracking", "--data", tel, "--out", out_s])?;
    }
    for name in [
        "telemetry.csv",
        "report.txt",
        "tracking.svg",
        "telemetry.svg",
        "airflow.csv",
        "airflow.svg",
        "thrust_vs_rpm.svg",
        "thrust_vs_airflow.svg",
    ] {
        let a = read(&root.path().join("a").join(name))?;
        let b = read(&root.path().join("b").join(name))?;
        if a != b {
            return Err(format!("{name} differs between identical invocations"));
        }
        compared += 1;
    }
    // a different seed must actually change the telemetry
    let other = root.path().join("c");
    let other_s = other.to_str().ok_or("non-utf8 temp path")?;
    run_cli(&["run", "--drone", "big", "--payload-pos", "below", "--coverage", "0.4", "--seed", "8", "--out", other_s])?;
    if read(&other.join("telemetry.csv"))? == read(&root.path().join("a").join("telemetry.csv"))? {
        return Err("seed has no effect on telemetry".into());
    }
    Ok(format!("{compared} artifacts byte-identical across repeated CLI runs"))
}

fn c9_property_suites() -> Outcome {
    let report = run_validation(1000, 9);
    let failed: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    if !failed.is_empty() {
        return Err(failed.join("; "));
    }
    Ok(format!(
        "{} runtime checks at 1000 cases pass; proptest suite lives in the `properties` target",
        report.checks.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("C1 equation fidelity", c1_equation_fidelity),
        ("C2 geometry oracle", c2_geometry_oracle),
        ("C3 thrust calibration", c3_thrust_calibration),
        ("C4 hover regression", c4_hover_regression),
        ("C5 error-rate ordering", c5_error_ordering),
        ("C6 coverage claim", c6_coverage_claim),
        ("C7 airflow direction", c7_airflow_direction),
        ("C8 determinism", c8_determinism),
        ("C9 property suites", c9_property_suites),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.2} s): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name} ({secs:.2} s): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
