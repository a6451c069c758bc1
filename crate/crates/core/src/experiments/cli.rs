//! Command-line front end. Exit codes: 0 success, 1 usage or config error,
//! 2 runtime failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::geometry::{MountPosition, PayloadSpec};
use crate::sensing::read_telemetry;

use super::config::{default_parcel, ConfigError, DroneChoice, ExperimentConfig, PayloadChoice};
use super::plots::{emit_plots, render_line, render_radar, render_tracking, LineSeries, PlotKind, RadarSeries};
use super::scenario::run_hover_scenario;
use super::sweeps::{
    default_airflow_variants, default_coverage_grid, default_rpm_grid, run_airflow_survey,
    run_coverage_sweep, run_thrust_sweep, thrust_line_data, thrust_table_csv, write_artifact,
    DEFAULT_ERROR_THRESHOLD,
};
use super::validate::run_validation;
use super::ExperimentError;

/// Coverage used when only a mounting position is given.
pub const DEFAULT_CLI_COVERAGE: f64 = 0.5;

#[derive(Debug, Parser)]
#[command(name = "parcel-sim", version, about = "Quadcopter parcel-mounting simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON scenario config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for machine-readable artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_parser = ["small", "medium", "big"])]
    drone: Option<String>,
    /// above, below or none.
    #[arg(long = "payload-pos", global = true)]
    payload_pos: Option<MountPosition>,
    /// Largest per-rotor disk coverage of the parcel, 0..1.
    #[arg(long, global = true)]
    coverage: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hover scenario with telemetry and report.
    Run,
    /// Mean anemometer readings for payload variants against the empty frame.
    Airflow,
    /// Static thrust and airflow across rpm for every built-in airframe.
    ThrustSweep {
        /// Comma-separated fractions of rpm_max.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// Attitude error against coverage, parcel above and below.
    CoverageSweep {
        /// Comma-separated coverages in [0, 1].
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        /// Pass threshold on the error rate (%).
        #[arg(long, default_value_t = DEFAULT_ERROR_THRESHOLD)]
        threshold: f64,
    },
    /// Render SVG plots from data files.
    Plot {
        #[arg(long)]
        kind: PlotKind,
        #[arg(long, required = true, num_args = 1..)]
        data: Vec<PathBuf>,
    },
    /// Oracle and invariant self-check.
    Validate {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
    },
}

fn build_config(common: &CommonArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(name) = &common.drone {
        config.drone = DroneChoice::Builtin(name.clone());
    }
    if let Some(c) = common.coverage {
        if !(0.0..=1.0).contains(&c) || c.is_nan() {
            return Err(ConfigError::invalid("--coverage", format!("must lie in [0, 1], got {c}")));
        }
    }
    match common.payload_pos {
        Some(MountPosition::None) => {
            config.payload = PayloadChoice::Custom(PayloadSpec::none());
            config.coverage = None;
        }
        Some(pos) => {
            let has_payload = match &config.payload {
                PayloadChoice::Custom(p) => p.is_present(),
                PayloadChoice::Preset(_) => true,
            };
            if has_payload {
                let mut p = config.resolve_payload()?;
                p.position = pos;
                config.payload = PayloadChoice::Custom(p);
            } else {
                config.payload = PayloadChoice::Custom(default_parcel(pos));
                if config.coverage.is_none() {
                    config.coverage = Some(DEFAULT_CLI_COVERAGE);
                }
            }
        }
        None => {}
    }
    if let Some(c) = common.coverage {
        config.coverage = Some(c);
    }
    if let Some(out) = &common.out {
        config.output_dir = Some(out.clone());
    }
    Ok(config)
}

/// Parses `argv` (program name first) and runs the command.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), ExperimentError> {
    let config = build_config(&cli.common)?;
    let out = cli.common.out.as_deref();
    match &cli.command {
        Command::Run => cmd_run(&config),
        Command::Airflow => cmd_airflow(&config, out),
        Command::ThrustSweep { grid } => {
            cmd_thrust_sweep(&config, grid.clone().unwrap_or_else(default_rpm_grid), out)
        }
        Command::CoverageSweep { grid, threshold } => cmd_coverage_sweep(
            &config,
            grid.clone().unwrap_or_else(default_coverage_grid),
            *threshold,
            out,
        ),
        Command::Plot { kind, data } => {
            let dir = out.unwrap_or(Path::new("."));
            for path in emit_plots(*kind, data, dir)? {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Validate { cases } => cmd_validate(&config, *cases),
    }
}

fn cmd_run(config: &ExperimentConfig) -> Result<(), ExperimentError> {
    let scenario = config.resolve()?;
    let result = run_hover_scenario(&scenario)?;
    println!(
        "drone {} | payload {} | coverage {:.3}",
        scenario.drone.name, scenario.payload.position, scenario.coverage.max
    );
    println!("error rate: {}", result.error_rates);
    println!(
        "throttle {:.3} | final altitude {:.3} m | settled {}",
        result.throttle_mean, result.final_altitude, result.settled
    );
    if let Some(dir) = &scenario.config.output_dir {
        let log = read_telemetry(&dir.join("telemetry.csv"))?;
        write_artifact(dir, "tracking.svg", &render_tracking(&log, "attitude tracking"))?;
        println!("artifacts in {}", dir.display());
    }
    match &result.diagnostic {
        Some(d) => Err(ExperimentError::Runtime(format!("simulation diverged: {d}"))),
        None => Ok(()),
    }
}

fn cmd_airflow(config: &ExperimentConfig, out: Option<&Path>) -> Result<(), ExperimentError> {
    let survey = run_airflow_survey(config, &default_airflow_variants(config))?;
    println!(
        "{:<16} {:>8} {:>10} {:>9}",
        "variant", "coverage", "AF1-4 m/s", "vs base"
    );
    println!(
        "{:<16} {:>8} {:>10.4} {:>9}",
        "baseline",
        "-",
        survey.baseline.mean_rotor_airflow(),
        "-"
    );
    for v in &survey.variants {
        println!(
            "{:<16} {:>8.3} {:>10.4} {:>+8.2}%",
            v.name,
            v.coverage,
            v.mean_rotor_airflow(),
            100.0 * survey.relative_change(v)
        );
    }
    if let Some(dir) = out {
        let csv = survey.to_csv();
        write_artifact(dir, "airflow.csv", &csv)?;
        let axes: Vec<String> = csv.lines().next().unwrap_or("").split(',').skip(1).map(String::from).collect();
        let series: Vec<RadarSeries> = std::iter::once(&survey.baseline)
            .chain(&survey.variants)
            .map(|v| RadarSeries {
                name: v.name.clone(),
                values: v.mean_airflow.to_vec(),
            })
            .collect();
        write_artifact(dir, "airflow.svg", &render_radar(&axes, &series, "mean airflow (m/s)"))?;
    }
    Ok(())
}

fn cmd_thrust_sweep(config: &ExperimentConfig, grid: Vec<f64>, out: Option<&Path>) -> Result<(), ExperimentError> {
    let rows = run_thrust_sweep(config, &grid)?;
    println!("{:<8} {:>6} {:>8} {:>12} {:>12}", "drone", "frac", "rpm", "thrust gf", "sum AF m/s");
    for r in &rows {
        println!(
            "{:<8} {:>6.2} {:>8.0} {:>12.1} {:>12.3}",
            r.drone, r.rpm_fraction, r.rpm, r.total_thrust_gf, r.total_airflow
        );
    }
    if let Some(dir) = out {
        let (by_rpm, by_airflow) = thrust_line_data(&rows);
        write_artifact(dir, "thrust_sweep.csv", &thrust_table_csv(&rows))?;
        write_artifact(dir, "thrust_vs_rpm.csv", &by_rpm)?;
        write_artifact(dir, "thrust_vs_airflow.csv", &by_airflow)?;
        let group = |xs: &[(String, f64, f64)]| -> Vec<LineSeries> {
            let mut out: Vec<LineSeries> = Vec::new();
            for (name, x, y) in xs {
                match out.iter_mut().find(|s| &s.name == name) {
                    Some(s) => s.points.push((*x, *y)),
                    None => out.push(LineSeries {
                        name: name.clone(),
                        points: vec![(*x, *y)],
                    }),
                }
            }
            out
        };
        let rpm_pts: Vec<_> = rows.iter().map(|r| (r.drone.clone(), r.rpm, r.total_thrust_gf)).collect();
        let af_pts: Vec<_> = rows
            .iter()
            .map(|r| (r.drone.clone(), r.airflow[..4].iter().sum::<f64>() / 4.0, r.total_thrust_gf))
            .collect();
        write_artifact(
            dir,
            "thrust_vs_rpm.svg",
            &render_line(&group(&rpm_pts), "total thrust vs rpm", "rpm", "thrust (gf)"),
        )?;
        write_artifact(
            dir,
            "thrust_vs_airflow.svg",
            &render_line(&group(&af_pts), "total thrust vs airflow", "mean AF1-AF4 (m/s)", "thrust (gf)"),
        )?;
    }
    Ok(())
}

fn cmd_coverage_sweep(
    config: &ExperimentConfig,
    grid: Vec<f64>,
    threshold: f64,
    out: Option<&Path>,
) -> Result<(), ExperimentError> {
    let sweep = run_coverage_sweep(config, &grid, threshold)?;
    println!(
        "{:>8} {:<6} {:>9} {:>9} {:>9} {:>6} {}",
        "coverage", "pos", "roll %", "pitch %", "yaw %", "loss", "pass"
    );
    for r in &sweep.rows {
        println!(
            "{:>8.3} {:<6} {:>9.4} {:>9.4} {:>9.4} {:>6.3} {}",
            r.coverage,
            r.position.to_string(),
            r.error_rates.roll_pct,
            r.error_rates.pitch_pct,
            r.error_rates.yaw_pct,
            r.thrust_loss,
            r.passed
        );
    }
    let fmt = |v: Option<f64>| v.map(|c| format!("{c}")).unwrap_or_else(|| "none".into());
    println!(
        "max passing coverage at {threshold}%: above {} | below {}",
        fmt(sweep.max_passing_above),
        fmt(sweep.max_passing_below)
    );
    if let Some(dir) = out {
        write_artifact(dir, "coverage_sweep.csv", &sweep.to_csv())?;
        let summary = format!(
            "threshold_pct = {threshold}\nmax_passing_above = {}\nmax_passing_below = {}\nerror_rate_definition = {}\n",
            fmt(sweep.max_passing_above),
            fmt(sweep.max_passing_below),
            super::ERROR_RATE_DEFINITION
        );
        write_artifact(dir, "coverage_sweep.txt", &summary)?;
    }
    Ok(())
}

fn cmd_validate(config: &ExperimentConfig, cases: usize) -> Result<(), ExperimentError> {
    let report = run_validation(cases, config.seed);
    for c in &report.checks {
        println!("{} {:<30} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(ExperimentError::Runtime("validation failed".into()))
    }
}
