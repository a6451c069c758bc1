//! Telemetry log: one CSV row per logged time step, fixed column order.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

/// Column order of the telemetry file. Readers reject any other header.
pub const HEADER: [&str; 28] = [
    "time",
    "pos_x",
    "pos_y",
    "pos_z",
    "roll",
    "pitch",
    "yaw",
    "roll_desired",
    "pitch_desired",
    "yaw_desired",
    "rpm1",
    "rpm2",
    "rpm3",
    "rpm4",
    "thrust1",
    "thrust2",
    "thrust3",
    "thrust4",
    "AF1",
    "AF2",
    "AF3",
    "AF4",
    "AF13",
    "AF14",
    "AF23",
    "AF24",
    "altitude_sensed",
    "throttle_fraction",
];

#[derive(Debug, Error)]
pub enum TelemetryError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("time is not strictly increasing at record {index} (t = {time})")]
    NonMonotonicTime { index: usize, time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TelemetryRecord {
    pub time: f64,
    pub position: [f64; 3],
    pub rpy_actual: [f64; 3],
    pub rpy_desired: [f64; 3],
    pub rpm: [f64; 4],
    pub thrust: [f64; 4],
    /// AF1, AF2, AF3, AF4, AF13, AF14, AF23, AF24.
    pub airflow: [f64; 8],
    pub altitude_sensed: f64,
    pub throttle_fraction: f64,
}

impl TelemetryRecord {
    fn to_values(&self) -> [f64; 28] {
        let mut out = [0.0; 28];
        out[0] = self.time;
        out[1..4].copy_from_slice(&self.position);
        out[4..7].copy_from_slice(&self.rpy_actual);
        out[7..10].copy_from_slice(&self.rpy_desired);
        out[10..14].copy_from_slice(&self.rpm);
        out[14..18].copy_from_slice(&self.thrust);
        out[18..26].copy_from_slice(&self.airflow);
        out[26] = self.altitude_sensed;
        out[27] = self.throttle_fraction;
        out
    }

    fn from_values(v: &[f64; 28]) -> Self {
        let mut r = Self {
            time: v[0],
            altitude_sensed: v[26],
            throttle_fraction: v[27],
            ..Default::default()
        };
        r.position.copy_from_slice(&v[1..4]);
        r.rpy_actual.copy_from_slice(&v[4..7]);
        r.rpy_desired.copy_from_slice(&v[7..10]);
        r.rpm.copy_from_slice(&v[10..14]);
        r.thrust.copy_from_slice(&v[14..18]);
        r.airflow.copy_from_slice(&v[18..26]);
        r
    }
}

fn check_monotonic(log: &[TelemetryRecord]) -> Result<(), TelemetryError> {
    for (index, pair) in log.windows(2).enumerate() {
        if !(pair[1].time > pair[0].time) {
            return Err(TelemetryError::NonMonotonicTime {
                index: index + 1,
                time: pair[1].time,
            });
        }
    }
    Ok(())
}

/// Shortest representation that parses back to the same `f64`; `-0` is
/// written as `0`.
fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

pub fn write_telemetry_to<W: Write>(log: &[TelemetryRecord], writer: W) -> Result<(), TelemetryError> {
    check_monotonic(log)?;
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(HEADER).map_err(csv_io)?;
    for record in log {
        csv.write_record(record.to_values().iter().map(|&v| format_value(v)))
            .map_err(csv_io)?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_telemetry(log: &[TelemetryRecord], path: &Path) -> Result<(), TelemetryError> {
    let mut buf = Vec::new();
    write_telemetry_to(log, &mut buf)?;
    write_atomic(path, &buf)?;
    Ok(())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn csv_io(e: csv::Error) -> TelemetryError {
    TelemetryError::Io(io::Error::other(e.to_string()))
}

pub fn read_telemetry_from<R: Read>(reader: R) -> Result<Vec<TelemetryRecord>, TelemetryError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| TelemetryError::Schema(format!("unreadable header: {e}")))?
        .clone();
    if headers.len() != HEADER.len() {
        let missing: Vec<_> = HEADER
            .iter()
            .filter(|h| !headers.iter().any(|x| x == **h))
            .collect();
        return Err(TelemetryError::Schema(format!(
            "expected {} columns, found {} (missing: {missing:?})",
            HEADER.len(),
            headers.len()
        )));
    }
    for (i, (found, expected)) in headers.iter().zip(HEADER).enumerate() {
        if found != expected {
            return Err(TelemetryError::Schema(format!(
                "column {} is `{found}`, expected `{expected}`",
                i + 1
            )));
        }
    }

    let mut log = Vec::new();
    for row in csv.records() {
        let row = row.map_err(|e| TelemetryError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != HEADER.len() {
            return Err(TelemetryError::Parse {
                line,
                message: format!("expected {} fields, found {}", HEADER.len(), row.len()),
            });
        }
        let mut values = [0.0; 28];
        for (i, field) in row.iter().enumerate() {
            values[i] = field.trim().parse::<f64>().map_err(|_| TelemetryError::Parse {
                line,
                message: format!("column `{}`: `{field}` is not a number", HEADER[i]),
            })?;
        }
        log.push(TelemetryRecord::from_values(&values));
    }
    check_monotonic(&log)?;
    Ok(log)
}

pub fn read_telemetry(path: &Path) -> Result<Vec<TelemetryRecord>, TelemetryError> {
    read_telemetry_from(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_log() -> Vec<TelemetryRecord> {
        (0..5)
            .map(|i| {
                let t = i as f64 * 0.02;
                TelemetryRecord {
                    time: t,
                    position: [0.1 * t, -0.0, 2.5 + 1e-17 * t],
                    rpy_actual: [1.0 / 3.0, -2.0e-9, std::f64::consts::PI],
                    rpy_desired: [0.0; 3],
                    rpm: [5000.123456789; 4],
                    thrust: [5.5, 5.6, 5.7, 5.8],
                    airflow: [6.0, 6.1, 6.2, 6.3, 3.0, 3.1, 3.2, 3.3],
                    altitude_sensed: 2.499999999999,
                    throttle_fraction: 0.55,
                }
            })
            .collect()
    }

    #[test]
    fn round_trip_is_exact() {
        let log = sample_log();
        let mut buf = Vec::new();
        write_telemetry_to(&log, &mut buf).unwrap();
        let back = read_telemetry_from(buf.as_slice()).unwrap();
        assert_eq!(back, log);
        // negative zero is normalized
        assert!(back[0].position[1].is_sign_positive());
    }

    #[test]
    fn empty_log_is_header_only() {
        let mut buf = Vec::new();
        write_telemetry_to(&[], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text.trim_end(), HEADER.join(","));
        assert!(read_telemetry_from(buf.as_slice()).unwrap().is_empty());
    }

    #[test]
    fn shuffled_header_is_schema_error() {
        let mut header: Vec<&str> = HEADER.to_vec();
        header.swap(2, 3);
        let text = format!("{}\n", header.join(","));
        assert!(matches!(
            read_telemetry_from(text.as_bytes()),
            Err(TelemetryError::Schema(_))
        ));
        let short = HEADER[..27].join(",");
        assert!(matches!(
            read_telemetry_from(short.as_bytes()),
            Err(TelemetryError::Schema(_))
        ));
    }

    #[test]
    fn malformed_row_reports_line() {
        let mut buf = Vec::new();
        write_telemetry_to(&sample_log(), &mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text = text.replacen("5.7", "five", 1);
        match read_telemetry_from(text.as_bytes()) {
            Err(TelemetryError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn time_must_increase() {
        let mut log = sample_log();
        log[3].time = log[2].time;
        assert!(matches!(
            write_telemetry_to(&log, Vec::new()),
            Err(TelemetryError::NonMonotonicTime { index: 3, .. })
        ));
    }

    #[test]
    fn atomic_file_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("telemetry.csv");
        write_telemetry(&sample_log(), &path).unwrap();
        assert_eq!(read_telemetry(&path).unwrap(), sample_log());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
