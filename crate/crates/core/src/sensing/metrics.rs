use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::Serialize;

use super::TelemetryRecord;

/// Attitude range an error of 100 % corresponds to (rad).
pub const DEFAULT_FULL_SCALE: f64 = FRAC_PI_4;

/// Records before this many seconds into a log are ignored by the metric.
pub const DEFAULT_SETTLE_TIME: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ErrorRates {
    pub roll_pct: f64,
    pub pitch_pct: f64,
    pub yaw_pct: f64,
}

impl ErrorRates {
    pub fn max(&self) -> f64 {
        self.roll_pct.max(self.pitch_pct).max(self.yaw_pct)
    }

    pub fn max_roll_pitch(&self) -> f64 {
        self.roll_pct.max(self.pitch_pct)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.roll_pct, self.pitch_pct, self.yaw_pct]
    }
}

impl fmt::Display for ErrorRates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "roll {:.4}% pitch {:.4}% yaw {:.4}%",
            self.roll_pct, self.pitch_pct, self.yaw_pct
        )
    }
}

fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    if d > std::f64::consts::PI {
        std::f64::consts::TAU - d
    } else {
        d
    }
}

/// Mean absolute attitude error after `settle_time` (relative to the first
/// record), as a percentage of `full_scale` per axis.
pub fn rpy_error_rate(
    log: &[TelemetryRecord],
    settle_time: f64,
    full_scale: [f64; 3],
) -> Result<ErrorRates, String> {
    if full_scale.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(format!("full scale must be positive, got {full_scale:?}"));
    }
    let Some(first) = log.first() else {
        return Err("empty telemetry log".into());
    };
    let start = first.time + settle_time;
    let mut sums = [0.0; 3];
    let mut count = 0usize;
    for r in log.iter().filter(|r| r.time > start) {
        for axis in 0..3 {
            sums[axis] += angle_difference(r.rpy_actual[axis], r.rpy_desired[axis]);
        }
        count += 1;
    }
    if count == 0 {
        return Err(format!(
            "no records after the {settle_time} s settle window"
        ));
    }
    let pct = |axis: usize| 100.0 * sums[axis] / count as f64 / full_scale[axis];
    Ok(ErrorRates {
        roll_pct: pct(0),
        pitch_pct: pct(1),
        yaw_pct: pct(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn log_with(roll: f64) -> Vec<TelemetryRecord> {
        (0..1000)
            .map(|i| TelemetryRecord {
                time: i as f64 * 0.01,
                rpy_actual: [roll, 0.0, 0.0],
                ..Default::default()
            })
            .collect()
    }

    #[test]
    fn perfect_tracking_is_zero() {
        let e = rpy_error_rate(&log_with(0.0), 5.0, [DEFAULT_FULL_SCALE; 3]).unwrap();
        assert_eq!(e, ErrorRates::default());
    }

    #[test]
    fn constant_offset_percentage() {
        let e = rpy_error_rate(&log_with(0.00785), 5.0, [DEFAULT_FULL_SCALE; 3]).unwrap();
        assert_relative_eq!(e.roll_pct, 0.00785 / FRAC_PI_4 * 100.0, max_relative = 1e-12);
        assert!((e.roll_pct - 1.0).abs() < 1e-3);
        let doubled = rpy_error_rate(&log_with(0.00785), 5.0, [2.0 * DEFAULT_FULL_SCALE; 3]).unwrap();
        assert_relative_eq!(doubled.roll_pct, e.roll_pct / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn wraps_across_pi() {
        let mut log = log_with(0.0);
        for r in &mut log {
            r.rpy_actual[2] = std::f64::consts::PI - 0.01;
            r.rpy_desired[2] = -std::f64::consts::PI + 0.01;
        }
        let e = rpy_error_rate(&log, 1.0, [1.0; 3]).unwrap();
        assert_relative_eq!(e.yaw_pct, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn empty_window_is_error() {
        assert!(rpy_error_rate(&[], 5.0, [1.0; 3]).is_err());
        assert!(rpy_error_rate(&log_with(0.1), 100.0, [1.0; 3]).is_err());
        assert!(rpy_error_rate(&log_with(0.1), 1.0, [0.0, 1.0, 1.0]).is_err());
    }
}
