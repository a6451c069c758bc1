//! Unit conversions. Everything past the ingestion boundary is SI.

/// Gravitational acceleration used by the dynamics (m/s²).
pub const GRAVITY: f64 = 9.81;

/// Standard gravity, used only for gram-force conversions (m/s²).
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Sea-level air density (kg/m³).
pub const AIR_DENSITY: f64 = 1.225;

pub const MM_TO_M: f64 = 1e-3;
pub const G_TO_KG: f64 = 1e-3;
pub const INCH_TO_MM: f64 = 25.4;

#[inline]
pub fn mm(value: f64) -> f64 {
    value * MM_TO_M
}

#[inline]
pub fn grams(value: f64) -> f64 {
    value * G_TO_KG
}

/// Gram-force to newtons.
#[inline]
pub fn gf_to_newton(gf: f64) -> f64 {
    gf * STANDARD_GRAVITY * 1e-3
}

#[inline]
pub fn newton_to_gf(newton: f64) -> f64 {
    newton / (STANDARD_GRAVITY * 1e-3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_force_round_trip() {
        assert!((gf_to_newton(1000.0) - 9.80665).abs() < 1e-12);
        assert!((newton_to_gf(gf_to_newton(1234.5)) - 1234.5).abs() < 1e-9);
    }
}
