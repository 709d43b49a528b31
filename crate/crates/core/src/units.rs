//! dB / linear conversions. Power algebra inside the crate is linear mW.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}

/// Rescales a level quoted per `from_hz` to `to_hz` of bandwidth.
pub fn scale_to_bandwidth_db(level_db: f64, from_hz: f64, to_hz: f64) -> f64 {
    level_db + 10.0 * (to_hz / from_hz).log10()
}

pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert!((dbm_to_mw(21.0) - 125.892_541_179_416_7).abs() < 1e-9);
        assert_eq!(mw_to_dbm(1.0), 0.0);
        assert!((scale_to_bandwidth_db(-96.0, 10e6, 20e6) - (-92.989_700_043_360_19)).abs() < 1e-12);
    }
}
