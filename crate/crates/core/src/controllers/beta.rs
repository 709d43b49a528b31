//! Interference multiplier β: how far a UE's external interference may grow
//! before its rate drops below Ψ percent of the rate without it.

use serde::{Deserialize, Serialize};

use crate::link::{RateMapper, SinrVector};
use crate::scenario::Technology;
use crate::units::linear_to_db;

pub const BETA_CAP: f64 = 1e6;
pub const BETA_FLOOR: f64 = 1e-6;
/// Width of the final bracket, dB.
pub const BETA_TOL_DB: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaStatus {
    Solved,
    /// The target still holds at `BETA_CAP`.
    Capped,
    /// The target fails even at `BETA_FLOOR`.
    Floored,
    /// No external interference reaches the UE; β is reported as the cap.
    NoExternalInterference,
    /// The UE has no rate to protect; β is reported as the cap.
    NoBaselineRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaOutcome {
    pub beta: f64,
    pub beta_db: f64,
    pub status: BetaStatus,
}

impl BetaOutcome {
    fn new(beta: f64, status: BetaStatus) -> Self {
        Self { beta, beta_db: linear_to_db(beta), status }
    }
}

/// Largest β with `R(S / (σ² + I_IN + β I_OUT)) >= Ψ/100 · R(S / (σ² + I_IN))`,
/// bracketed to `BETA_TOL_DB` and returned from the feasible side.
pub fn solve_beta(sinr: &SinrVector, psi_percent: f64, mapper: &RateMapper, tech: Technology) -> BetaOutcome {
    let r0 = mapper.full_band_rate(sinr, 0.0, tech);
    if !(r0 > 0.0) {
        return BetaOutcome::new(BETA_CAP, BetaStatus::NoBaselineRate);
    }
    if sinr.i_out.iter().all(|&i| i <= 0.0) {
        return BetaOutcome::new(BETA_CAP, BetaStatus::NoExternalInterference);
    }
    let target = psi_percent / 100.0 * r0;
    let ok = |beta: f64| mapper.full_band_rate(sinr, beta, tech) >= target;

    let (mut lo, mut hi);
    if ok(1.0) {
        lo = 1.0;
        hi = 2.0;
        while ok(hi) {
            lo = hi;
            if hi >= BETA_CAP {
                return BetaOutcome::new(BETA_CAP, BetaStatus::Capped);
            }
            hi = (hi * 2.0).min(BETA_CAP);
        }
    } else {
        hi = 1.0;
        lo = 0.5;
        while !ok(lo) {
            hi = lo;
            if lo <= BETA_FLOOR {
                return BetaOutcome::new(BETA_FLOOR, BetaStatus::Floored);
            }
            lo = (lo * 0.5).max(BETA_FLOOR);
        }
    }
    // bisect in dB: ok(lo) holds, ok(hi) does not
    let (mut lo_db, mut hi_db) = (linear_to_db(lo), linear_to_db(hi));
    while hi_db - lo_db > BETA_TOL_DB {
        let mid = 0.5 * (lo_db + hi_db);
        if ok(10f64.powf(mid / 10.0)) {
            lo_db = mid;
        } else {
            hi_db = mid;
        }
    }
    BetaOutcome { beta: 10f64.powf(lo_db / 10.0), beta_db: lo_db, status: BetaStatus::Solved }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(s: f64, n: f64, i_out: f64) -> SinrVector {
        SinrVector { signal: vec![s], noise: vec![n], i_in: vec![0.0], i_out: vec![i_out] }
    }

    /// Bisection directly on the closed-form Shannon condition.
    fn shannon_oracle(s: f64, n: f64, i_out: f64, psi: f64) -> f64 {
        let target = psi / 100.0 * (1.0 + s / n).log2();
        let (mut lo, mut hi) = (0.0f64, 1e6f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (1.0 + s / (n + mid * i_out)).log2() >= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn worked_shannon_example() {
        let oracle = shannon_oracle(10.0, 1.0, 0.1, 90.0);
        assert!((oracle - 3.063_82).abs() < 1e-5, "{oracle}");
        let out = solve_beta(&scalar(10.0, 1.0, 0.1), 90.0, &RateMapper::shannon(180e3), Technology::Lte);
        assert_eq!(out.status, BetaStatus::Solved);
        assert!((out.beta_db - linear_to_db(oracle)).abs() <= BETA_TOL_DB);
        assert!((out.beta_db - 4.87).abs() < 0.01);
    }

    #[test]
    fn full_protection_forces_reduction() {
        let out = solve_beta(&scalar(10.0, 1.0, 0.1), 100.0, &RateMapper::shannon(180e3), Technology::Lte);
        assert!(out.beta < 1.0);
    }

    #[test]
    fn degenerate_inputs_report_the_cap() {
        let m = RateMapper::shannon(180e3);
        assert_eq!(
            solve_beta(&scalar(10.0, 1.0, 0.0), 90.0, &m, Technology::Lte).status,
            BetaStatus::NoExternalInterference
        );
        let nb = RateMapper::narrowband(180e3);
        let out = solve_beta(&scalar(1e-3, 1.0, 0.1), 90.0, &nb, Technology::Lte);
        assert_eq!(out.status, BetaStatus::NoBaselineRate);
        assert_eq!(out.beta, BETA_CAP);
    }

    #[test]
    fn boundary_interference_reports_zero_db() {
        // I_OUT already at the level where the rate sits exactly at the target
        let (s, n) = (10.0f64, 1.0f64);
        let target = 0.9 * (1.0 + s / n).log2();
        let i_out = s / (2f64.powf(target) - 1.0) - n;
        let out = solve_beta(&scalar(s, n, i_out), 90.0, &RateMapper::shannon(180e3), Technology::Lte);
        assert!(out.beta_db.abs() <= BETA_TOL_DB, "{}", out.beta_db);
    }

    #[test]
    fn narrowband_result_is_feasible_and_tight() {
        let m = RateMapper::narrowband(180e3);
        let n_rb = 12;
        let v = SinrVector {
            signal: (0..n_rb).map(|k| 5.0 + k as f64).collect(),
            noise: vec![0.3; n_rb],
            i_in: vec![0.1; n_rb],
            i_out: vec![0.05; n_rb],
        };
        let out = solve_beta(&v, 90.0, &m, Technology::Nr);
        let r0 = m.full_band_rate(&v, 0.0, Technology::Nr);
        assert!(m.full_band_rate(&v, out.beta, Technology::Nr) >= 0.9 * r0);
        let above = 10f64.powf((out.beta_db + BETA_TOL_DB) / 10.0);
        assert!(m.full_band_rate(&v, above, Technology::Nr) < 0.9 * r0);
    }
}
