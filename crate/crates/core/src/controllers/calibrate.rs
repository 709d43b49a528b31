//! Γ calibration for the semi-static schemes: sweep candidate margins and keep
//! the most permissive one whose outdoor 10th-percentile loss stays on target.

use serde::{Deserialize, Serialize};

use super::ProtectionBeltMargin;
use crate::error::{Error, Result};

/// Campaign statistics the calibration needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub outdoor_p10_bps: f64,
    pub mean_indoor_power_mw: f64,
    pub mean_indoor_rate_bps: f64,
    /// Mean outdoor rate, bit/s.
    pub mean_outdoor_rate_bps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `None` for the indoor-off baseline.
    pub gamma_db: Option<f64>,
    pub stats: SweepStats,
    /// Relative loss of the outdoor 10th percentile against the baseline.
    pub degradation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub margin: ProtectionBeltMargin,
    /// False when no candidate met the target and the strictest was returned.
    pub met_target: bool,
    /// Baseline first, then one row per candidate in sweep order.
    pub rows: Vec<SweepRow>,
}

/// Runs `simulate(None)` for the indoor-off baseline and `simulate(Some(Γ))`
/// for every candidate (ascending). Returns the lowest Γ whose degradation is
/// at most `degradation_target`, or the highest Γ if none is.
pub fn calibrate_margin<F>(mut simulate: F, gammas: &[f64], degradation_target: f64) -> Result<Calibration>
where
    F: FnMut(Option<f64>) -> Result<SweepStats>,
{
    if gammas.is_empty() {
        return Err(Error::Config("calibration needs at least one margin".into()));
    }
    if gammas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("calibration margins must be strictly ascending".into()));
    }
    if !(degradation_target > 0.0 && degradation_target < 1.0) {
        return Err(Error::Config(format!("degradation target must be in (0, 1), got {degradation_target}")));
    }
    let baseline = simulate(None)?;
    let degradation = |s: &SweepStats| {
        if baseline.outdoor_p10_bps > 0.0 {
            1.0 - s.outdoor_p10_bps / baseline.outdoor_p10_bps
        } else {
            0.0
        }
    };
    let mut rows = vec![SweepRow { gamma_db: None, stats: baseline, degradation: 0.0 }];
    for &g in gammas {
        let stats = simulate(Some(g))?;
        rows.push(SweepRow { gamma_db: Some(g), degradation: degradation(&stats), stats });
    }
    let chosen = rows[1..].iter().find(|r| r.degradation <= degradation_target);
    let (gamma_db, met_target) = match chosen {
        Some(r) => (r.gamma_db.expect("candidate rows carry a margin"), true),
        None => (*gammas.last().expect("non-empty"), false),
    };
    Ok(Calibration { margin: ProtectionBeltMargin { gamma_db }, met_target, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(p10: f64) -> SweepStats {
        SweepStats {
            outdoor_p10_bps: p10,
            mean_indoor_power_mw: 0.0,
            mean_indoor_rate_bps: 0.0,
            mean_outdoor_rate_bps: p10,
        }
    }

    const GAMMAS: [f64; 7] = [-50.0, -40.0, -30.0, -20.0, -10.0, -3.0, 0.0];

    #[test]
    fn isolated_networks_take_the_most_permissive_margin() {
        let c = calibrate_margin(|_| Ok(stats(4e6)), &GAMMAS, 0.1).unwrap();
        assert_eq!(c.margin.gamma_db, -50.0);
        assert!(c.met_target);
        assert_eq!(c.rows.len(), 8);
        assert_eq!(c.rows[0].gamma_db, None);
    }

    #[test]
    fn picks_first_candidate_on_target() {
        // degradation 40%, 20%, 8%, 4%, ... as the margin rises
        let p10 = |g: Option<f64>| match g {
            None => 1.0,
            Some(g) => 1.0 - 0.4 * 2f64.powf((-50.0 - g) / 10.0),
        };
        let c = calibrate_margin(|g| Ok(stats(p10(g))), &GAMMAS, 0.1).unwrap();
        assert_eq!(c.margin.gamma_db, -30.0);
    }

    #[test]
    fn unreachable_target_returns_strictest() {
        let c = calibrate_margin(|g| Ok(stats(if g.is_some() { 0.5 } else { 1.0 })), &GAMMAS, 0.1).unwrap();
        assert_eq!(c.margin.gamma_db, 0.0);
        assert!(!c.met_target);
    }

    #[test]
    fn single_candidate_table() {
        let c = calibrate_margin(|_| Ok(stats(1.0)), &[-40.0], 0.1).unwrap();
        assert_eq!(c.rows.len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(calibrate_margin(|_| Ok(stats(1.0)), &[], 0.1).is_err());
        assert!(calibrate_margin(|_| Ok(stats(1.0)), &[-3.0, -40.0], 0.1).is_err());
        assert!(calibrate_margin(|_| Ok(stats(1.0)), &[-3.0], 1.5).is_err());
    }
}
