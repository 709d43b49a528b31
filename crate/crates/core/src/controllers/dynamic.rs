//! Closed-loop REM control: each report scales the estimated interference at
//! the reporting location into a cap, and the indoor powers are re-optimised
//! under all caps at once.

use crate::error::Error;
use crate::optim::{solve, Goal, PowerAllocation, PowerProblem};
use crate::propagation::{build_coupling_matrix, CouplingMatrix, PropagationEnv};
use crate::rem::InterferenceReport;
use crate::scenario::BsConfig;
use crate::units::db_to_linear;

/// What the controller knows besides the reports.
#[derive(Debug, Clone, Copy)]
pub struct DynamicInputs<'a> {
    /// The assumed propagation model; need not match the true one.
    pub env: &'a PropagationEnv,
    pub indoor_bs: &'a [BsConfig],
    pub victim_height_m: f64,
    pub victim_gain_dbi: f64,
    /// Wideband noise power of a victim receiver, mW.
    pub noise_mw: f64,
    /// Factor applied to every estimated coupling gain.
    pub model_scale: f64,
    pub goal: Goal,
}

impl DynamicInputs<'_> {
    pub fn coupling(&self, reports: &[InterferenceReport]) -> CouplingMatrix {
        let points: Vec<_> = reports.iter().map(InterferenceReport::location).collect();
        let w = build_coupling_matrix(self.env, &points, self.victim_height_m, self.victim_gain_dbi, self.indoor_bs);
        if self.model_scale == 1.0 {
            w
        } else {
            w.scaled(self.model_scale)
        }
    }

    fn p_max(&self) -> f64 {
        self.indoor_bs.iter().map(BsConfig::max_power_mw).fold(f64::INFINITY, f64::min)
    }
}

/// New allocation and, when the solver failed, the reason the previous one was kept.
#[derive(Debug)]
pub struct UpdateOutcome {
    pub allocation: PowerAllocation,
    pub failure: Option<Error>,
}

/// One controller update. The cap at report n is `10^(β_n/10) · (W current)_n`;
/// where the estimate is zero the victim's noise power stands in for it.
pub fn dynamic_update(
    reports: &[InterferenceReport],
    current: &PowerAllocation,
    inputs: &DynamicInputs<'_>,
) -> UpdateOutcome {
    if reports.is_empty() {
        return UpdateOutcome { allocation: current.clone(), failure: None };
    }
    let w = inputs.coupling(reports);
    let estimate = w.interference(&current.p_tx);
    let caps: Vec<f64> = reports
        .iter()
        .zip(&estimate)
        .map(|(r, &i)| {
            let base = if i > 0.0 { i } else { inputs.noise_mw };
            db_to_linear(r.beta_db) * base
        })
        .collect();
    let result = PowerProblem::from_coupling(&w, caps, inputs.p_max(), inputs.goal).and_then(|p| solve(&p));
    match result {
        Ok(allocation) => UpdateOutcome { allocation, failure: None },
        Err(e) => UpdateOutcome { allocation: current.clone(), failure: Some(e) },
    }
}
