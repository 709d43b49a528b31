//! The five indoor power-control schemes and their shared configuration.

mod beta;
mod calibrate;
mod cbrs;
mod dynamic;
mod lsa;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::Goal;
use crate::rem::{QuantMode, Quantizer};

pub use beta::{solve_beta, BetaOutcome, BetaStatus, BETA_CAP, BETA_FLOOR, BETA_TOL_DB};
pub use calibrate::{calibrate_margin, Calibration, SweepRow, SweepStats};
pub use cbrs::{cbrs_gaa_power, cbrs_pal_protection_area, scale_per_10mhz};
pub use dynamic::{dynamic_update, DynamicInputs, UpdateOutcome};
pub use lsa::{cept_margin_db, cept_max_rx_power_dbm, lsa_max_power_at_point, lsa_static_power, lsa_static_powers};

/// Γ (dB): thermal noise over the maximum single-BS interference allowed at a
/// belt point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtectionBeltMargin {
    pub gamma_db: f64,
}

impl ProtectionBeltMargin {
    pub const PRACTICAL_MIN_DB: f64 = -60.0;
    pub const PRACTICAL_MAX_DB: f64 = 0.0;

    /// Warning text when Γ leaves the usual 0 to −60 dB range.
    pub fn range_warning(&self) -> Option<String> {
        (!(Self::PRACTICAL_MIN_DB..=Self::PRACTICAL_MAX_DB).contains(&self.gamma_db)).then(|| {
            format!(
                "protection belt margin {} dB is outside the practical range [{}, {}] dB",
                self.gamma_db,
                Self::PRACTICAL_MIN_DB,
                Self::PRACTICAL_MAX_DB
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// Indoor network switched off; the reference for every degradation figure.
    Off,
    /// Every indoor BS at `fixed_power_mw`.
    Fixed,
    ModifiedLsa,
    Cbrs,
    SemiStatic,
    SemiStaticArea,
    Dynamic,
}

impl SchemeKind {
    pub const ALL_SHARING: [SchemeKind; 5] = [
        SchemeKind::ModifiedLsa,
        SchemeKind::Cbrs,
        SchemeKind::SemiStatic,
        SchemeKind::SemiStaticArea,
        SchemeKind::Dynamic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Off => "off",
            SchemeKind::Fixed => "fixed",
            SchemeKind::ModifiedLsa => "modified_lsa",
            SchemeKind::Cbrs => "cbrs",
            SchemeKind::SemiStatic => "semi_static",
            SchemeKind::SemiStaticArea => "semi_static_area",
            SchemeKind::Dynamic => "dynamic",
        }
    }

    pub fn uses_rem(&self) -> bool {
        matches!(self, SchemeKind::SemiStatic | SchemeKind::SemiStaticArea | SchemeKind::Dynamic)
    }

    /// Γ used when the configuration leaves it unset.
    pub fn default_gamma_db(&self) -> Option<f64> {
        match self {
            SchemeKind::ModifiedLsa => Some(cept_margin_db(DEFAULT_NOISE_FIGURE_DB, CEPT_I_OVER_N_DB)),
            SchemeKind::SemiStatic => Some(DEFAULT_SEMI_STATIC_GAMMA_DB),
            SchemeKind::SemiStaticArea => Some(DEFAULT_SEMI_STATIC_AREA_GAMMA_DB),
            _ => None,
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SchemeKind::Off,
            SchemeKind::Fixed,
            SchemeKind::ModifiedLsa,
            SchemeKind::Cbrs,
            SchemeKind::SemiStatic,
            SchemeKind::SemiStaticArea,
            SchemeKind::Dynamic,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Interference-to-noise ratio of the regulatory protection criterion, dB.
pub const CEPT_I_OVER_N_DB: f64 = -6.0;
pub const DEFAULT_NOISE_FIGURE_DB: f64 = 9.0;
/// Calibrated margins of the reference scenario (see `remshare sweep`).
pub const DEFAULT_SEMI_STATIC_GAMMA_DB: f64 = -30.0;
pub const DEFAULT_SEMI_STATIC_AREA_GAMMA_DB: f64 = -20.0;
/// Candidate margins of a calibration sweep, dB.
pub const DEFAULT_GAMMA_SWEEP_DB: [f64; 7] = [-50.0, -40.0, -30.0, -20.0, -10.0, -3.0, 0.0];
/// Accepted loss of the outdoor 10th-percentile rate during calibration.
pub const DEFAULT_DEGRADATION_TARGET: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    pub name: SchemeKind,
    /// Γ for the belt schemes; `None` takes the scheme default.
    pub gamma_db: Option<f64>,
    /// Ψ: protected share of the interference-free rate, percent.
    pub psi_percent: f64,
    /// CBRS thresholds, dBm per `cbrs_reference_bandwidth_hz`.
    pub cbrs_pal_threshold_dbm: f64,
    pub cbrs_interference_limit_dbm: f64,
    pub cbrs_reference_bandwidth_hz: f64,
    pub cbrs_grid_spacing_m: f64,
    pub belt_spacing_m: f64,
    pub belt_offset_m: f64,
    pub update_period_ms: u64,
    pub rem_delay_ms: u64,
    pub goal: Goal,
    pub quantizer: QuantMode,
    pub location_error_m: f64,
    /// Factor applied to the controller's coupling estimate, 1 for an exact model.
    pub model_scale: f64,
    /// Power of every indoor BS under the `fixed` scheme, mW.
    pub fixed_power_mw: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            name: SchemeKind::Dynamic,
            gamma_db: None,
            psi_percent: 90.0,
            cbrs_pal_threshold_dbm: -96.0,
            cbrs_interference_limit_dbm: -80.0,
            cbrs_reference_bandwidth_hz: 10e6,
            cbrs_grid_spacing_m: 1.0,
            belt_spacing_m: 1.0,
            belt_offset_m: 0.5,
            update_period_ms: 10,
            rem_delay_ms: 1,
            goal: Goal::SumPower,
            quantizer: QuantMode::None,
            location_error_m: 0.0,
            model_scale: 1.0,
            fixed_power_mw: 0.0,
        }
    }
}

impl SchemeConfig {
    pub fn new(name: SchemeKind) -> Self {
        Self { name, ..Self::default() }
    }

    pub fn gamma(&self) -> Option<ProtectionBeltMargin> {
        self.gamma_db.or(self.name.default_gamma_db()).map(|gamma_db| ProtectionBeltMargin { gamma_db })
    }

    pub fn quantizer(&self) -> Quantizer {
        Quantizer::new(self.quantizer)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.psi_percent > 0.0 && self.psi_percent <= 100.0) {
            return bad(format!("scheme.psi_percent must be in (0, 100], got {}", self.psi_percent));
        }
        if self.update_period_ms == 0 {
            return bad("scheme.update_period_ms must be positive".into());
        }
        if !(self.belt_spacing_m > 0.0) || !(self.belt_offset_m >= 0.0) {
            return bad("scheme.belt_spacing_m must be positive and belt_offset_m non-negative".into());
        }
        if !(self.cbrs_grid_spacing_m > 0.0) || !(self.cbrs_reference_bandwidth_hz > 0.0) {
            return bad("scheme.cbrs_grid_spacing_m and cbrs_reference_bandwidth_hz must be positive".into());
        }
        if !(self.location_error_m >= 0.0) {
            return bad("scheme.location_error_m must be non-negative".into());
        }
        if !(self.model_scale > 0.0) || !self.model_scale.is_finite() {
            return bad("scheme.model_scale must be positive".into());
        }
        if !(self.fixed_power_mw >= 0.0) {
            return bad("scheme.fixed_power_mw must be non-negative".into());
        }
        if let Some(g) = self.gamma_db {
            if !g.is_finite() {
                return bad("scheme.gamma_db must be finite".into());
            }
        }
        Ok(())
    }
}
