//! Static belt protection: each indoor BS may radiate at most what keeps the
//! received power at every belt point below the noise floor shifted by −Γ.

use crate::link::THERMAL_DENSITY_DBM_HZ;
use crate::propagation::PropagationEnv;
use crate::scenario::{BsConfig, Position3, ProtectionGeometry, Scenario};

/// `−174 + 10 log10 B − Γ − G + PL`, dBm.
pub fn lsa_max_power_at_point(gamma_db: f64, bandwidth_hz: f64, g_tx_dbi: f64, pl_db: f64) -> f64 {
    THERMAL_DENSITY_DBM_HZ + 10.0 * bandwidth_hz.log10() - gamma_db - g_tx_dbi + pl_db
}

/// Largest received power allowed by an I/N criterion measured against the
/// noise floor including the receiver noise figure, dBm.
pub fn cept_max_rx_power_dbm(bandwidth_hz: f64, noise_figure_db: f64, i_over_n_db: f64) -> f64 {
    THERMAL_DENSITY_DBM_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db + i_over_n_db
}

/// Γ equivalent to an I/N criterion: −(NF + I/N), i.e. −3 dB for 9 dB and −6 dB.
pub fn cept_margin_db(noise_figure_db: f64, i_over_n_db: f64) -> f64 {
    -(noise_figure_db + i_over_n_db)
}

/// `min(P_MAX, min_n P_TX(x_n, y_n))` over the belt points, dBm.
pub fn lsa_static_power(
    belt: &ProtectionGeometry,
    bs: &BsConfig,
    gamma_db: f64,
    env: &PropagationEnv,
    bandwidth_hz: f64,
    victim_height_m: f64,
) -> f64 {
    belt.points
        .iter()
        .map(|p| {
            let pl = env.pathloss_db(&bs.position, &Position3::new(p.x, p.y, victim_height_m));
            lsa_max_power_at_point(gamma_db, bandwidth_hz, bs.antenna_gain_dbi, pl)
        })
        .fold(bs.max_power_dbm, f64::min)
}

/// Static power of every indoor BS of `scenario`, mW.
pub fn lsa_static_powers(
    scenario: &Scenario,
    env: &PropagationEnv,
    belt: &ProtectionGeometry,
    gamma_db: f64,
) -> Vec<f64> {
    scenario
        .indoor_bs
        .iter()
        .map(|bs| {
            crate::units::dbm_to_mw(lsa_static_power(
                belt,
                bs,
                gamma_db,
                env,
                scenario.bandwidth_hz,
                scenario.ue_height_m,
            ))
        })
        .collect()
}
