//! Two-tier protection: the outdoor network is the protected tier wherever its
//! own signal is strong, and the indoor network keeps the cumulative
//! interference there below a fixed limit.

use crate::error::Result;
use crate::geometry::Point;
use crate::optim::{solve_sum_power, Goal, PowerAllocation, PowerProblem};
use crate::propagation::{build_coupling_matrix, PropagationEnv};
use crate::scenario::{BsConfig, Position3, ProtectionGeometry, ProtectionKind, Scenario};
use crate::units::{dbm_to_mw, scale_to_bandwidth_db};

/// A level quoted per `reference_hz` restated for `bandwidth_hz`.
pub fn scale_per_10mhz(level_dbm: f64, reference_hz: f64, bandwidth_hz: f64) -> f64 {
    scale_to_bandwidth_db(level_dbm, reference_hz, bandwidth_hz)
}

/// Grid points (indoor ones included) where the strongest outdoor BS at full
/// power arrives above `pal_threshold_dbm`, already scaled to the system
/// bandwidth. The grid spans the whole area, corners included.
pub fn cbrs_pal_protection_area(
    scenario: &Scenario,
    grid_spacing_m: f64,
    env: &PropagationEnv,
    pal_threshold_dbm: f64,
) -> ProtectionGeometry {
    let nx = (scenario.area_width_m / grid_spacing_m).floor() as usize;
    let ny = (scenario.area_height_m / grid_spacing_m).floor() as usize;
    let mut points = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let p = Point::new(i as f64 * grid_spacing_m, j as f64 * grid_spacing_m);
            let rx = Position3::new(p.x, p.y, scenario.ue_height_m);
            let best = scenario
                .outdoor_bs
                .iter()
                .map(|bs| bs.max_power_dbm + bs.antenna_gain_dbi - env.pathloss_db(&bs.position, &rx))
                .fold(f64::NEG_INFINITY, f64::max);
            if best > pal_threshold_dbm {
                points.push(p);
            }
        }
    }
    ProtectionGeometry { points, kind: ProtectionKind::PalArea }
}

/// Sum-power allocation keeping the cumulative indoor interference at every
/// PAL point at or below `interference_limit_dbm` (system bandwidth).
pub fn cbrs_gaa_power(
    pal_area: &ProtectionGeometry,
    indoor_bs: &[BsConfig],
    env: &PropagationEnv,
    interference_limit_dbm: f64,
    victim_height_m: f64,
) -> Result<PowerAllocation> {
    let p_max = indoor_bs.iter().map(BsConfig::max_power_mw).fold(f64::INFINITY, f64::min);
    if pal_area.points.is_empty() {
        return Ok(PowerAllocation::fixed(indoor_bs.iter().map(BsConfig::max_power_mw).collect()));
    }
    let w = build_coupling_matrix(env, &pal_area.points, victim_height_m, 0.0, indoor_bs);
    let limit = dbm_to_mw(interference_limit_dbm);
    let problem = PowerProblem::from_coupling(&w, vec![limit; w.n_points()], p_max, Goal::SumPower)?;
    solve_sum_power(&problem)
}
