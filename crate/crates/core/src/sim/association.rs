//! Serving-cell selection at the start of an iteration.

use std::collections::BTreeMap;

use crate::propagation::PropagationEnv;
use crate::scenario::{BsConfig, Position3, UeConfig};

/// Received power at `ue` from `bs` transmitting at full power, dBm.
pub fn received_power_dbm(env: &PropagationEnv, bs: &BsConfig, ue: &UeConfig, ue_height_m: f64) -> f64 {
    let rx = Position3::new(ue.position.x, ue.position.y, ue_height_m);
    bs.max_power_dbm + bs.antenna_gain_dbi + ue.antenna_gain_dbi - env.pathloss_db(&bs.position, &rx)
}

/// Strongest BS of the UE's own network at full power; ties go to the lowest
/// BS id. UEs whose network has no BS are left out of the map.
pub fn associate_ues(
    ues: &[UeConfig],
    bs_list: &[BsConfig],
    env: &PropagationEnv,
    ue_height_m: f64,
) -> BTreeMap<u32, u32> {
    let mut out = BTreeMap::new();
    for ue in ues {
        let mut best: Option<(f64, u32)> = None;
        for bs in bs_list.iter().filter(|b| b.network == ue.network) {
            let p = received_power_dbm(env, bs, ue, ue_height_m);
            best = match best {
                Some((bp, bid)) if p < bp || (p == bp && bid < bs.id) => Some((bp, bid)),
                _ => Some((p, bs.id)),
            };
        }
        if let Some((_, id)) = best {
            out.insert(ue.id, id);
        }
    }
    out
}
