//! Per-cell downlink scheduling: soft-frequency-reuse power masks and a
//! proportional-fair RB allocator with an exponentially averaged rate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const ICIC_PARTS: usize = 3;
pub const ICIC_BOOST: f64 = 4.0;

/// Per-RB transmit power of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct IcicMask {
    pub per_rb_power_mw: Vec<f64>,
    pub partition: usize,
}

impl IcicMask {
    pub fn flat(total_power_mw: f64, n_rb: usize) -> Self {
        let p = if total_power_mw > 0.0 { total_power_mw / n_rb as f64 } else { 0.0 };
        Self { per_rb_power_mw: vec![p; n_rb], partition: 0 }
    }

    pub fn total_mw(&self) -> f64 {
        self.per_rb_power_mw.iter().sum()
    }

    /// Per-RB weights normalised to sum to one, so `weights * total` is the mask.
    pub fn weights(&self) -> Vec<f64> {
        let total = self.total_mw();
        if total > 0.0 {
            self.per_rb_power_mw.iter().map(|p| p / total).collect()
        } else {
            vec![0.0; self.per_rb_power_mw.len()]
        }
    }
}

/// RB range of ICIC part `part`; the remainder RBs go to the last part.
pub fn icic_partition_range(part: usize, n_rb: usize) -> std::ops::Range<usize> {
    let base = n_rb / ICIC_PARTS;
    let start = part * base;
    let end = if part == ICIC_PARTS - 1 { n_rb } else { start + base };
    start..end
}

/// Soft frequency reuse: the cell's own third of the band gets four times the
/// per-RB power of the rest, scaled so the RBs sum to `total_power_mw`.
pub fn icic_power_mask(cell_index: usize, total_power_mw: f64, n_rb: usize) -> IcicMask {
    let partition = cell_index % ICIC_PARTS;
    if !(total_power_mw > 0.0) {
        return IcicMask { per_rb_power_mw: vec![0.0; n_rb], partition };
    }
    let boosted = icic_partition_range(partition, n_rb);
    let weight = |rb: usize| if boosted.contains(&rb) { ICIC_BOOST } else { 1.0 };
    let weight_sum: f64 = (0..n_rb).map(weight).sum();
    let unit = total_power_mw / weight_sum;
    IcicMask { per_rb_power_mw: (0..n_rb).map(|rb| weight(rb) * unit).collect(), partition }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfParams {
    /// Weight of the newest sample in the moving average.
    pub smoothing: f64,
    /// Floor on the average rate in the PF metric, bit/s.
    pub epsilon: f64,
}

impl Default for PfParams {
    fn default() -> Self {
        Self { smoothing: 0.5, epsilon: 1.0 }
    }
}

/// Exponentially averaged served rate per UE of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PfState {
    pub params: PfParams,
    pub avg_rate: BTreeMap<u32, f64>,
}

impl PfState {
    pub fn new(params: PfParams, ue_ids: impl IntoIterator<Item = u32>) -> Self {
        Self { params, avg_rate: ue_ids.into_iter().map(|id| (id, 0.0)).collect() }
    }

    pub fn average(&self, ue: u32) -> f64 {
        self.avg_rate.get(&ue).copied().unwrap_or(0.0)
    }
}

/// Assigns every RB to the candidate with the largest instantaneous rate over
/// average rate. `rates[i][rb]` belongs to `candidates[i]`. RBs nobody can use
/// stay unassigned; ties go to the lowest UE id.
pub fn pf_schedule(candidates: &[u32], rates: &[Vec<f64>], state: &PfState) -> Vec<Option<u32>> {
    let n_rb = rates.first().map_or(0, Vec::len);
    let mut out = vec![None; n_rb];
    if candidates.is_empty() {
        return out;
    }
    let inv_avg: Vec<f64> = candidates.iter().map(|&id| 1.0 / state.average(id).max(state.params.epsilon)).collect();
    for (rb, slot) in out.iter_mut().enumerate() {
        let mut best: Option<(f64, u32)> = None;
        for (i, &id) in candidates.iter().enumerate() {
            let r = rates[i][rb];
            if r <= 0.0 {
                continue;
            }
            let metric = r * inv_avg[i];
            best = match best {
                None => Some((metric, id)),
                Some((m, bid)) if metric > m || (metric == m && id < bid) => Some((metric, id)),
                keep => keep,
            };
        }
        *slot = best.map(|(_, id)| id);
    }
    out
}

/// avg <- (1 - s) avg + s served, with unserved UEs contributing 0.
pub fn update_average_rate(state: &mut PfState, served: &BTreeMap<u32, f64>) {
    let s = state.params.smoothing;
    for (id, avg) in state.avg_rate.iter_mut() {
        let r = served.get(id).copied().unwrap_or(0.0);
        *avg = (1.0 - s) * *avg + s * r;
    }
}
