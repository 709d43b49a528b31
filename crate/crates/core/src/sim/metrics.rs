//! Per-UE traces and the campaign summary built from them.

use serde::{Deserialize, Serialize};

use crate::controllers::SchemeKind;
use crate::scenario::{Network, Technology};

/// Nearest-rank percentile: the smallest sample with at least `q` percent of
/// the samples at or below it. `None` on an empty set.
pub fn percentile_nearest_rank(samples: &[f64], q: f64) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
    Some(v[rank.min(v.len()) - 1])
}

/// Sample mean and the half-width of its normal 95% interval (0 for one sample).
pub fn mean_ci95(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, 1.96 * var.sqrt() / (n as f64).sqrt())
}

/// Empirical CDF: `(rate, fraction of samples <= rate)` at every sample.
pub fn empirical_cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().map(|(i, &x)| (x, (i + 1) as f64 / n)).collect()
}

/// Tick-by-tick record of one UE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeTrace {
    pub ue_id: u32,
    pub network: Network,
    pub serving_bs: Option<u32>,
    pub served_bps: Vec<f64>,
    /// Mean per-RB SINR in dB.
    pub wideband_sinr_db: Vec<f64>,
    /// Full-band rate the UE would get with every RB to itself, bit/s.
    pub potential_bps: Vec<f64>,
    /// Gain of `potential_bps` if every RB moved up one CQI level.
    pub cqi_step_bps: Vec<f64>,
    /// RBs granted in the tick.
    pub rbs: Vec<u32>,
    /// Reported β in dB, NaN when no report was sent.
    pub reported_beta_db: Vec<f64>,
}

impl UeTrace {
    pub fn new(ue_id: u32, network: Network, serving_bs: Option<u32>) -> Self {
        Self {
            ue_id,
            network,
            serving_bs,
            served_bps: Vec::new(),
            wideband_sinr_db: Vec::new(),
            potential_bps: Vec::new(),
            cqi_step_bps: Vec::new(),
            rbs: Vec::new(),
            reported_beta_db: Vec::new(),
        }
    }

    /// Total served bits over the recorded ticks divided by their duration.
    pub fn mean_rate_bps(&self) -> f64 {
        if self.served_bps.is_empty() {
            0.0
        } else {
            self.served_bps.iter().sum::<f64>() / self.served_bps.len() as f64
        }
    }

    /// Means over consecutive windows of `window` ticks; a short tail is dropped.
    pub fn window_means(&self, window: usize) -> Vec<f64> {
        self.served_bps.chunks_exact(window).map(|c| c.iter().sum::<f64>() / window as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeSample {
    pub iteration: usize,
    pub ue_id: u32,
    pub network: Network,
    pub technology: Technology,
    pub x: f64,
    pub y: f64,
    pub mean_rate_bps: f64,
}

/// What one iteration contributes to the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub iteration: usize,
    pub ues: Vec<UeSample>,
    /// Time average over the measured ticks of the mean indoor BS power, mW.
    pub mean_indoor_power_mw: f64,
    pub controller_updates: usize,
    pub controller_failures: usize,
}

impl IterationResult {
    pub fn network_mean(&self, network: Network) -> Option<f64> {
        let v: Vec<f64> = self.ues.iter().filter(|u| u.network == network).map(|u| u.mean_rate_bps).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    /// Mean over iterations of the per-iteration mean UE rate.
    pub mean_rate_bps: f64,
    pub ci95_bps: f64,
    /// Nearest-rank 10th percentile of the pooled per-UE mean rates.
    pub p10_rate_bps: f64,
    pub n_ues: usize,
}

impl NetworkSummary {
    fn from_iterations(results: &[IterationResult], network: Network) -> Self {
        let per_iter: Vec<f64> = results.iter().filter_map(|r| r.network_mean(network)).collect();
        let pooled: Vec<f64> = results
            .iter()
            .flat_map(|r| r.ues.iter())
            .filter(|u| u.network == network)
            .map(|u| u.mean_rate_bps)
            .collect();
        let (mean_rate_bps, ci95_bps) = mean_ci95(&per_iter);
        NetworkSummary {
            mean_rate_bps,
            ci95_bps,
            p10_rate_bps: percentile_nearest_rank(&pooled, 10.0).unwrap_or(0.0),
            n_ues: pooled.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub scheme: SchemeKind,
    pub iterations: usize,
    pub horizon_ms: u64,
    pub warmup_ms: u64,
    pub seed: u64,
    pub outdoor: NetworkSummary,
    pub indoor: NetworkSummary,
    pub mean_indoor_power_mw: f64,
    pub indoor_power_ci95_mw: f64,
    pub controller_updates: usize,
    pub controller_failures: usize,
    pub ue_samples: Vec<UeSample>,
}

impl MetricsSummary {
    pub fn aggregate(
        scheme: SchemeKind,
        horizon_ms: u64,
        warmup_ms: u64,
        seed: u64,
        results: &[IterationResult],
    ) -> Self {
        let powers: Vec<f64> = results.iter().map(|r| r.mean_indoor_power_mw).collect();
        let (mean_indoor_power_mw, indoor_power_ci95_mw) = mean_ci95(&powers);
        MetricsSummary {
            scheme,
            iterations: results.len(),
            horizon_ms,
            warmup_ms,
            seed,
            outdoor: NetworkSummary::from_iterations(results, Network::Outdoor),
            indoor: NetworkSummary::from_iterations(results, Network::Indoor),
            mean_indoor_power_mw,
            indoor_power_ci95_mw,
            controller_updates: results.iter().map(|r| r.controller_updates).sum(),
            controller_failures: results.iter().map(|r| r.controller_failures).sum(),
            ue_samples: results.iter().flat_map(|r| r.ues.iter().cloned()).collect(),
        }
    }

    pub fn network(&self, network: Network) -> &NetworkSummary {
        match network {
            Network::Outdoor => &self.outdoor,
            Network::Indoor => &self.indoor,
        }
    }

    pub fn rates(&self, network: Network) -> Vec<f64> {
        self.ue_samples.iter().filter(|u| u.network == network).map(|u| u.mean_rate_bps).collect()
    }

    pub fn cdf(&self, network: Network) -> Vec<(f64, f64)> {
        empirical_cdf(&self.rates(network))
    }
}
