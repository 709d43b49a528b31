//! Result files. Every CSV opens with a `# config_hash=... seed=...` line so a
//! file can be traced back to the run that produced it; the JSON summary
//! carries the same fields inline.

use std::io::Write;

use serde::Serialize;

use crate::config::SimConfig;
use crate::controllers::Calibration;
use crate::error::Result;
use crate::scenario::{Network, Technology};
use crate::sim::metrics::{empirical_cdf, MetricsSummary};
use crate::sim::moving::MovingUeSeries;

pub fn provenance_line(config: &SimConfig) -> String {
    format!("# config_hash={} seed={}\n", config.hash(), config.campaign.seed)
}

fn csv_writer<W: Write>(mut out: W, config: &SimConfig) -> Result<csv::Writer<W>> {
    out.write_all(provenance_line(config).as_bytes())?;
    Ok(csv::Writer::from_writer(out))
}

fn network_name(n: Network) -> &'static str {
    match n {
        Network::Outdoor => "outdoor",
        Network::Indoor => "indoor",
    }
}

fn tech_name(t: Technology) -> &'static str {
    match t {
        Technology::Lte => "4G",
        Technology::Nr => "5G",
    }
}

/// `iteration,ue,network,tech,x_m,y_m,mean_rate_bps`
pub fn write_ue_csv<W: Write>(out: W, config: &SimConfig, summary: &MetricsSummary) -> Result<()> {
    let mut w = csv_writer(out, config)?;
    w.write_record(["iteration", "ue", "network", "tech", "x_m", "y_m", "mean_rate_bps"])?;
    for s in &summary.ue_samples {
        w.write_record([
            s.iteration.to_string(),
            s.ue_id.to_string(),
            network_name(s.network).to_string(),
            tech_name(s.technology).to_string(),
            s.x.to_string(),
            s.y.to_string(),
            s.mean_rate_bps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `rate_bps,cumulative_fraction` over the pooled per-UE means of `network`.
pub fn write_cdf_csv<W: Write>(out: W, config: &SimConfig, summary: &MetricsSummary, network: Network) -> Result<()> {
    let mut w = csv_writer(out, config)?;
    w.write_record(["rate_bps", "cumulative_fraction"])?;
    for (rate, frac) in empirical_cdf(&summary.rates(network)) {
        w.write_record([rate.to_string(), frac.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    config_hash: String,
    seed: u64,
    summary: &'a MetricsSummary,
    config: &'a SimConfig,
}

/// The whole summary plus the resolved configuration.
pub fn write_summary_json<W: Write>(mut out: W, config: &SimConfig, summary: &MetricsSummary) -> Result<()> {
    let doc = SummaryDocument { config_hash: config.hash(), seed: config.campaign.seed, summary, config };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// `gamma_db,outdoor_p10_bps,degradation_pct,mean_indoor_power_mw,mean_indoor_rate_bps,mean_outdoor_rate_bps`;
/// the indoor-off baseline row has gamma `off`.
pub fn write_sweep_csv<W: Write>(out: W, config: &SimConfig, calibration: &Calibration) -> Result<()> {
    let mut w = csv_writer(out, config)?;
    w.write_record([
        "gamma_db",
        "outdoor_p10_bps",
        "degradation_pct",
        "mean_indoor_power_mw",
        "mean_indoor_rate_bps",
        "mean_outdoor_rate_bps",
    ])?;
    for row in &calibration.rows {
        w.write_record([
            row.gamma_db.map_or_else(|| "off".to_string(), |g| g.to_string()),
            row.stats.outdoor_p10_bps.to_string(),
            (100.0 * row.degradation).to_string(),
            row.stats.mean_indoor_power_mw.to_string(),
            row.stats.mean_indoor_rate_bps.to_string(),
            row.stats.mean_outdoor_rate_bps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `time_ms,x_m,outdoor_bps,indoor_bps,mean_indoor_power_mw`
pub fn write_moving_csv<W: Write>(out: W, config: &SimConfig, series: &MovingUeSeries) -> Result<()> {
    let mut w = csv_writer(out, config)?;
    w.write_record(["time_ms", "x_m", "outdoor_bps", "indoor_bps", "mean_indoor_power_mw"])?;
    for k in 0..series.time_ms.len() {
        w.write_record([
            series.time_ms[k].to_string(),
            series.x_m[k].to_string(),
            series.outdoor_bps[k].to_string(),
            series.indoor_bps[k].to_string(),
            series.mean_indoor_power_mw[k].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per scheme: `scheme,network,mean_rate_bps,ci95_bps,p10_rate_bps,mean_indoor_power_mw`.
pub fn write_comparison_csv<W: Write>(out: W, config: &SimConfig, summaries: &[MetricsSummary]) -> Result<()> {
    let mut w = csv_writer(out, config)?;
    w.write_record(["scheme", "network", "mean_rate_bps", "ci95_bps", "p10_rate_bps", "mean_indoor_power_mw"])?;
    for s in summaries {
        for net in [Network::Outdoor, Network::Indoor] {
            let n = s.network(net);
            w.write_record([
                s.scheme.name().to_string(),
                network_name(net).to_string(),
                n.mean_rate_bps.to_string(),
                n.ci95_bps.to_string(),
                n.p10_rate_bps.to_string(),
                s.mean_indoor_power_mw.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
