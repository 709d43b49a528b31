//! One outdoor UE driving past the building on a flat channel.

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::fading::FadingMode;
use crate::scenario::{place_users, Network, Technology, UeConfig};
use crate::sim::campaign::parallel_map;
use crate::sim::engine::{placement_rng, Motion, SimContext, World, WorldOptions};
use crate::units::kmh_to_ms;

/// Window-averaged rates, averaged again over iterations.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MovingUeSeries {
    pub window_ms: u64,
    /// Start of each window.
    pub time_ms: Vec<u64>,
    /// Position of the moving UE at the start of each window.
    pub x_m: Vec<f64>,
    pub outdoor_bps: Vec<f64>,
    /// Mean over the indoor UEs.
    pub indoor_bps: Vec<f64>,
    pub mean_indoor_power_mw: Vec<f64>,
}

impl MovingUeSeries {
    pub fn path_length_m(config: &SimConfig) -> f64 {
        kmh_to_ms(config.moving.speed_kmh) * config.moving.duration_ms as f64 * 1e-3
    }
}

/// Runs the drive-by `config.moving.iterations` times; only the indoor drop
/// changes between iterations. The channel is forced flat.
pub fn moving_ue_scenario(config: &SimConfig) -> Result<MovingUeSeries> {
    let mut cfg = config.clone();
    cfg.link.fading = FadingMode::Awgn;
    cfg.campaign.horizon_ms = cfg.moving.duration_ms.max(cfg.scheme.update_period_ms);
    let m = cfg.moving.clone();
    let ctx = SimContext::new(cfg)?;
    let window = m.window_ms as usize;
    let n_windows = m.duration_ms as usize / window;
    if n_windows == 0 {
        return Err(Error::Config("moving.duration_ms is shorter than one window".into()));
    }
    let heading = m.heading_deg.to_radians();
    let v = kmh_to_ms(m.speed_kmh);
    let motion = Motion { start: m.start, velocity_mps: (v * heading.cos(), v * heading.sin()) };

    let runs = parallel_map(m.iterations, ctx.config.campaign.threads, |i| -> Result<_> {
        let mut counts = ctx.config.users.clone();
        counts.outdoor = 0;
        let mut rng = placement_rng(ctx.config.campaign.seed, i as u64);
        let mut ues = place_users(&ctx.config.scenario, &counts, &mut rng)?;
        let id = ues.len() as u32;
        ues.push(UeConfig {
            id,
            position: m.start,
            technology: Technology::Lte,
            speed_kmh: m.speed_kmh,
            antenna_gain_dbi: counts.antenna_gain_dbi,
            noise_figure_db: counts.noise_figure_db,
            network: Network::Outdoor,
        });
        let mut motions = vec![None; ues.len()];
        *motions.last_mut().expect("moving UE present") = Some(motion);
        let mut world = World::new(&ctx, ues, motions, i as u64, WorldOptions { record_traces: true })?;
        world.run(m.duration_ms);
        let traces = world.traces().expect("traces recorded");
        let outdoor =
            traces.iter().find(|t| t.network == Network::Outdoor).expect("moving UE kept").window_means(window);
        let indoor_traces: Vec<Vec<f64>> =
            traces.iter().filter(|t| t.network == Network::Indoor).map(|t| t.window_means(window)).collect();
        let indoor: Vec<f64> = (0..n_windows)
            .map(|k| {
                if indoor_traces.is_empty() {
                    0.0
                } else {
                    indoor_traces.iter().map(|t| t[k]).sum::<f64>() / indoor_traces.len() as f64
                }
            })
            .collect();
        let power: Vec<f64> = world
            .power_trace()
            .chunks_exact(window)
            .map(|c| {
                c.iter().map(|p| if p.is_empty() { 0.0 } else { p.iter().sum::<f64>() / p.len() as f64 }).sum::<f64>()
                    / window as f64
            })
            .collect();
        Ok((outdoor, indoor, power))
    });
    let mut out = MovingUeSeries {
        window_ms: m.window_ms,
        time_ms: (0..n_windows).map(|k| (k * window) as u64).collect(),
        x_m: (0..n_windows).map(|k| motion.position((k * window) as u64).x).collect(),
        outdoor_bps: vec![0.0; n_windows],
        indoor_bps: vec![0.0; n_windows],
        mean_indoor_power_mw: vec![0.0; n_windows],
    };
    let n_runs = runs.len() as f64;
    for run in runs {
        let (o, i, p) = run?;
        for k in 0..n_windows {
            out.outdoor_bps[k] += o[k] / n_runs;
            out.indoor_bps[k] += i[k] / n_runs;
            out.mean_indoor_power_mw[k] += p[k] / n_runs;
        }
    }
    Ok(out)
}
