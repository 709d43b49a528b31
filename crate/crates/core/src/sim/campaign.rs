//! Monte Carlo campaigns: independent iterations merged in iteration order.

use crate::config::SimConfig;
use crate::controllers::{calibrate_margin, Calibration, SchemeKind, SweepStats};
use crate::error::Result;
use crate::scenario::{place_users, Network};
use crate::sim::engine::{placement_rng, SimContext, World, WorldOptions};
use crate::sim::metrics::{IterationResult, MetricsSummary, UeTrace};

/// Calls `f(i)` for every `i < n` on up to `threads` workers and returns the
/// results in index order.
pub fn parallel_map<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = if threads == 0 { std::thread::available_parallelism().map_or(1, |p| p.get()) } else { threads };
    let threads = threads.min(n).max(1);
    if threads == 1 {
        return (0..n).map(&f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = (0..threads)
            .map(|w| scope.spawn(move || (w..n).step_by(threads).map(|i| (i, f(i))).collect::<Vec<_>>()))
            .collect();
        for h in handles {
            for (i, v) in h.join().expect("worker panicked") {
                slots[i] = Some(v);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every index computed")).collect()
}

/// Result, optional per-UE traces and per-tick indoor powers of one iteration.
pub type IterationRun = (IterationResult, Option<Vec<UeTrace>>, Vec<Vec<f64>>);

/// Iteration `iteration` with a fresh user drop; traces are kept on request.
pub fn run_iteration(ctx: &SimContext, iteration: usize, options: WorldOptions) -> Result<IterationRun> {
    let cfg = &ctx.config;
    let mut rng = placement_rng(cfg.campaign.seed, iteration as u64);
    let ues = place_users(&cfg.scenario, &cfg.users, &mut rng)?;
    let motion = vec![None; ues.len()];
    let mut world = World::new(ctx, ues, motion, iteration as u64, options)?;
    world.run(cfg.campaign.horizon_ms);
    let result = world.result(iteration);
    let power = world.power_trace().to_vec();
    Ok((result, world.traces().map(<[UeTrace]>::to_vec), power))
}

pub fn run_iterations(ctx: &SimContext) -> Result<Vec<IterationResult>> {
    let cfg = &ctx.config;
    parallel_map(cfg.campaign.iterations, cfg.campaign.threads, |i| {
        run_iteration(ctx, i, WorldOptions::default()).map(|r| r.0)
    })
    .into_iter()
    .collect()
}

pub fn run_campaign(config: &SimConfig) -> Result<MetricsSummary> {
    let ctx = SimContext::new(config.clone())?;
    let results = run_iterations(&ctx)?;
    Ok(MetricsSummary::aggregate(
        config.scheme.name,
        config.campaign.horizon_ms,
        config.warmup_ms(),
        config.campaign.seed,
        &results,
    ))
}

impl From<&MetricsSummary> for SweepStats {
    fn from(m: &MetricsSummary) -> Self {
        SweepStats {
            outdoor_p10_bps: m.outdoor.p10_rate_bps,
            mean_indoor_power_mw: m.mean_indoor_power_mw,
            mean_indoor_rate_bps: m.indoor.mean_rate_bps,
            mean_outdoor_rate_bps: m.outdoor.mean_rate_bps,
        }
    }
}

/// Γ calibration of `config.scheme` (a belt scheme) on identical seeds: the
/// baseline runs with the indoor network off.
pub fn run_sweep(config: &SimConfig, gammas: &[f64], degradation_target: f64) -> Result<Calibration> {
    calibrate_margin(
        |gamma| {
            let mut c = config.clone();
            match gamma {
                None => c.scheme.name = SchemeKind::Off,
                Some(g) => c.scheme.gamma_db = Some(g),
            }
            Ok(SweepStats::from(&run_campaign(&c)?))
        },
        gammas,
        degradation_target,
    )
}

/// Mean outdoor rate of a summary relative to a baseline, as a loss fraction.
pub fn degradation(summary: &MetricsSummary, baseline: &MetricsSummary, network: Network) -> f64 {
    let b = baseline.network(network).mean_rate_bps;
    if b > 0.0 {
        1.0 - summary.network(network).mean_rate_bps / b
    } else {
        0.0
    }
}
