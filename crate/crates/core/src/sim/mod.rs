//! Tick-level downlink simulation and Monte Carlo campaigns.

pub mod association;
pub mod campaign;
pub mod engine;
pub mod metrics;
pub mod moving;
pub mod output;

pub use association::{associate_ues, received_power_dbm};
pub use campaign::{degradation, parallel_map, run_campaign, run_iteration, run_iterations, run_sweep};
pub use engine::{initial_indoor_powers, rb_noise_mw, step, stream_rng, Motion, SimContext, World, WorldOptions};
pub use metrics::{
    empirical_cdf, mean_ci95, percentile_nearest_rank, IterationResult, MetricsSummary, NetworkSummary, UeSample,
    UeTrace,
};
pub use moving::{moving_ue_scenario, MovingUeSeries};
