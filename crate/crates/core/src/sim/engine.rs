//! One Monte Carlo iteration: fixed user drop, 1 ms ticks, per-RB signal and
//! interference bookkeeping, proportional-fair scheduling and the indoor power
//! controller.

use std::collections::BTreeMap;

use rand::SeedableRng;

use crate::config::SimConfig;
use crate::controllers::{
    cbrs_gaa_power, cbrs_pal_protection_area, dynamic_update, lsa_static_powers, scale_per_10mhz, solve_beta,
    DynamicInputs, SchemeKind,
};
use crate::error::{Error, Result};
use crate::fading::{sample_fading, FadingProcess};
use crate::geometry::Point;
use crate::link::{NoiseModel, RateMapper, SinrVector};
use crate::optim::PowerAllocation;
use crate::propagation::PropagationEnv;
use crate::rem::{
    due_for_update, perturb_location, quantize_beta, submit_report, InterferenceReport, RemConfig, RemStore,
};
use crate::scenario::{generate_protection_belt, restrict_to_protection_area, BsConfig, Network, Position3, UeConfig};
use crate::scheduler::{icic_power_mask, pf_schedule, update_average_rate, IcicMask, PfState};
use crate::sim::association::associate_ues;
use crate::sim::metrics::{IterationResult, UeSample, UeTrace};
use crate::units::{dbm_to_mw, linear_to_db};
use crate::SimRng;

/// Stream ids: iteration in the high bits, purpose in the low 40.
const PURPOSE_PLACEMENT: u64 = 0;
const PURPOSE_REM: u64 = 1;
const PURPOSE_LINK: u64 = 1 << 39;

/// Independent ChaCha stream for `(iteration, purpose)` under the master seed.
pub fn stream_rng(seed: u64, iteration: u64, purpose: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream((iteration << 40) | purpose);
    rng
}

pub fn placement_rng(seed: u64, iteration: u64) -> SimRng {
    stream_rng(seed, iteration, PURPOSE_PLACEMENT)
}

fn link_purpose(ue_id: u32, bs_index: usize) -> u64 {
    PURPOSE_LINK | (u64::from(ue_id) << 16) | bs_index as u64
}

/// Thermal noise of one RB plus the receiver noise figure, mW.
pub fn rb_noise_mw(rb_bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    dbm_to_mw(-174.0 + 10.0 * rb_bandwidth_hz.log10() + noise_figure_db)
}

/// Everything that is fixed for a whole campaign.
#[derive(Debug, Clone)]
pub struct SimContext {
    pub config: SimConfig,
    pub env: PropagationEnv,
    pub mapper: RateMapper,
    /// Outdoor BSs first, then indoor.
    pub bs: Vec<BsConfig>,
    pub n_outdoor_bs: usize,
    /// Indoor powers at tick 0, mW; constant for the static schemes.
    pub initial_indoor_mw: Vec<f64>,
}

impl SimContext {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let env = PropagationEnv::new(config.pathloss(), config.scenario.building.clone());
        let mapper = config.rate_mapper()?;
        let bs: Vec<BsConfig> = config.scenario.all_bs().cloned().collect();
        let n_outdoor_bs = config.scenario.outdoor_bs.len();
        let initial_indoor_mw = initial_indoor_powers(&config, &env)?;
        Ok(Self { config, env, mapper, bs, n_outdoor_bs, initial_indoor_mw })
    }

    pub fn indoor_bs(&self) -> &[BsConfig] {
        &self.bs[self.n_outdoor_bs..]
    }
}

/// Indoor powers a scheme starts from, mW: the whole allocation for the static
/// schemes, full power for the dynamic one, zero when the indoor network is off.
pub fn initial_indoor_powers(config: &SimConfig, env: &PropagationEnv) -> Result<Vec<f64>> {
    let s = &config.scenario;
    let scheme = &config.scheme;
    if !config.indoor_active() {
        return Ok(vec![0.0; s.indoor_bs.len()]);
    }
    let gamma = || {
        scheme
            .gamma()
            .map(|g| g.gamma_db)
            .ok_or_else(|| Error::Config(format!("scheme {} needs scheme.gamma_db", scheme.name)))
    };
    let powers = match scheme.name {
        SchemeKind::Off => vec![0.0; s.indoor_bs.len()],
        SchemeKind::Fixed => s.indoor_bs.iter().map(|b| scheme.fixed_power_mw.min(b.max_power_mw())).collect(),
        SchemeKind::Dynamic => s.indoor_bs.iter().map(BsConfig::max_power_mw).collect(),
        SchemeKind::ModifiedLsa | SchemeKind::SemiStatic => {
            let belt = generate_protection_belt(s, scheme.belt_spacing_m, scheme.belt_offset_m)?;
            lsa_static_powers(s, env, &belt, gamma()?)
        }
        SchemeKind::SemiStaticArea => {
            let belt = generate_protection_belt(s, scheme.belt_spacing_m, scheme.belt_offset_m)?;
            let area = restrict_to_protection_area(&belt, &s.protection_region)?;
            lsa_static_powers(s, env, &area, gamma()?)
        }
        SchemeKind::Cbrs => {
            let threshold =
                scale_per_10mhz(scheme.cbrs_pal_threshold_dbm, scheme.cbrs_reference_bandwidth_hz, s.bandwidth_hz);
            let limit =
                scale_per_10mhz(scheme.cbrs_interference_limit_dbm, scheme.cbrs_reference_bandwidth_hz, s.bandwidth_hz);
            let pal = cbrs_pal_protection_area(s, scheme.cbrs_grid_spacing_m, env, threshold);
            cbrs_gaa_power(&pal, &s.indoor_bs, env, limit, s.ue_height_m)?.p_tx
        }
    };
    Ok(powers)
}

/// Straight-line motion from `start` at a constant velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    pub start: Point,
    pub velocity_mps: (f64, f64),
}

impl Motion {
    pub fn position(&self, t_ms: u64) -> Point {
        let t = t_ms as f64 * 1e-3;
        Point::new(self.start.x + self.velocity_mps.0 * t, self.start.y + self.velocity_mps.1 * t)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorldOptions {
    pub record_traces: bool,
}

struct Link {
    gain: f64,
    fading: FadingProcess,
    rng: SimRng,
}

/// State of one iteration.
pub struct World<'c> {
    ctx: &'c SimContext,
    ues: Vec<UeConfig>,
    motion: Vec<Option<Motion>>,
    serving: Vec<Option<usize>>,
    /// `links[u][b]`, populated for active BSs only.
    links: Vec<Vec<Option<Link>>>,
    noise_rb_mw: Vec<f64>,
    active: Vec<usize>,
    bs_ues: Vec<Vec<usize>>,
    network_index: Vec<usize>,
    indoor: PowerAllocation,
    masks: Vec<IcicMask>,
    cqi: Vec<Vec<u8>>,
    pf: Vec<PfState>,
    rem: RemStore,
    rem_rng: SimRng,
    sinr: Vec<SinrVector>,
    warmup_ms: u64,
    served_bits: Vec<f64>,
    measured_ticks: u64,
    power_time_sum: f64,
    updates: usize,
    failures: usize,
    last_failure: Option<Error>,
    traces: Option<Vec<UeTrace>>,
    power_trace: Vec<Vec<f64>>,
}

impl<'c> World<'c> {
    /// Drops `ues` into the scenario. Indoor UEs are discarded when the indoor
    /// network is off; `motion[i]` moves UE `i` if present.
    pub fn new(
        ctx: &'c SimContext,
        ues: Vec<UeConfig>,
        motion: Vec<Option<Motion>>,
        iteration: u64,
        options: WorldOptions,
    ) -> Result<Self> {
        let cfg = &ctx.config;
        let s = &cfg.scenario;
        if motion.len() != ues.len() {
            return Err(Error::Invariant("one motion entry per UE".into()));
        }
        let (ues, motion): (Vec<_>, Vec<_>) =
            ues.into_iter().zip(motion).filter(|(u, _)| cfg.indoor_active() || u.network == Network::Outdoor).unzip();
        let n_bs = ctx.bs.len();
        let assoc = associate_ues(&ues, &ctx.bs, &ctx.env, s.ue_height_m);
        let serving: Vec<Option<usize>> = ues
            .iter()
            .map(|u| assoc.get(&u.id).map(|id| ctx.bs.iter().position(|b| b.id == *id).expect("associated BS exists")))
            .collect();
        let mut bs_ues = vec![Vec::new(); n_bs];
        for (u, sv) in serving.iter().enumerate() {
            if let Some(b) = sv {
                bs_ues[*b].push(u);
            }
        }
        for list in &mut bs_ues {
            list.sort_by_key(|&u| ues[u].id);
        }
        let active: Vec<usize> = (0..n_bs).filter(|&b| !bs_ues[b].is_empty()).collect();
        let network_index = (0..n_bs).map(|b| if b < ctx.n_outdoor_bs { b } else { b - ctx.n_outdoor_bs }).collect();

        let mut links = Vec::with_capacity(ues.len());
        for ue in &ues {
            let rx = Position3::new(ue.position.x, ue.position.y, s.ue_height_m);
            let row = (0..n_bs)
                .map(|b| {
                    active.contains(&b).then(|| {
                        let mut rng = stream_rng(cfg.campaign.seed, iteration, link_purpose(ue.id, b));
                        let fading = FadingProcess::new(cfg.link.fading, s.n_rb, ue.speed_kmh, s.carrier_hz, &mut rng);
                        Link { gain: ctx.env.link_gain(&ctx.bs[b], &rx, ue.antenna_gain_dbi), fading, rng }
                    })
                })
                .collect();
            links.push(row);
        }

        let pf = bs_ues
            .iter()
            .map(|list| PfState::new(cfg.scheduler.pf_params(), list.iter().map(|&u| ues[u].id)))
            .collect();
        let rem = RemStore::new(RemConfig {
            rem_delay_ms: cfg.scheme.rem_delay_ms,
            update_period_ms: cfg.scheme.update_period_ms,
            quantizer: cfg.scheme.quantizer(),
            location_error_m: cfg.scheme.location_error_m,
        });
        let traces = options.record_traces.then(|| {
            ues.iter().zip(&serving).map(|(u, sv)| UeTrace::new(u.id, u.network, sv.map(|b| ctx.bs[b].id))).collect()
        });
        let n = ues.len();
        let mut world = World {
            ctx,
            noise_rb_mw: ues.iter().map(|u| rb_noise_mw(s.rb_bandwidth_hz, u.noise_figure_db)).collect(),
            ues,
            motion,
            serving,
            links,
            active,
            bs_ues,
            network_index,
            indoor: PowerAllocation::fixed(ctx.initial_indoor_mw.clone()),
            masks: Vec::new(),
            cqi: vec![vec![0; s.n_rb]; n],
            pf,
            rem,
            rem_rng: stream_rng(cfg.campaign.seed, iteration, PURPOSE_REM),
            sinr: vec![SinrVector::zeros(s.n_rb); n],
            warmup_ms: cfg.warmup_ms(),
            served_bits: vec![0.0; n],
            measured_ticks: 0,
            power_time_sum: 0.0,
            updates: 0,
            failures: 0,
            last_failure: None,
            traces,
            power_trace: Vec::new(),
        };
        world.rebuild_masks();
        Ok(world)
    }

    pub fn ues(&self) -> &[UeConfig] {
        &self.ues
    }

    /// Serving BS id of every UE, in UE order.
    pub fn serving_ids(&self) -> Vec<Option<u32>> {
        self.serving.iter().map(|s| s.map(|b| self.ctx.bs[b].id)).collect()
    }

    /// Assigned total power of every BS, mW; zero for BSs without UEs.
    pub fn bs_power_mw(&self) -> Vec<f64> {
        (0..self.ctx.bs.len()).map(|b| self.assigned_power(b)).collect()
    }

    /// Per-RB transmit power of every BS, mW.
    pub fn per_rb_power_mw(&self) -> Vec<&[f64]> {
        self.masks.iter().map(|m| m.per_rb_power_mw.as_slice()).collect()
    }

    pub fn indoor_allocation(&self) -> &PowerAllocation {
        &self.indoor
    }

    pub fn sinr_vectors(&self) -> &[SinrVector] {
        &self.sinr
    }

    pub fn traces(&self) -> Option<&[UeTrace]> {
        self.traces.as_deref()
    }

    /// Indoor powers after every tick (recorded with traces only).
    pub fn power_trace(&self) -> &[Vec<f64>] {
        &self.power_trace
    }

    pub fn last_controller_failure(&self) -> Option<&Error> {
        self.last_failure.as_ref()
    }

    pub fn rem(&self) -> &RemStore {
        &self.rem
    }

    fn assigned_power(&self, b: usize) -> f64 {
        if self.bs_ues[b].is_empty() {
            0.0
        } else if b < self.ctx.n_outdoor_bs {
            self.ctx.bs[b].max_power_mw()
        } else {
            self.indoor.p_tx[b - self.ctx.n_outdoor_bs]
        }
    }

    fn rebuild_masks(&mut self) {
        let n_rb = self.ctx.config.scenario.n_rb;
        let icic = self.ctx.config.scheduler.icic;
        self.masks = (0..self.ctx.bs.len())
            .map(|b| {
                let p = self.assigned_power(b);
                if icic {
                    icic_power_mask(self.network_index[b], p, n_rb)
                } else {
                    IcicMask::flat(p, n_rb)
                }
            })
            .collect();
    }

    fn controller_inputs(&self) -> DynamicInputs<'c> {
        let cfg = &self.ctx.config;
        DynamicInputs {
            env: &self.ctx.env,
            indoor_bs: self.ctx.indoor_bs(),
            victim_height_m: cfg.scenario.ue_height_m,
            victim_gain_dbi: cfg.users.antenna_gain_dbi,
            noise_mw: NoiseModel::new(cfg.scenario.bandwidth_hz, cfg.users.noise_figure_db).power_mw(),
            model_scale: cfg.scheme.model_scale,
            goal: cfg.scheme.goal,
        }
    }

    /// Advances the world by the tick starting at `t_ms`.
    pub fn step(&mut self, t_ms: u64) {
        let ctx = self.ctx;
        let cfg = &ctx.config;
        let n_rb = cfg.scenario.n_rb;
        let n = self.ues.len();

        // (1) mobility and fading
        for u in 0..n {
            if let Some(m) = self.motion[u] {
                let p = m.position(t_ms);
                self.ues[u].position = p;
                let rx = Position3::new(p.x, p.y, cfg.scenario.ue_height_m);
                for (b, link) in self.links[u].iter_mut().enumerate() {
                    if let Some(link) = link {
                        link.gain = ctx.env.link_gain(&ctx.bs[b], &rx, self.ues[u].antenna_gain_dbi);
                    }
                }
            }
            for link in self.links[u].iter_mut().flatten() {
                sample_fading(&mut link.fading, 1.0, &mut link.rng);
            }
        }

        // (2) per-RB signal, own-network and cross-network interference
        for u in 0..n {
            let sv = &mut self.sinr[u];
            sv.signal.fill(0.0);
            sv.i_in.fill(0.0);
            sv.i_out.fill(0.0);
            sv.noise.fill(self.noise_rb_mw[u]);
            let Some(s) = self.serving[u] else { continue };
            let own = ctx.bs[s].network;
            for &b in &self.active {
                let link = self.links[u][b].as_ref().expect("links exist for active BSs");
                let mask = &self.masks[b].per_rb_power_mw;
                let fad = link.fading.gains();
                let target = if b == s {
                    &mut sv.signal
                } else if ctx.bs[b].network == own {
                    &mut sv.i_in
                } else {
                    &mut sv.i_out
                };
                for rb in 0..n_rb {
                    target[rb] += mask[rb] * link.gain * fad[rb];
                }
            }
        }

        // (3) CQI for the next tick and β reports
        let table = &ctx.mapper.table;
        let new_cqi: Vec<Vec<u8>> = self
            .sinr
            .iter()
            .zip(&self.serving)
            .map(|(sv, s)| {
                if s.is_some() {
                    (0..n_rb).map(|rb| table.cqi_for_linear(sv.sinr(rb))).collect()
                } else {
                    vec![0; n_rb]
                }
            })
            .collect();
        let reporting = cfg.scheme.name == SchemeKind::Dynamic && cfg.indoor_active();
        let mut reported = vec![f64::NAN; n];
        if reporting {
            let q = cfg.scheme.quantizer();
            for u in 0..n {
                if self.ues[u].network != Network::Outdoor || self.serving[u].is_none() {
                    continue;
                }
                let beta = solve_beta(&self.sinr[u], cfg.scheme.psi_percent, &ctx.mapper, self.ues[u].technology);
                let beta_db = quantize_beta(&q, beta.beta_db);
                reported[u] = beta_db;
                let p = self.ues[u].position;
                let mut report =
                    InterferenceReport { ue_id: self.ues[u].id, x: p.x, y: p.y, beta_db, timestamp_ms: t_ms };
                if cfg.scheme.location_error_m > 0.0 {
                    report = perturb_location(&report, cfg.scheme.location_error_m, &mut self.rem_rng);
                }
                submit_report(&mut self.rem, report, t_ms);
            }
        }

        // (4) scheduling on last tick's CQI, (5) serving at the CQI the channel supports now
        let mut served = vec![0.0; n];
        let mut rbs = vec![0u32; n];
        for &b in &self.active {
            let cands = &self.bs_ues[b];
            let ids: Vec<u32> = cands.iter().map(|&u| self.ues[u].id).collect();
            let rates: Vec<Vec<f64>> = cands
                .iter()
                .map(|&u| {
                    let tech = self.ues[u].technology;
                    self.cqi[u].iter().map(|&c| ctx.mapper.rb_rate_for_cqi(c, tech)).collect()
                })
                .collect();
            let alloc = pf_schedule(&ids, &rates, &self.pf[b]);
            for (rb, owner) in alloc.iter().enumerate() {
                let Some(id) = owner else { continue };
                let i = ids.binary_search(id).expect("scheduled UE is a candidate");
                let u = cands[i];
                let cqi = self.cqi[u][rb].min(new_cqi[u][rb]);
                served[u] += ctx.mapper.rb_rate_for_cqi(cqi, self.ues[u].technology);
                rbs[u] += 1;
            }
            let map: BTreeMap<u32, f64> = cands.iter().map(|&u| (self.ues[u].id, served[u])).collect();
            update_average_rate(&mut self.pf[b], &map);
        }
        self.cqi = new_cqi;

        if t_ms >= self.warmup_ms {
            for u in 0..n {
                self.served_bits[u] += served[u] * 1e-3;
            }
            self.measured_ticks += 1;
            let p = &self.indoor.p_tx;
            if !p.is_empty() {
                self.power_time_sum += p.iter().sum::<f64>() / p.len() as f64;
            }
        }
        if let Some(traces) = &mut self.traces {
            for (u, tr) in traces.iter_mut().enumerate() {
                let sv = &self.sinr[u];
                let mean_sinr = if self.serving[u].is_some() {
                    (0..n_rb).map(|rb| sv.sinr(rb)).sum::<f64>() / n_rb as f64
                } else {
                    0.0
                };
                let (potential, step) = if self.serving[u].is_some() {
                    let f = ctx.mapper.tech_factor(self.ues[u].technology);
                    let r: f64 = (0..n_rb).map(|rb| ctx.mapper.rb_rate(sv.sinr(rb))).sum();
                    let d: f64 = (0..n_rb).map(|rb| ctx.mapper.rb_cqi_step(sv.sinr(rb))).sum();
                    (r * f, d * f)
                } else {
                    (0.0, 0.0)
                };
                tr.served_bps.push(served[u]);
                tr.wideband_sinr_db.push(linear_to_db(mean_sinr));
                tr.potential_bps.push(potential);
                tr.cqi_step_bps.push(step);
                tr.rbs.push(rbs[u]);
                tr.reported_beta_db.push(reported[u]);
            }
        }

        // (6) controller
        if reporting && due_for_update(&self.rem, t_ms) {
            let reports = self.rem.snapshot(t_ms);
            let outcome = dynamic_update(&reports, &self.indoor, &self.controller_inputs());
            self.updates += 1;
            if let Some(e) = outcome.failure {
                self.failures += 1;
                self.last_failure = Some(e);
            }
            self.indoor = outcome.allocation;
            self.rebuild_masks();
        }
        if self.traces.is_some() {
            self.power_trace.push(self.indoor.p_tx.clone());
        }
    }

    /// Runs ticks `0..horizon_ms`.
    pub fn run(&mut self, horizon_ms: u64) {
        for t in 0..horizon_ms {
            self.step(t);
        }
    }

    pub fn result(&self, iteration: usize) -> IterationResult {
        let secs = self.measured_ticks as f64 * 1e-3;
        let ues = self
            .ues
            .iter()
            .zip(&self.served_bits)
            .map(|(u, &bits)| UeSample {
                iteration,
                ue_id: u.id,
                network: u.network,
                technology: u.technology,
                x: u.position.x,
                y: u.position.y,
                mean_rate_bps: if secs > 0.0 { bits / secs } else { 0.0 },
            })
            .collect();
        IterationResult {
            iteration,
            ues,
            mean_indoor_power_mw: if self.measured_ticks > 0 {
                self.power_time_sum / self.measured_ticks as f64
            } else {
                0.0
            },
            controller_updates: self.updates,
            controller_failures: self.failures,
        }
    }
}

/// Free-function form of [`World::step`].
pub fn step(world: &mut World<'_>, t_ms: u64) {
    world.step(t_ms);
}
