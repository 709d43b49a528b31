//! Radio environment map: the store that carries interference reports from the
//! outdoor UEs to the indoor power controller, with transport delay, report
//! quantisation and location error.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantMode {
    None,
    TwoBit,
}

pub const TWO_BIT_LEVELS_DB: [f64; 4] = [-6.0, -3.0, 3.0, 6.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub mode: QuantMode,
}

impl Quantizer {
    pub fn new(mode: QuantMode) -> Self {
        Self { mode }
    }
}

/// Nearest representable level. Two-bit ties resolve to the lower level, so 0
/// dB reports as −3 dB.
pub fn quantize_beta(q: &Quantizer, beta_db: f64) -> f64 {
    match q.mode {
        QuantMode::None => beta_db,
        QuantMode::TwoBit => {
            let mut best = TWO_BIT_LEVELS_DB[0];
            for &level in &TWO_BIT_LEVELS_DB[1..] {
                if (beta_db - level).abs() < (beta_db - best).abs() {
                    best = level;
                }
            }
            best
        }
    }
}

/// β report of one outdoor UE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceReport {
    pub ue_id: u32,
    pub x: f64,
    pub y: f64,
    pub beta_db: f64,
    pub timestamp_ms: u64,
}

impl InterferenceReport {
    pub fn location(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Moves the reported location uniformly within a disk of radius `error_m`.
pub fn perturb_location<R: Rng + ?Sized>(report: &InterferenceReport, error_m: f64, rng: &mut R) -> InterferenceReport {
    if error_m <= 0.0 {
        return *report;
    }
    let r = error_m * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    InterferenceReport { x: report.x + r * theta.cos(), y: report.y + r * theta.sin(), ..*report }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemConfig {
    pub rem_delay_ms: u64,
    pub update_period_ms: u64,
    pub quantizer: Quantizer,
    pub location_error_m: f64,
}

impl Default for RemConfig {
    fn default() -> Self {
        Self {
            rem_delay_ms: 1,
            update_period_ms: 10,
            quantizer: Quantizer::new(QuantMode::None),
            location_error_m: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct StoredReport {
    visible_from_ms: u64,
    report: InterferenceReport,
}

/// Mean rate of one UE over a trailing window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub ue_id: u32,
    pub x: f64,
    pub y: f64,
    pub mean_rate_bps: f64,
    pub samples: usize,
}

/// Report log plus outdoor rate statistics.
#[derive(Debug, Clone)]
pub struct RemStore {
    pub config: RemConfig,
    log: Vec<StoredReport>,
    per_ue: BTreeMap<u32, Vec<usize>>,
    first_visible_ms: Option<u64>,
    rates: BTreeMap<u32, (Point, Vec<f64>)>,
    /// Trailing window of the rate statistics in samples; `None` keeps all.
    pub rate_window: Option<usize>,
}

impl RemStore {
    pub fn new(config: RemConfig) -> Self {
        Self {
            config,
            log: Vec::new(),
            per_ue: BTreeMap::new(),
            first_visible_ms: None,
            rates: BTreeMap::new(),
            rate_window: None,
        }
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    /// Newest report per UE among those visible at `now_ms`.
    pub fn snapshot(&self, now_ms: u64) -> Vec<InterferenceReport> {
        self.per_ue
            .values()
            .filter_map(|idx| {
                // visibility is non-decreasing along each UE's list
                let k = idx.partition_point(|&i| self.log[i].visible_from_ms <= now_ms);
                (k > 0).then(|| self.log[idx[k - 1]].report)
            })
            .collect()
    }

    pub fn first_visible_ms(&self) -> Option<u64> {
        self.first_visible_ms
    }

    pub fn record_rate(&mut self, ue_id: u32, location: Point, rate_bps: f64) {
        let entry = self.rates.entry(ue_id).or_insert_with(|| (location, Vec::new()));
        entry.0 = location;
        entry.1.push(rate_bps);
    }

    pub fn rate_records(&self) -> Vec<RateRecord> {
        self.rates
            .iter()
            .map(|(&ue_id, (loc, samples))| {
                let tail = match self.rate_window {
                    Some(w) if w < samples.len() => &samples[samples.len() - w..],
                    _ => &samples[..],
                };
                let mean = if tail.is_empty() { 0.0 } else { tail.iter().sum::<f64>() / tail.len() as f64 };
                RateRecord { ue_id, x: loc.x, y: loc.y, mean_rate_bps: mean, samples: tail.len() }
            })
            .collect()
    }

    /// Writes `time_ms,ue,x,y,beta_db` rows in submission order.
    pub fn write_report_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["time_ms", "ue", "x", "y", "beta_db"])?;
        for s in &self.log {
            let r = &s.report;
            wtr.write_record([
                r.timestamp_ms.to_string(),
                r.ue_id.to_string(),
                r.x.to_string(),
                r.y.to_string(),
                r.beta_db.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Appends a report submitted at `now_ms`; it becomes visible `rem_delay_ms` later.
pub fn submit_report(store: &mut RemStore, report: InterferenceReport, now_ms: u64) {
    debug_assert!(report.timestamp_ms <= now_ms, "report from the future");
    let visible_from_ms = now_ms + store.config.rem_delay_ms;
    store.per_ue.entry(report.ue_id).or_default().push(store.log.len());
    store.log.push(StoredReport { visible_from_ms, report });
    store.first_visible_ms = Some(store.first_visible_ms.map_or(visible_from_ms, |t| t.min(visible_from_ms)));
}

/// Controller cadence: the first update runs as soon as any report is visible,
/// then every `update_period_ms`.
pub fn due_for_update(store: &RemStore, now_ms: u64) -> bool {
    match store.first_visible_ms {
        Some(t0) if now_ms >= t0 => (now_ms - t0).is_multiple_of(store.config.update_period_ms),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;

    fn report(ue: u32, beta_db: f64, t: u64) -> InterferenceReport {
        InterferenceReport { ue_id: ue, x: 1.0, y: 2.0, beta_db, timestamp_ms: t }
    }

    fn store(delay: u64, period: u64) -> RemStore {
        RemStore::new(RemConfig { rem_delay_ms: delay, update_period_ms: period, ..RemConfig::default() })
    }

    #[test]
    fn delay_contract() {
        let mut s = store(1, 10);
        submit_report(&mut s, report(1, 0.0, 5), 5);
        assert!(s.snapshot(5).is_empty());
        assert_eq!(s.snapshot(6).len(), 1);

        let mut s = store(1000, 10);
        submit_report(&mut s, report(1, 0.0, 5), 5);
        assert!(s.snapshot(1004).is_empty());
        assert_eq!(s.snapshot(1005).len(), 1);
    }

    #[test]
    fn last_write_wins() {
        let mut s = store(1, 10);
        submit_report(&mut s, report(1, 1.0, 1), 1);
        submit_report(&mut s, report(1, 2.0, 2), 2);
        submit_report(&mut s, report(2, 7.0, 2), 2);
        assert_eq!(s.snapshot(2).iter().map(|r| r.beta_db).collect::<Vec<_>>(), vec![1.0]);
        let snap = s.snapshot(3);
        assert_eq!(snap.len(), 2);
        assert_eq!(snap[0].beta_db, 2.0);
    }

    #[test]
    fn quantizer() {
        let none = Quantizer::new(QuantMode::None);
        let two = Quantizer::new(QuantMode::TwoBit);
        assert_eq!(quantize_beta(&none, 4.87), 4.87);
        assert_eq!(quantize_beta(&two, 4.87), 6.0);
        assert_eq!(quantize_beta(&two, 0.0), -3.0);
        assert_eq!(quantize_beta(&two, -4.5), -6.0);
        assert_eq!(quantize_beta(&two, 4.5), 3.0);
        assert_eq!(quantize_beta(&two, 40.0), 6.0);
        assert_eq!(quantize_beta(&two, -1e9), -6.0);
    }

    #[test]
    fn location_error_is_uniform_disk() {
        let mut rng = rng_from_seed(3);
        let r = report(1, 0.0, 0);
        assert_eq!(perturb_location(&r, 0.0, &mut rng), r);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let p = perturb_location(&r, 50.0, &mut rng);
            let d = p.location().distance(&r.location());
            assert!(d <= 50.0);
            sum += d;
        }
        let mean = sum / n as f64;
        assert!((mean / (2.0 / 3.0 * 50.0) - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn update_cadence() {
        let mut s = store(0, 10);
        assert!(!due_for_update(&s, 0));
        submit_report(&mut s, report(1, 0.0, 0), 0);
        let due: Vec<u64> = (0..35).filter(|&t| due_for_update(&s, t)).collect();
        assert_eq!(due, vec![0, 10, 20, 30]);

        let mut s = store(1, 1000);
        submit_report(&mut s, report(1, 0.0, 0), 0);
        assert_eq!((0..1000).filter(|&t| due_for_update(&s, t)).count(), 1);
    }

    #[test]
    fn rate_window() {
        let mut s = store(1, 10);
        for r in [1.0, 2.0, 3.0, 4.0] {
            s.record_rate(9, Point::new(0.0, 0.0), r);
        }
        assert_eq!(s.rate_records()[0].mean_rate_bps, 2.5);
        s.rate_window = Some(2);
        assert_eq!(s.rate_records()[0].mean_rate_bps, 3.5);
    }

    #[test]
    fn csv_export() {
        let mut s = store(1, 10);
        submit_report(&mut s, report(4, -3.0, 7), 7);
        let mut buf = Vec::new();
        s.write_report_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "time_ms,ue,x,y,beta_db\n7,4,1,2,-3\n");
    }
}
