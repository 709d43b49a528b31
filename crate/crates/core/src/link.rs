//! Link abstraction: thermal noise, SINR bookkeeping, EESM compression, CQI
//! selection and the rate function used by both the scheduler and the UE-side
//! interference multiplier search.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Technology;
use crate::units::{db_to_linear, dbm_to_mw};

pub const THERMAL_DENSITY_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
}

impl NoiseModel {
    pub fn new(bandwidth_hz: f64, noise_figure_db: f64) -> Self {
        Self { bandwidth_hz, noise_figure_db }
    }

    pub fn power_mw(&self) -> f64 {
        dbm_to_mw(thermal_noise_power_dbm(self))
    }
}

/// kTB plus noise figure, in dBm.
pub fn thermal_noise_power_dbm(noise: &NoiseModel) -> f64 {
    THERMAL_DENSITY_DBM_HZ + 10.0 * noise.bandwidth_hz.log10() + noise.noise_figure_db
}

/// Per-RB received power components in mW. SINR = S / (N + I_in + I_out).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SinrVector {
    pub signal: Vec<f64>,
    pub noise: Vec<f64>,
    pub i_in: Vec<f64>,
    pub i_out: Vec<f64>,
}

impl SinrVector {
    pub fn zeros(n_rb: usize) -> Self {
        Self { signal: vec![0.0; n_rb], noise: vec![0.0; n_rb], i_in: vec![0.0; n_rb], i_out: vec![0.0; n_rb] }
    }

    pub fn len(&self) -> usize {
        self.signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_empty()
    }

    pub fn sinr(&self, rb: usize) -> f64 {
        self.sinr_scaled(rb, 1.0)
    }

    /// SINR with the external interference multiplied by `beta`.
    pub fn sinr_scaled(&self, rb: usize, beta: f64) -> f64 {
        self.signal[rb] / (self.noise[rb] + self.i_in[rb] + beta * self.i_out[rb])
    }

    pub fn sinrs(&self) -> Vec<f64> {
        (0..self.len()).map(|rb| self.sinr(rb)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqiEntry {
    pub cqi: u8,
    pub modulation: String,
    pub code_rate_x1024: u32,
    pub efficiency: f64,
    pub min_sinr_db: f64,
    pub eesm_beta: f64,
}

/// 15-row CQI table. Row `k - 1` describes CQI `k`; CQI 0 means out of range.
#[derive(Debug, Clone, PartialEq)]
pub struct CqiTable {
    rows: Vec<CqiEntry>,
    thresholds_linear: Vec<f64>,
}

const STANDARD_TABLE: &str = include_str!("../data/cqi_table.csv");

impl CqiTable {
    pub fn standard() -> Self {
        Self::from_csv_str(STANDARD_TABLE).expect("bundled CQI table is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<CqiEntry>, _>>()?;
        Self::from_rows(rows)
    }

    pub fn from_rows(rows: Vec<CqiEntry>) -> Result<Self> {
        if rows.len() != 15 {
            return Err(Error::Config(format!("CQI table needs 15 rows, got {}", rows.len())));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.cqi as usize != i + 1 {
                return Err(Error::Config(format!("CQI row {} has index {}", i + 1, r.cqi)));
            }
            if !(r.efficiency > 0.0) || !(r.eesm_beta > 0.0) || !r.min_sinr_db.is_finite() {
                return Err(Error::Config(format!("CQI row {} has invalid values", r.cqi)));
            }
        }
        for w in rows.windows(2) {
            if !(w[1].min_sinr_db > w[0].min_sinr_db) || !(w[1].efficiency > w[0].efficiency) {
                return Err(Error::Config(format!(
                    "CQI table must be strictly increasing (rows {} and {})",
                    w[0].cqi, w[1].cqi
                )));
            }
        }
        let thresholds_linear = rows.iter().map(|r| db_to_linear(r.min_sinr_db)).collect();
        Ok(Self { rows, thresholds_linear })
    }

    pub fn rows(&self) -> &[CqiEntry] {
        &self.rows
    }

    pub fn max_cqi(&self) -> u8 {
        self.rows.len() as u8
    }

    /// Spectral efficiency in bit/s/Hz; 0 for CQI 0.
    pub fn efficiency(&self, cqi: u8) -> f64 {
        if cqi == 0 {
            0.0
        } else {
            self.rows[cqi as usize - 1].efficiency
        }
    }

    pub fn max_efficiency(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.efficiency)
    }

    /// CQI for a linear effective SINR: the largest index whose threshold is met.
    pub fn cqi_for_linear(&self, sinr: f64) -> u8 {
        self.thresholds_linear.partition_point(|&t| t <= sinr) as u8
    }

    /// CQI for the SINRs of the subcarriers of one RB. Each candidate CQI is
    /// tested with its own EESM factor, highest first.
    pub fn select_cqi(&self, subcarrier_sinr: &[f64]) -> u8 {
        for row in self.rows.iter().rev() {
            let eff = eesm_effective_sinr(subcarrier_sinr, row.eesm_beta);
            if 10.0 * eff.log10() >= row.min_sinr_db {
                return row.cqi;
            }
        }
        0
    }
}

/// Exponential effective SINR mapping, linear in and out.
pub fn eesm_effective_sinr(sinr: &[f64], beta: f64) -> f64 {
    assert!(beta > 0.0 && !sinr.is_empty(), "EESM needs beta > 0 and a non-empty vector");
    // shift by the minimum so the exponentials cannot all underflow
    let min = sinr.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = sinr.iter().map(|g| (-(g - min) / beta).exp()).sum::<f64>() / sinr.len() as f64;
    min - beta * mean.ln()
}

pub fn sinr_to_cqi(effective_sinr_db: f64, table: &CqiTable) -> u8 {
    table.rows.partition_point(|r| r.min_sinr_db <= effective_sinr_db) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    NarrowbandCqi,
    Shannon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateMapper {
    pub mode: RateMode,
    pub rb_bandwidth_hz: f64,
    pub bonus_5g: f64,
    pub table: CqiTable,
}

impl RateMapper {
    pub fn narrowband(rb_bandwidth_hz: f64) -> Self {
        Self { mode: RateMode::NarrowbandCqi, rb_bandwidth_hz, bonus_5g: 1.05, table: CqiTable::standard() }
    }

    pub fn shannon(rb_bandwidth_hz: f64) -> Self {
        Self { mode: RateMode::Shannon, ..Self::narrowband(rb_bandwidth_hz) }
    }

    pub fn tech_factor(&self, tech: Technology) -> f64 {
        match tech {
            Technology::Lte => 1.0,
            Technology::Nr => self.bonus_5g,
        }
    }

    /// Rate of one RB at linear SINR `sinr` for a 4G UE, bit/s.
    pub fn rb_rate(&self, sinr: f64) -> f64 {
        match self.mode {
            RateMode::NarrowbandCqi => self.table.efficiency(self.table.cqi_for_linear(sinr)) * self.rb_bandwidth_hz,
            RateMode::Shannon => self.rb_bandwidth_hz * (1.0 + sinr).log2(),
        }
    }

    /// Rate one RB would gain at the next CQI level up, bit/s for a 4G UE;
    /// zero at the top level and in Shannon mode.
    pub fn rb_cqi_step(&self, sinr: f64) -> f64 {
        match self.mode {
            RateMode::NarrowbandCqi => {
                let c = self.table.cqi_for_linear(sinr);
                let up = (c + 1).min(self.table.max_cqi());
                (self.table.efficiency(up) - self.table.efficiency(c)) * self.rb_bandwidth_hz
            }
            RateMode::Shannon => 0.0,
        }
    }

    /// Rate of one RB transmitted with a known CQI, bit/s.
    pub fn rb_rate_for_cqi(&self, cqi: u8, tech: Technology) -> f64 {
        self.table.efficiency(cqi) * self.rb_bandwidth_hz * self.tech_factor(tech)
    }

    /// Rate over all RBs with the external interference scaled by `beta`.
    pub fn full_band_rate(&self, sinr: &SinrVector, beta: f64, tech: Technology) -> f64 {
        let sum: f64 = (0..sinr.len()).map(|rb| self.rb_rate(sinr.sinr_scaled(rb, beta))).sum();
        sum * self.tech_factor(tech)
    }
}

pub fn rate_of_allocation(tech: Technology, allocated_rbs: &[usize], sinr: &SinrVector, mapper: &RateMapper) -> f64 {
    let sum: f64 = allocated_rbs.iter().map(|&rb| mapper.rb_rate(sinr.sinr(rb))).sum();
    sum * mapper.tech_factor(tech)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn thermal_noise_values() {
        let n = |b, nf| thermal_noise_power_dbm(&NoiseModel::new(b, nf));
        assert!((n(20e6, 0.0) - (-100.99)).abs() < 0.005);
        assert_eq!(n(1.0, 0.0), -174.0);
        assert!((n(20e6, 9.0) - (-91.99)).abs() < 0.005);
    }

    #[test]
    fn eesm_identities() {
        assert!((eesm_effective_sinr(&[3.7; 12], 2.0) - 3.7).abs() < 1e-12);
        assert_eq!(eesm_effective_sinr(&[5.0], 7.0), 5.0);
        // hand evaluation: -ln((e^-1 + e^-10) / 2)
        let expected = -(((-1.0f64).exp() + (-10.0f64).exp()) / 2.0).ln();
        assert!((expected - 1.693_024).abs() < 1e-6);
        assert!((eesm_effective_sinr(&[1.0, 10.0], 1.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn cqi_boundaries() {
        let t = CqiTable::standard();
        assert_eq!(sinr_to_cqi(-20.0, &t), 0);
        for row in t.rows() {
            assert_eq!(sinr_to_cqi(row.min_sinr_db, &t), row.cqi);
        }
        assert_eq!(sinr_to_cqi(40.0, &t), 15);
        assert_eq!(t.cqi_for_linear(db_to_linear(10.3)), sinr_to_cqi(10.3, &t));
    }

    #[test]
    fn select_cqi_on_flat_rb_matches_threshold_lookup() {
        let t = CqiTable::standard();
        for db in [-10.0, -5.0, 0.0, 3.0, 9.9, 15.0, 30.0] {
            let g = db_to_linear(db);
            assert_eq!(t.select_cqi(&[g; 12]), t.cqi_for_linear(g));
        }
    }

    #[test]
    fn bad_tables_rejected() {
        let mut rows = CqiTable::standard().rows().to_vec();
        rows[4].min_sinr_db = rows[3].min_sinr_db;
        assert!(CqiTable::from_rows(rows).is_err());
        assert!(CqiTable::from_rows(vec![]).is_err());
    }

    #[test]
    fn allocation_rates() {
        let m = RateMapper::narrowband(180e3);
        let mut s = SinrVector::zeros(2);
        s.signal = vec![1e3, 1e3];
        s.noise = vec![1.0, 1.0];
        assert_eq!(rate_of_allocation(Technology::Lte, &[], &s, &m), 0.0);
        let r4 = rate_of_allocation(Technology::Lte, &[0], &s, &m);
        // 5.5547 bit/s/Hz x 180 kHz
        assert!((r4 - 999_846.0).abs() < 1e-6);
        let r5 = rate_of_allocation(Technology::Nr, &[0], &s, &m);
        assert!((r5 - 1.05 * r4).abs() < 1e-6);
        assert!((rate_of_allocation(Technology::Lte, &[0, 1], &s, &m) - 2.0 * r4).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn eesm_monotone(v in prop::collection::vec(0.0f64..100.0, 1..16), bump in 0.0f64..10.0, idx in 0usize..16, beta in 0.5f64..20.0) {
            let base = eesm_effective_sinr(&v, beta);
            let mut w = v.clone();
            let i = idx % w.len();
            w[i] += bump;
            prop_assert!(eesm_effective_sinr(&w, beta) >= base - 1e-12);
        }

        #[test]
        fn rate_monotone_in_interference_multiplier(
            s in prop::collection::vec(1e-9f64..1e-6, 4..8),
            iout in 1e-12f64..1e-8,
            b1 in 0.0f64..100.0,
            b2 in 0.0f64..100.0,
        ) {
            let m = RateMapper::narrowband(180e3);
            let n = s.len();
            let sv = SinrVector { signal: s, noise: vec![1e-10; n], i_in: vec![1e-10; n], i_out: vec![iout; n] };
            let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
            prop_assert!(m.full_band_rate(&sv, lo, Technology::Lte) >= m.full_band_rate(&sv, hi, Technology::Lte));
        }

        #[test]
        fn rate_additive_over_disjoint_rbs(s in prop::collection::vec(1e-10f64..1e-5, 6)) {
            let m = RateMapper::narrowband(180e3);
            let sv = SinrVector { signal: s, noise: vec![1e-10; 6], i_in: vec![0.0; 6], i_out: vec![0.0; 6] };
            let a = rate_of_allocation(Technology::Nr, &[0, 2, 4], &sv, &m);
            let b = rate_of_allocation(Technology::Nr, &[1, 3, 5], &sv, &m);
            let all = rate_of_allocation(Technology::Nr, &[0, 1, 2, 3, 4, 5], &sv, &m);
            prop_assert!((a + b - all).abs() <= 1e-9 * all.max(1.0));
        }
    }
}
