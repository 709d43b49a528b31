//! Log-distance pathloss with a wall penetration term, link gains and the
//! indoor-BS-to-victim coupling matrix.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{Point, Polygon};
use crate::scenario::{BsConfig, Position3};
use crate::units::db_to_linear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkClass {
    OutdoorToOutdoor,
    IndoorToIndoor,
    CrossWall,
}

impl LinkClass {
    pub fn classify(a_indoor: bool, b_indoor: bool) -> Self {
        match (a_indoor, b_indoor) {
            (true, true) => LinkClass::IndoorToIndoor,
            (false, false) => LinkClass::OutdoorToOutdoor,
            _ => LinkClass::CrossWall,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Loss at 1 m, dB.
    pub reference_loss_db: f64,
    pub exponent: f64,
    #[serde(default)]
    pub wall_loss_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathlossModel {
    pub outdoor_to_outdoor: LinkParams,
    pub indoor_to_indoor: LinkParams,
    pub cross_wall: LinkParams,
}

/// Free-space loss at 1 m for the given carrier.
pub fn free_space_reference_db(carrier_hz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * carrier_hz / crate::units::SPEED_OF_LIGHT).log10()
}

impl PathlossModel {
    pub fn reference(carrier_hz: f64) -> Self {
        let reference_loss_db = free_space_reference_db(carrier_hz);
        PathlossModel {
            outdoor_to_outdoor: LinkParams { reference_loss_db, exponent: 3.0, wall_loss_db: 0.0 },
            indoor_to_indoor: LinkParams { reference_loss_db, exponent: 2.5, wall_loss_db: 0.0 },
            cross_wall: LinkParams { reference_loss_db, exponent: 3.0, wall_loss_db: 20.0 },
        }
    }

    pub fn params(&self, class: LinkClass) -> &LinkParams {
        match class {
            LinkClass::OutdoorToOutdoor => &self.outdoor_to_outdoor,
            LinkClass::IndoorToIndoor => &self.indoor_to_indoor,
            LinkClass::CrossWall => &self.cross_wall,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("outdoor_to_outdoor", &self.outdoor_to_outdoor),
            ("indoor_to_indoor", &self.indoor_to_indoor),
            ("cross_wall", &self.cross_wall),
        ] {
            if !(p.exponent > 0.0) || !p.reference_loss_db.is_finite() {
                return Err(crate::Error::Config(format!("pathloss.{name}: exponent must be > 0")));
            }
            if !(p.wall_loss_db >= 0.0) {
                return Err(crate::Error::Config(format!("pathloss.{name}: wall loss must be >= 0")));
            }
        }
        Ok(())
    }

    /// Loss for a given class and 3-D distance. Distances below 1 m are
    /// clamped to the 1 m reference; the returned flag reports the clamp.
    pub fn loss_db(&self, class: LinkClass, distance_m: f64) -> (f64, bool) {
        let p = self.params(class);
        let clamped = !(distance_m >= 1.0);
        let d = if clamped { 1.0 } else { distance_m };
        let wall = if class == LinkClass::CrossWall { p.wall_loss_db } else { 0.0 };
        (p.reference_loss_db + 10.0 * p.exponent * d.log10() + wall, clamped)
    }
}

/// A pathloss model bound to the building it classifies links against.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationEnv {
    pub model: PathlossModel,
    pub building: Polygon,
}

impl PropagationEnv {
    pub fn new(model: PathlossModel, building: Polygon) -> Self {
        Self { model, building }
    }

    pub fn class_of(&self, a: &Position3, b: &Position3) -> LinkClass {
        LinkClass::classify(self.building.contains(&a.planar()), self.building.contains(&b.planar()))
    }

    pub fn pathloss_db(&self, a: &Position3, b: &Position3) -> f64 {
        self.pathloss_db_checked(a, b).0
    }

    pub fn pathloss_db_checked(&self, a: &Position3, b: &Position3) -> (f64, bool) {
        self.model.loss_db(self.class_of(a, b), a.distance(b))
    }

    /// Linear gain from `bs` to a receiver at `rx` with antenna gain `g_rx_dbi`.
    pub fn link_gain(&self, bs: &BsConfig, rx: &Position3, g_rx_dbi: f64) -> f64 {
        coupling_gain(self.pathloss_db(&bs.position, rx), bs.antenna_gain_dbi, g_rx_dbi)
    }
}

pub fn coupling_gain(pl_db: f64, g_tx_dbi: f64, g_rx_dbi: f64) -> f64 {
    db_to_linear(-pl_db + g_tx_dbi + g_rx_dbi)
}

/// Gains from each indoor BS (columns) to each victim point (rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    pub entries: Vec<Vec<f64>>,
    pub victim_points: Vec<Point>,
    pub bs_ids: Vec<u32>,
}

impl CouplingMatrix {
    pub fn n_points(&self) -> usize {
        self.entries.len()
    }

    pub fn n_bs(&self) -> usize {
        self.bs_ids.len()
    }

    /// Estimated interference (mW) at every victim point for powers `p_mw`.
    pub fn interference(&self, p_mw: &[f64]) -> Vec<f64> {
        self.entries.iter().map(|row| row.iter().zip(p_mw).map(|(w, p)| w * p).sum()).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for row in &mut out.entries {
            for w in row.iter_mut() {
                *w *= factor;
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["x".to_string(), "y".to_string()];
        header.extend(self.bs_ids.iter().map(|id| format!("bs_{id}")));
        wtr.write_record(&header)?;
        for (p, row) in self.victim_points.iter().zip(&self.entries) {
            let mut rec = vec![p.x.to_string(), p.y.to_string()];
            rec.extend(row.iter().map(|w| format!("{w:e}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn build_coupling_matrix(
    env: &PropagationEnv,
    victim_points: &[Point],
    victim_height_m: f64,
    victim_gain_dbi: f64,
    indoor_bs: &[BsConfig],
) -> CouplingMatrix {
    let entries = victim_points
        .iter()
        .map(|p| {
            let rx = Position3::new(p.x, p.y, victim_height_m);
            indoor_bs.iter().map(|bs| env.link_gain(bs, &rx, victim_gain_dbi)).collect()
        })
        .collect();
    CouplingMatrix { entries, victim_points: victim_points.to_vec(), bs_ids: indoor_bs.iter().map(|b| b.id).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Network, Scenario};
    use rand::Rng;

    fn env() -> PropagationEnv {
        let s = Scenario::reference();
        PropagationEnv::new(PathlossModel::reference(s.carrier_hz), s.building)
    }

    #[test]
    fn reference_loss_at_3_5_ghz() {
        assert!((free_space_reference_db(3.5e9) - 43.32).abs() < 0.01);
    }

    #[test]
    fn one_metre_is_reference() {
        let m = PathlossModel::reference(3.5e9);
        let (pl, clamped) = m.loss_db(LinkClass::OutdoorToOutdoor, 1.0);
        assert_eq!(pl, m.outdoor_to_outdoor.reference_loss_db);
        assert!(!clamped);
        let (pl0, clamped0) = m.loss_db(LinkClass::OutdoorToOutdoor, 0.0);
        assert_eq!(pl0, pl);
        assert!(clamped0);
    }

    #[test]
    fn log_distance_slope() {
        let mut m = PathlossModel::reference(3.5e9);
        m.outdoor_to_outdoor.exponent = 2.0;
        let a = m.loss_db(LinkClass::OutdoorToOutdoor, 10.0).0;
        let b = m.loss_db(LinkClass::OutdoorToOutdoor, 100.0).0;
        assert!((b - a - 20.0).abs() < 1e-12);
    }

    #[test]
    fn wall_adds_exactly() {
        let mut m = PathlossModel::reference(3.5e9);
        m.cross_wall = m.indoor_to_indoor;
        m.cross_wall.wall_loss_db = 20.0;
        let d = 17.3;
        let inside = m.loss_db(LinkClass::IndoorToIndoor, d).0;
        let cross = m.loss_db(LinkClass::CrossWall, d).0;
        assert!((cross - inside - 20.0).abs() < 1e-12);
    }

    #[test]
    fn classification_follows_building() {
        let e = env();
        let inside = Position3::new(30.0, 60.0, 3.0);
        let outside = Position3::new(50.0, 20.0, 1.5);
        assert_eq!(e.class_of(&inside, &outside), LinkClass::CrossWall);
        assert_eq!(e.class_of(&outside, &inside), LinkClass::CrossWall);
        assert_eq!(e.class_of(&inside, &Position3::new(60.0, 48.0, 1.5)), LinkClass::IndoorToIndoor);
        assert_eq!(e.class_of(&outside, &Position3::new(10.0, 10.0, 1.5)), LinkClass::OutdoorToOutdoor);
    }

    #[test]
    fn coupling_gain_values() {
        assert!((coupling_gain(80.0, 0.0, 0.0) - 1e-8).abs() < 1e-22);
        assert_eq!(coupling_gain(0.0, 0.0, 0.0), 1.0);
        assert!((coupling_gain(100.0, 3.0, 2.0) / 10f64.powf(-9.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_gain_monotone() {
        assert!(coupling_gain(90.0, 0.0, 0.0) < coupling_gain(89.0, 0.0, 0.0));
        assert!(coupling_gain(90.0, 1.0, 0.0) > coupling_gain(90.0, 0.0, 0.0));
        assert!(coupling_gain(90.0, 0.0, 1.0) > coupling_gain(90.0, 0.0, 0.0));
    }

    #[test]
    fn single_entry_matrix() {
        let e = env();
        let bs = Scenario::reference().indoor_bs[0].clone();
        let p = Point::new(20.0, 30.0);
        let w = build_coupling_matrix(&e, &[p], 1.5, 0.0, std::slice::from_ref(&bs));
        assert_eq!(w.n_points(), 1);
        assert_eq!(w.n_bs(), 1);
        let expect = coupling_gain(e.pathloss_db(&bs.position, &Position3::new(20.0, 30.0, 1.5)), 0.0, 0.0);
        assert_eq!(w.entries[0][0], expect);
        assert_eq!(w.interference(&[0.0]), vec![0.0]);
    }

    #[test]
    fn matrix_product_matches_naive_sum() {
        let e = env();
        let mut rng = crate::rng_from_seed(9);
        let bss: Vec<BsConfig> = (0..2)
            .map(|i| BsConfig {
                id: 10 + i,
                position: Position3::new(rng.random_range(20.0..80.0), rng.random_range(45.0..65.0), 3.0),
                max_power_dbm: 21.0,
                antenna_gain_dbi: rng.random_range(0.0..3.0),
                network: Network::Indoor,
            })
            .collect();
        let pts: Vec<Point> =
            (0..3).map(|_| Point::new(rng.random_range(0.0..100.0), rng.random_range(0.0..35.0))).collect();
        let w = build_coupling_matrix(&e, &pts, 1.5, 1.0, &bss);
        let p = [rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)];
        let fast = w.interference(&p);
        for (n, pt) in pts.iter().enumerate() {
            let mut naive = 0.0;
            for (a, bs) in bss.iter().enumerate() {
                let rx = Position3::new(pt.x, pt.y, 1.5);
                let d = bs.position.distance(&rx);
                let params = e.model.cross_wall;
                let pl = params.reference_loss_db + 10.0 * params.exponent * d.log10() + params.wall_loss_db;
                naive += 10f64.powf((-pl + 1.0 + bs.antenna_gain_dbi) / 10.0) * p[a];
            }
            assert!((fast[n] - naive).abs() <= 1e-12 * naive);
        }
        for row in &w.entries {
            for &x in row {
                assert!(x > 0.0 && x <= 1.0);
            }
        }
    }

    #[test]
    fn csv_dump_has_header() {
        let e = env();
        let bs = Scenario::reference().indoor_bs;
        let w = build_coupling_matrix(&e, &[Point::new(1.0, 2.0)], 1.5, 0.0, &bs);
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,bs_3,bs_4,bs_5,bs_6,bs_7\n"));
    }
}
