//! The simulated world: building, base stations, user placement and the
//! protection point sets used by the static schemes.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Network {
    Outdoor,
    Indoor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Technology {
    #[serde(rename = "4G")]
    Lte,
    #[serde(rename = "5G")]
    Nr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn planar(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn distance(&self, other: &Position3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsConfig {
    pub id: u32,
    pub position: Position3,
    pub max_power_dbm: f64,
    #[serde(default)]
    pub antenna_gain_dbi: f64,
    pub network: Network,
}

impl BsConfig {
    pub fn max_power_mw(&self) -> f64 {
        crate::units::dbm_to_mw(self.max_power_dbm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeConfig {
    pub id: u32,
    pub position: Point,
    pub technology: Technology,
    pub speed_kmh: f64,
    pub antenna_gain_dbi: f64,
    pub noise_figure_db: f64,
    pub network: Network,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtectionKind {
    FullBelt,
    RestrictedArea,
    PalArea,
}

/// Victim points at which interference from the indoor network is limited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtectionGeometry {
    pub points: Vec<Point>,
    pub kind: ProtectionKind,
}

impl ProtectionGeometry {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Immutable description of the deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub building: Polygon,
    pub outdoor_bs: Vec<BsConfig>,
    pub indoor_bs: Vec<BsConfig>,
    /// Where outdoor UEs may appear.
    pub outdoor_region: Rect,
    /// Known activity area of the outdoor network; restricts the belt for the
    /// area-aware semi-static scheme.
    pub protection_region: Rect,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub n_rb: usize,
    pub rb_bandwidth_hz: f64,
    /// Height of UEs and of protection points.
    pub ue_height_m: f64,
}

impl Scenario {
    pub fn area(&self) -> Rect {
        Rect::new(0.0, 0.0, self.area_width_m, self.area_height_m)
    }

    pub fn all_bs(&self) -> impl Iterator<Item = &BsConfig> {
        self.outdoor_bs.iter().chain(self.indoor_bs.iter())
    }

    pub fn is_indoor(&self, p: &Point) -> bool {
        self.building.contains(p)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if !(self.area_width_m > 0.0 && self.area_height_m > 0.0) {
            return cfg("area dimensions must be positive".into());
        }
        if self.building.len() < 3 {
            return cfg(format!("building polygon needs at least 3 vertices, got {}", self.building.len()));
        }
        if !self.building.is_simple() {
            return cfg("building polygon is not simple".into());
        }
        let area = self.area();
        if let Some(v) = self.building.vertices.iter().find(|v| !area.contains(v)) {
            return cfg(format!("building vertex ({}, {}) lies outside the area", v.x, v.y));
        }
        for bs in &self.outdoor_bs {
            if bs.network != Network::Outdoor {
                return cfg(format!("BS {} listed as outdoor but tagged {:?}", bs.id, bs.network));
            }
            if self.is_indoor(&bs.position.planar()) {
                return cfg(format!("outdoor BS {} lies inside the building", bs.id));
            }
        }
        for bs in &self.indoor_bs {
            if bs.network != Network::Indoor {
                return cfg(format!("BS {} listed as indoor but tagged {:?}", bs.id, bs.network));
            }
            if !self.is_indoor(&bs.position.planar()) {
                return cfg(format!("indoor BS {} lies outside the building", bs.id));
            }
        }
        for bs in self.all_bs() {
            if !bs.max_power_dbm.is_finite() {
                return cfg(format!("BS {} has non-finite max power", bs.id));
            }
        }
        let mut ids: Vec<u32> = self.all_bs().map(|b| b.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return cfg("duplicate BS id".into());
        }
        if !self.outdoor_region.is_valid() || !self.protection_region.is_valid() {
            return cfg("invalid rectangle".into());
        }
        if self.building.intersects_rect_interior(&self.outdoor_region) {
            return cfg("outdoor region intersects the building interior".into());
        }
        if !(self.carrier_hz > 0.0 && self.bandwidth_hz > 0.0 && self.rb_bandwidth_hz > 0.0) {
            return cfg("carrier, bandwidth and RB bandwidth must be positive".into());
        }
        if self.n_rb == 0 {
            return cfg("n_rb must be positive".into());
        }
        Ok(())
    }

    /// Representative deployment: a 100 m x 130 m area, an L-shaped single
    /// floor building, two outdoor macro sites below it and five ceiling
    /// mounted indoor cells.
    pub fn reference() -> Self {
        let bs = |id, x, y, z, network| BsConfig {
            id,
            position: Position3::new(x, y, z),
            max_power_dbm: 21.0,
            antenna_gain_dbi: 0.0,
            network,
        };
        Scenario {
            area_width_m: 100.0,
            area_height_m: 130.0,
            building: Polygon::new(vec![
                Point::new(15.0, 40.0),
                Point::new(85.0, 40.0),
                Point::new(85.0, 52.0),
                Point::new(40.0, 52.0),
                Point::new(40.0, 75.0),
                Point::new(15.0, 75.0),
            ]),
            outdoor_bs: vec![bs(1, 25.0, 20.0, 10.0, Network::Outdoor), bs(2, 75.0, 20.0, 10.0, Network::Outdoor)],
            indoor_bs: vec![
                bs(3, 20.0, 55.0, 3.0, Network::Indoor),
                bs(4, 50.0, 49.5, 3.0, Network::Indoor),
                bs(5, 72.0, 49.5, 3.0, Network::Indoor),
                bs(6, 37.5, 62.0, 3.0, Network::Indoor),
                bs(7, 18.0, 68.0, 3.0, Network::Indoor),
            ],
            outdoor_region: Rect::new(10.0, 15.0, 90.0, 37.0),
            protection_region: Rect::new(0.0, 0.0, 100.0, 45.0),
            carrier_hz: 3.5e9,
            bandwidth_hz: 20e6,
            n_rb: 108,
            rb_bandwidth_hz: 180e3,
            ue_height_m: 1.5,
        }
    }
}

/// Outward offset of the building outline sampled at most `spacing_m` apart.
///
/// Straight runs are offset along the outward edge normal; convex corners are
/// rounded with an arc of radius `offset_m`; at reflex corners the offset
/// edges are trimmed to their intersection, so every point stays exactly
/// `offset_m` from the outline.
pub fn generate_protection_belt(scenario: &Scenario, spacing_m: f64, offset_m: f64) -> Result<ProtectionGeometry> {
    let poly = &scenario.building;
    if poly.len() < 3 {
        return Err(Error::Config(format!("belt needs a polygon with at least 3 vertices, got {}", poly.len())));
    }
    if !(spacing_m > 0.0) || !(offset_m >= 0.0) {
        return Err(Error::Config(format!("belt spacing must be > 0 and offset >= 0 (got {spacing_m}, {offset_m})")));
    }
    let n = poly.len();
    let orient = if poly.signed_area() > 0.0 { 1.0 } else { -1.0 };
    let v = &poly.vertices;
    let dir = |i: usize| {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let len = a.distance(&b);
        ((b.x - a.x) / len, (b.y - a.y) / len, len)
    };
    // outward normal of edge i
    let normal = |i: usize| {
        let (dx, dy, _) = dir(i);
        (orient * dy, -orient * dx)
    };
    // signed turn at vertex i (between edge i-1 and edge i); positive = convex
    let turn = |i: usize| {
        let (ax, ay, _) = dir((i + n - 1) % n);
        let (bx, by, _) = dir(i);
        let c = orient * (ax * by - ay * bx);
        let d = ax * bx + ay * by;
        c.atan2(d)
    };

    let mut points: Vec<Point> = Vec::new();
    let push = |pts: &mut Vec<Point>, p: Point| {
        if pts.last().is_none_or(|q| q.distance(&p) > 1e-9) {
            pts.push(p);
        }
    };
    for i in 0..n {
        let (dx, dy, len) = dir(i);
        let (nx, ny) = normal(i);
        let trim_start = if turn(i) < 0.0 { offset_m * (-turn(i) / 2.0).tan() } else { 0.0 };
        let j = (i + 1) % n;
        let trim_end = if turn(j) < 0.0 { offset_m * (-turn(j) / 2.0).tan() } else { 0.0 };
        let (t0, t1) = (trim_start, len - trim_end);
        if t1 >= t0 {
            let steps = (((t1 - t0) / spacing_m).ceil() as usize).max(1);
            for k in 0..=steps {
                let t = t0 + (t1 - t0) * k as f64 / steps as f64;
                push(&mut points, Point::new(v[i].x + dx * t + nx * offset_m, v[i].y + dy * t + ny * offset_m));
            }
        }
        // arc around a convex corner at the end of this edge
        let phi = turn(j);
        if phi > 0.0 && offset_m > 0.0 {
            let arc = offset_m * phi;
            let steps = ((arc / spacing_m).ceil() as usize).max(1);
            let a0 = ny.atan2(nx);
            for k in 1..steps {
                let a = a0 + orient * phi * k as f64 / steps as f64;
                push(&mut points, Point::new(v[j].x + offset_m * a.cos(), v[j].y + offset_m * a.sin()));
            }
        }
    }
    if points.len() > 1 && points[0].distance(points.last().unwrap()) <= 1e-9 {
        points.pop();
    }
    // thin features can bring a non-adjacent wall closer than the offset
    if offset_m > 0.0 {
        points.retain(|p| !poly.contains(p) && poly.boundary_distance(p) >= offset_m - 1e-9);
    }
    Ok(ProtectionGeometry { points, kind: ProtectionKind::FullBelt })
}

/// Keeps the belt points inside `region`.
pub fn restrict_to_protection_area(belt: &ProtectionGeometry, region: &Rect) -> Result<ProtectionGeometry> {
    if belt.kind != ProtectionKind::FullBelt {
        return Err(Error::Config(format!("expected a full belt, got {:?}", belt.kind)));
    }
    let points: Vec<Point> = belt.points.iter().copied().filter(|p| region.contains(p)).collect();
    if points.is_empty() {
        return Err(Error::EmptyProtection("protection region does not contain any belt point".into()));
    }
    Ok(ProtectionGeometry { points, kind: ProtectionKind::RestrictedArea })
}

/// How many users to place and where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UserCounts {
    pub indoor_uniform: usize,
    pub indoor_cluster: usize,
    /// BS the cluster gathers around; defaults to the first indoor BS.
    pub cluster_bs: Option<u32>,
    pub cluster_radius_m: f64,
    pub outdoor: usize,
    pub prob_5g: f64,
    pub walking_fraction: f64,
    pub static_speed_kmh: f64,
    pub walking_speed_kmh: f64,
    pub outdoor_speed_kmh: f64,
    pub noise_figure_db: f64,
    pub antenna_gain_dbi: f64,
}

impl Default for UserCounts {
    fn default() -> Self {
        Self {
            indoor_uniform: 25,
            indoor_cluster: 10,
            cluster_bs: None,
            cluster_radius_m: 3.0,
            outdoor: 15,
            prob_5g: 0.5,
            walking_fraction: 0.2,
            static_speed_kmh: 0.36,
            walking_speed_kmh: 3.0,
            outdoor_speed_kmh: 3.0,
            noise_figure_db: 9.0,
            antenna_gain_dbi: 0.0,
        }
    }
}

impl UserCounts {
    pub fn new(indoor_uniform: usize, indoor_cluster: usize, outdoor: usize) -> Self {
        Self { indoor_uniform, indoor_cluster, outdoor, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let speeds = [self.static_speed_kmh, self.walking_speed_kmh, self.outdoor_speed_kmh];
        if speeds.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::Config("UE speeds must be >= 0".into()));
        }
        if !(self.noise_figure_db >= 0.0) {
            return Err(Error::Config("noise figure must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.prob_5g) || !(0.0..=1.0).contains(&self.walking_fraction) {
            return Err(Error::Config("probabilities must lie in [0, 1]".into()));
        }
        if !(self.cluster_radius_m > 0.0) && self.indoor_cluster > 0 {
            return Err(Error::Config("cluster radius must be positive".into()));
        }
        Ok(())
    }
}

const MAX_REJECTIONS: usize = 100_000;

fn sample_in_building<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<Point> {
    let bb = scenario.building.bounding_box();
    for _ in 0..MAX_REJECTIONS {
        let p = Point::new(rng.random_range(bb.x_min..=bb.x_max), rng.random_range(bb.y_min..=bb.y_max));
        if scenario.building.contains(&p) {
            return Ok(p);
        }
    }
    Err(Error::Config("could not sample a point inside the building".into()))
}

fn sample_in_disk<R: Rng + ?Sized>(center: Point, radius: f64, rng: &mut R) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let a = 2.0 * PI * rng.random::<f64>();
    Point::new(center.x + r * a.cos(), center.y + r * a.sin())
}

/// Draws the user population. Ids are assigned in placement order: uniform
/// indoor users, then the cluster, then outdoor users. Cluster draws falling
/// outside the building are rejected and redrawn.
pub fn place_users<R: Rng + ?Sized>(scenario: &Scenario, counts: &UserCounts, rng: &mut R) -> Result<Vec<UeConfig>> {
    counts.validate()?;
    let mut ues = Vec::with_capacity(counts.indoor_uniform + counts.indoor_cluster + counts.outdoor);
    let mut next_id = 0u32;
    let mut make = |position: Point, network: Network, technology: Technology, speed_kmh: f64| {
        let ue = UeConfig {
            id: next_id,
            position,
            technology,
            speed_kmh,
            antenna_gain_dbi: counts.antenna_gain_dbi,
            noise_figure_db: counts.noise_figure_db,
            network,
        };
        next_id += 1;
        ue
    };
    let tech = |rng: &mut R| if rng.random_bool(counts.prob_5g) { Technology::Nr } else { Technology::Lte };

    let walking = (counts.walking_fraction * counts.indoor_uniform as f64).round() as usize;
    let mut is_walking: Vec<bool> = (0..counts.indoor_uniform).map(|i| i < walking).collect();
    is_walking.shuffle(rng);
    for walk in is_walking {
        let p = sample_in_building(scenario, rng)?;
        let speed = if walk { counts.walking_speed_kmh } else { counts.static_speed_kmh };
        let t = tech(rng);
        ues.push(make(p, Network::Indoor, t, speed));
    }

    if counts.indoor_cluster > 0 {
        let center_bs = match counts.cluster_bs {
            Some(id) => scenario
                .indoor_bs
                .iter()
                .find(|b| b.id == id)
                .ok_or_else(|| Error::Config(format!("cluster BS {id} is not an indoor BS")))?,
            None => scenario
                .indoor_bs
                .first()
                .ok_or_else(|| Error::Config("cluster requested but there are no indoor BSs".into()))?,
        };
        let center = center_bs.position.planar();
        for _ in 0..counts.indoor_cluster {
            let mut placed = None;
            for _ in 0..MAX_REJECTIONS {
                let p = sample_in_disk(center, counts.cluster_radius_m, rng);
                if scenario.building.contains(&p) {
                    placed = Some(p);
                    break;
                }
            }
            let p = placed.ok_or_else(|| Error::Config("cluster disk does not overlap the building".into()))?;
            let t = tech(rng);
            ues.push(make(p, Network::Indoor, t, counts.static_speed_kmh));
        }
    }

    let region = scenario.outdoor_region;
    for _ in 0..counts.outdoor {
        let mut placed = None;
        for _ in 0..MAX_REJECTIONS {
            let p = Point::new(
                rng.random_range(region.x_min..=region.x_max),
                rng.random_range(region.y_min..=region.y_max),
            );
            if !scenario.building.contains(&p) {
                placed = Some(p);
                break;
            }
        }
        let p = placed.ok_or_else(|| Error::Config("outdoor region lies inside the building".into()))?;
        ues.push(make(p, Network::Outdoor, Technology::Lte, counts.outdoor_speed_kmh));
    }
    Ok(ues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;

    fn square_scenario(side: f64) -> Scenario {
        let mut s = Scenario::reference();
        s.building = Polygon::new(vec![
            Point::new(20.0, 40.0),
            Point::new(20.0 + side, 40.0),
            Point::new(20.0 + side, 40.0 + side),
            Point::new(20.0, 40.0 + side),
        ]);
        s
    }

    #[test]
    fn reference_scenario_is_valid() {
        Scenario::reference().validate().unwrap();
    }

    #[test]
    fn square_belt_points_hug_the_walls() {
        let s = square_scenario(10.0);
        let belt = generate_protection_belt(&s, 10.0, 0.5).unwrap();
        assert!(belt.len() >= 4);
        assert_eq!(belt.kind, ProtectionKind::FullBelt);
        for p in &belt.points {
            assert!(!s.building.contains(p));
            assert!(s.building.boundary_distance(p) <= 0.6);
        }
    }

    #[test]
    fn huge_spacing_still_covers_every_edge() {
        let s = square_scenario(10.0);
        let belt = generate_protection_belt(&s, 1000.0, 0.5).unwrap();
        for (a, b) in s.building.edges() {
            let near =
                belt.points.iter().filter(|p| crate::geometry::segment_distance(p, &a, &b) <= 0.5 + 1e-9).count();
            assert!(near >= 1);
        }
    }

    #[test]
    fn belt_spacing_is_respected() {
        let s = Scenario::reference();
        let belt = generate_protection_belt(&s, 1.0, 0.5).unwrap();
        let pts = &belt.points;
        for i in 0..pts.len() {
            let d = pts[i].distance(&pts[(i + 1) % pts.len()]);
            assert!(d <= 1.0 + 1e-9, "gap {d} at {i}");
        }
    }

    #[test]
    fn degenerate_polygon_rejected() {
        let mut s = Scenario::reference();
        s.building = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)]);
        assert!(matches!(generate_protection_belt(&s, 1.0, 0.5), Err(Error::Config(_))));
    }

    #[test]
    fn restrict_filters_by_region() {
        let s = Scenario::reference();
        let belt = generate_protection_belt(&s, 1.0, 0.5).unwrap();
        let all = restrict_to_protection_area(&belt, &s.area()).unwrap();
        assert_eq!(all.points, belt.points);
        assert_eq!(all.kind, ProtectionKind::RestrictedArea);

        let lower = Rect::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::INFINITY, 60.0);
        let half = restrict_to_protection_area(&belt, &lower).unwrap();
        let expected: Vec<Point> = belt.points.iter().copied().filter(|p| p.y <= 60.0).collect();
        assert_eq!(half.points, expected);

        let far = Rect::new(500.0, 500.0, 600.0, 600.0);
        assert!(matches!(restrict_to_protection_area(&belt, &far), Err(Error::EmptyProtection(_))));
        assert!(restrict_to_protection_area(&half, &lower).is_err());
    }

    #[test]
    fn single_outdoor_user() {
        let s = Scenario::reference();
        let ues = place_users(&s, &UserCounts::new(0, 0, 1), &mut rng_from_seed(3)).unwrap();
        assert_eq!(ues.len(), 1);
        assert_eq!(ues[0].network, Network::Outdoor);
        assert!(s.outdoor_region.contains(&ues[0].position));
    }

    #[test]
    fn placement_is_deterministic_and_in_region() {
        let s = Scenario::reference();
        let counts = UserCounts::new(25, 10, 15);
        let a = place_users(&s, &counts, &mut rng_from_seed(42)).unwrap();
        let b = place_users(&s, &counts, &mut rng_from_seed(42)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        for ue in &a {
            match ue.network {
                Network::Indoor => assert!(s.building.contains(&ue.position)),
                Network::Outdoor => {
                    assert!(s.outdoor_region.contains(&ue.position));
                    assert!(!s.building.contains(&ue.position));
                }
            }
        }
        let cluster_center = s.indoor_bs[0].position.planar();
        for ue in &a[25..35] {
            assert!(ue.position.distance(&cluster_center) <= 3.0 + 1e-12);
        }
        let walking = a[..25].iter().filter(|u| u.speed_kmh == 3.0).count();
        assert_eq!(walking, 5);
    }
}
