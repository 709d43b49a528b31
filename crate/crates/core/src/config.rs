//! Run configuration: one TOML document, optional dotted `key=value`
//! overrides on top, and a stable hash of the resolved result.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::controllers::{SchemeConfig, SchemeKind};
use crate::error::{Error, Result};
use crate::fading::FadingMode;
use crate::geometry::Point;
use crate::link::{CqiTable, RateMapper, RateMode};
use crate::propagation::PathlossModel;
use crate::scenario::{Scenario, UserCounts};
use crate::scheduler::PfParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub fading: FadingMode,
    pub rate_mode: RateMode,
    /// CSV with columns `cqi,modulation,code_rate_x1024,efficiency,min_sinr_db,eesm_beta`.
    pub cqi_table: Option<PathBuf>,
    pub bonus_5g: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self { fading: FadingMode::Rayleigh, rate_mode: RateMode::NarrowbandCqi, cqi_table: None, bonus_5g: 1.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    pub smoothing: f64,
    pub epsilon: f64,
    pub icic: bool,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        let pf = PfParams::default();
        Self { smoothing: pf.smoothing, epsilon: pf.epsilon, icic: true }
    }
}

impl SchedulerConfig {
    pub fn pf_params(&self) -> PfParams {
        PfParams { smoothing: self.smoothing, epsilon: self.epsilon }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub iterations: usize,
    pub horizon_ms: u64,
    pub seed: u64,
    /// Ticks excluded from statistics; `None` means one controller update period.
    pub warmup_ms: Option<u64>,
    pub indoor_enabled: bool,
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self { iterations: 200, horizon_ms: 1000, seed: 1, warmup_ms: None, indoor_enabled: true, threads: 0 }
    }
}

/// The single outdoor UE crossing in front of the building.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MovingUeConfig {
    pub start: Point,
    /// Heading in degrees counter-clockwise from +x.
    pub heading_deg: f64,
    pub speed_kmh: f64,
    pub duration_ms: u64,
    pub window_ms: u64,
    pub iterations: usize,
}

impl Default for MovingUeConfig {
    fn default() -> Self {
        Self {
            start: Point::new(8.35, 30.0),
            heading_deg: 0.0,
            speed_kmh: 50.0,
            duration_ms: 6000,
            window_ms: 200,
            iterations: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub schema_version: u32,
    pub scenario: Scenario,
    /// Defaults to the reference model at the scenario carrier.
    pub propagation: Option<PathlossModel>,
    pub users: UserCounts,
    pub link: LinkConfig,
    pub scheduler: SchedulerConfig,
    pub scheme: SchemeConfig,
    pub campaign: CampaignConfig,
    pub moving: MovingUeConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: Scenario::reference(),
            propagation: None,
            users: UserCounts::default(),
            link: LinkConfig::default(),
            scheduler: SchedulerConfig::default(),
            scheme: SchemeConfig::default(),
            campaign: CampaignConfig::default(),
            moving: MovingUeConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn with_scheme(mut self, kind: SchemeKind) -> Self {
        self.scheme.name = kind;
        self
    }

    pub fn pathloss(&self) -> PathlossModel {
        self.propagation.unwrap_or_else(|| PathlossModel::reference(self.scenario.carrier_hz))
    }

    pub fn warmup_ms(&self) -> u64 {
        self.campaign.warmup_ms.unwrap_or(self.scheme.update_period_ms)
    }

    /// The indoor network transmits at all.
    pub fn indoor_active(&self) -> bool {
        self.campaign.indoor_enabled && self.scheme.name != SchemeKind::Off
    }

    pub fn rate_mapper(&self) -> Result<RateMapper> {
        let table = match &self.link.cqi_table {
            Some(path) => CqiTable::from_path(path)?,
            None => CqiTable::standard(),
        };
        Ok(RateMapper {
            mode: self.link.rate_mode,
            rb_bandwidth_hz: self.scenario.rb_bandwidth_hz,
            bonus_5g: self.link.bonus_5g,
            table,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            )));
        }
        self.scenario.validate()?;
        self.pathloss().validate()?;
        self.users.validate()?;
        self.scheme.validate()?;
        if !(self.link.bonus_5g >= 1.0) {
            return Err(Error::Config("link.bonus_5g must be >= 1".into()));
        }
        if !(self.scheduler.smoothing > 0.0 && self.scheduler.smoothing <= 1.0) {
            return Err(Error::Config("scheduler.smoothing must lie in (0, 1]".into()));
        }
        if !(self.scheduler.epsilon > 0.0) {
            return Err(Error::Config("scheduler.epsilon must be > 0".into()));
        }
        let c = &self.campaign;
        if c.iterations == 0 {
            return Err(Error::Config("campaign.iterations must be >= 1".into()));
        }
        if c.horizon_ms < self.scheme.update_period_ms {
            return Err(Error::Config("campaign.horizon_ms must cover at least one update period".into()));
        }
        if self.warmup_ms() >= c.horizon_ms {
            return Err(Error::Config("campaign.warmup_ms must be shorter than the horizon".into()));
        }
        let m = &self.moving;
        if !(m.speed_kmh >= 0.0) || m.window_ms == 0 || m.duration_ms == 0 || m.iterations == 0 {
            return Err(Error::Config("moving: speed >= 0, and window, duration, iterations >= 1".into()));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of the resolved configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serialises");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Parses a TOML document, applies `overrides` and validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        // typed errors against the document itself carry line and column
        toml::from_str::<SimConfig>(text).map_err(|e| Error::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: SimConfig =
            toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, overrides).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }
}

/// Sets `a.b.c = value` in `doc`, creating tables on the way. The value is
/// read as a TOML literal and falls back to a bare string. `scheme=X` is
/// shorthand for `scheme.name=X`.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("override '{assignment}': expected key=value")))?;
    let key = key.trim();
    let key = if key == "scheme" { "scheme.name" } else { key };
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("override '{assignment}': empty key segment")));
    }
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Parse(format!("override '{assignment}': '{part}' is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        let c = SimConfig::from_toml_str("", &[]).unwrap();
        assert_eq!(c, SimConfig::default());
    }

    #[test]
    fn round_trip_through_toml() {
        let c = SimConfig::default();
        let back = SimConfig::from_toml_str(&c.to_toml_string(), &[]).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn overrides_and_scheme_alias() {
        let c = SimConfig::from_toml_str(
            "[campaign]\niterations = 3\n",
            &["scheme=modified_lsa".into(), "campaign.seed=9".into(), "scheme.gamma_db=-10".into()],
        )
        .unwrap();
        assert_eq!(c.scheme.name, SchemeKind::ModifiedLsa);
        assert_eq!(c.campaign.seed, 9);
        assert_eq!(c.campaign.iterations, 3);
        assert_eq!(c.scheme.gamma_db, Some(-10.0));
        assert_ne!(c.hash(), SimConfig::default().hash());
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let err = SimConfig::from_toml_str("[campaign]\niterations = \"x\"\n", &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        let err = SimConfig::from_toml_str("", &["campaign.bogus=1".into()]).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        assert!(matches!(SimConfig::from_toml_str("schema_version = 7", &[]), Err(Error::Config(_))));
        assert!(SimConfig::from_toml_str("", &["novalue".into()]).is_err());
    }

    #[test]
    fn warmup_defaults_to_update_period() {
        let mut c = SimConfig::default();
        assert_eq!(c.warmup_ms(), 10);
        c.campaign.warmup_ms = Some(0);
        assert_eq!(c.warmup_ms(), 0);
    }
}
