//! Run configuration: file grammar, defaults and validation.
//!
//! The file is TOML. Scenario keys sit at the top level; everything else
//! lives in optional tables whose keys default individually:
//!
//! ```toml
//! scenario = "urban"          # required: urban | suburban
//! rns_per_sector = 4
//! n_drops = 200
//! seed = 7
//!
//! [radio]
//! ue_noise_figure_db = 9.0
//!
//! [power_control.relay_served]
//! p0_dbm = -101
//! alpha = 1.0
//! p_max_dbm = 15
//! ```
//!
//! Unknown keys anywhere are errors. The resolved configuration serializes
//! back to the same grammar with every default spelled out.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dl::ShannonMapping;
use crate::error::ConfigError;
use crate::propagation::PropagationTable;
use crate::scenario::{RelayPlacement, ScenarioConfig, ScenarioKind};
use crate::ul::{PowerControlConfig, PowerControlConfigs};

/// Node, terminal and system radio constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    pub enb_tx_power_dbm: f64,
    pub rn_tx_power_dbm: f64,
    pub enb_antenna_gain_dbi: f64,
    pub rn_antenna_gain_dbi: f64,
    pub penetration_loss_db: f64,
    pub thermal_noise_dbm_hz: f64,
    pub ue_noise_figure_db: f64,
    pub enb_noise_figure_db: f64,
    pub rn_noise_figure_db: f64,
    pub bandwidth_hz: f64,
    pub n_prbs: usize,
    pub prb_bandwidth_hz: f64,
    pub ue_max_tx_power_dbm: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            enb_tx_power_dbm: 46.0,
            rn_tx_power_dbm: 30.0,
            enb_antenna_gain_dbi: 14.0,
            rn_antenna_gain_dbi: 5.0,
            penetration_loss_db: 20.0,
            thermal_noise_dbm_hz: -174.0,
            ue_noise_figure_db: 9.0,
            enb_noise_figure_db: 5.0,
            rn_noise_figure_db: 5.0,
            bandwidth_hz: 10e6,
            n_prbs: 50,
            prb_bandwidth_hz: 180e3,
            ue_max_tx_power_dbm: 23.0,
        }
    }
}

impl RadioParams {
    /// Downlink noise power over the full band at a terminal, dBm.
    pub fn dl_noise_dbm(&self) -> f64 {
        self.thermal_noise_dbm_hz + 10.0 * self.bandwidth_hz.log10() + self.ue_noise_figure_db
    }

    /// Uplink noise power per PRB at a receiver with noise figure `nf_db`.
    pub fn ul_noise_per_prb_dbm(&self, nf_db: f64) -> f64 {
        self.thermal_noise_dbm_hz + 10.0 * self.prb_bandwidth_hz.log10() + nf_db
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.bandwidth_hz > 0.0) {
            return Err(ConfigError::range(
                "radio.bandwidth_hz",
                self.bandwidth_hz,
                "(0, inf)",
            ));
        }
        if !(self.prb_bandwidth_hz > 0.0) {
            return Err(ConfigError::range(
                "radio.prb_bandwidth_hz",
                self.prb_bandwidth_hz,
                "(0, inf)",
            ));
        }
        if self.n_prbs == 0 {
            return Err(ConfigError::range("radio.n_prbs", 0, "[1, inf)"));
        }
        if self.ue_max_tx_power_dbm > 23.0 {
            return Err(ConfigError::range(
                "radio.ue_max_tx_power_dbm",
                self.ue_max_tx_power_dbm,
                "(-inf, 23]",
            ));
        }
        let finite = [
            self.enb_tx_power_dbm,
            self.rn_tx_power_dbm,
            self.enb_antenna_gain_dbi,
            self.rn_antenna_gain_dbi,
            self.penetration_loss_db,
            self.thermal_noise_dbm_hz,
            self.ue_noise_figure_db,
            self.enb_noise_figure_db,
            self.rn_noise_figure_db,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::Invalid(
                "radio: all values must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scenario: ScenarioConfig,
    pub radio: RadioParams,
    pub propagation: PropagationTable,
    pub dl_mapping: ShannonMapping,
    pub ul_mapping: ShannonMapping,
    pub power_control: PowerControlConfigs,
}

impl SimConfig {
    /// Defaults for `kind` with `rns_per_sector` relays.
    pub fn new(kind: ScenarioKind, rns_per_sector: usize) -> Self {
        SimConfig {
            scenario: ScenarioConfig::new(kind, rns_per_sector),
            radio: RadioParams::default(),
            propagation: PropagationTable::default(),
            dl_mapping: ShannonMapping::default(),
            ul_mapping: ShannonMapping::default(),
            power_control: PowerControlConfigs::default_for(kind),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scenario.validate()?;
        if self.scenario.seed > i64::MAX as u64 {
            return Err(ConfigError::range("seed", self.scenario.seed, "[0, 2^63)"));
        }
        self.radio.validate()?;
        self.propagation.validate()?;
        self.dl_mapping.validate("dl_mapping")?;
        self.ul_mapping.validate("ul_mapping")?;
        self.power_control.validate()?;
        Ok(())
    }

    /// Same configuration with the relays removed and no cell extension:
    /// the eNB-only reference deployment.
    pub fn baseline(&self) -> SimConfig {
        let mut b = self.clone();
        b.scenario = b.scenario.with_relays(0);
        b.scenario.bias_db = 0.0;
        b.scenario.power_reduction_db = 0.0;
        b
    }

    pub fn to_file(&self) -> ConfigFile {
        let s = &self.scenario;
        ConfigFile {
            scenario: Some(s.scenario),
            isd_m: Some(s.isd_m),
            n_sites: Some(s.n_sites),
            sectors_per_site: Some(s.sectors_per_site),
            rns_per_sector: Some(s.rns_per_sector),
            ues_per_sector: Some(s.ues_per_sector),
            n_drops: Some(s.n_drops),
            seed: Some(s.seed),
            bias_db: Some(s.bias_db),
            power_reduction_db: Some(s.power_reduction_db),
            allow_nonstandard_rns: Some(s.allow_nonstandard_rns),
            relay_placement: Some(RelayPlacementFile {
                radius_factor: Some(s.relay_placement.radius_factor),
                angles_deg: Some(s.relay_placement.angles_deg.clone()),
            }),
            radio: Some(self.radio.clone()),
            propagation: Some(self.propagation.clone()),
            dl_mapping: Some(self.dl_mapping),
            ul_mapping: Some(self.ul_mapping),
            power_control: Some(PowerControlFile {
                macro_served: Some(self.power_control.macro_served.into()),
                relay_served: Some(self.power_control.relay_served.into()),
            }),
        }
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string(&self.to_file()).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// SHA-256 over the canonical serialization of the resolved config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayPlacementFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angles_deg: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerControlFileEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max_dbm: Option<f64>,
}

impl From<PowerControlConfig> for PowerControlFileEntry {
    fn from(pc: PowerControlConfig) -> Self {
        PowerControlFileEntry {
            p0_dbm: Some(pc.p0_dbm),
            alpha: Some(pc.alpha),
            p_max_dbm: Some(pc.p_max_dbm),
        }
    }
}

impl PowerControlFileEntry {
    fn resolve(
        &self,
        default: PowerControlConfig,
        class: &str,
    ) -> Result<PowerControlConfig, ConfigError> {
        PowerControlConfig::new(
            self.p0_dbm.unwrap_or(default.p0_dbm),
            self.alpha.unwrap_or(default.alpha),
            self.p_max_dbm.unwrap_or(default.p_max_dbm),
        )
        .map_err(|e| match e {
            ConfigError::OutOfRange {
                field,
                value,
                legal,
            } => ConfigError::OutOfRange {
                field: format!("power_control.{class}.{field}"),
                value,
                legal,
            },
            other => other,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerControlFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_served: Option<PowerControlFileEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relay_served: Option<PowerControlFileEntry>,
}

/// Configuration as written in a file: every key optional except
/// `scenario`, which must come from the file or a command-line override.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isd_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sectors_per_site: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rns_per_sector: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ues_per_sector: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_drops: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_reduction_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allow_nonstandard_rns: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relay_placement: Option<RelayPlacementFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radio: Option<RadioParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propagation: Option<PropagationTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dl_mapping: Option<ShannonMapping>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ul_mapping: Option<ShannonMapping>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_control: Option<PowerControlFile>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Fills defaults and validates.
    pub fn resolve(&self) -> Result<SimConfig, ConfigError> {
        let kind = self.scenario.ok_or_else(|| {
            ConfigError::Invalid("`scenario` is required (urban or suburban)".into())
        })?;
        let rns = self.rns_per_sector.unwrap_or(0);
        let mut sc = ScenarioConfig::new(kind, rns);
        if let Some(v) = self.isd_m {
            sc.isd_m = v;
        }
        if let Some(v) = self.n_sites {
            sc.n_sites = v;
        }
        if let Some(v) = self.sectors_per_site {
            sc.sectors_per_site = v;
        }
        if let Some(v) = self.ues_per_sector {
            sc.ues_per_sector = v;
        }
        if let Some(v) = self.n_drops {
            sc.n_drops = v;
        }
        if let Some(v) = self.seed {
            sc.seed = v;
        }
        if let Some(v) = self.bias_db {
            sc.bias_db = v;
        }
        if let Some(v) = self.power_reduction_db {
            sc.power_reduction_db = v;
        }
        if let Some(v) = self.allow_nonstandard_rns {
            sc.allow_nonstandard_rns = v;
        }
        let mut placement = RelayPlacement::default_for(rns);
        if let Some(rp) = &self.relay_placement {
            if let Some(r) = rp.radius_factor {
                placement.radius_factor = r;
            }
            if let Some(a) = &rp.angles_deg {
                placement.angles_deg = a.clone();
            }
        }
        sc.relay_placement = placement;

        let dl_mapping = self.dl_mapping.unwrap_or_default();
        let pc_default = PowerControlConfigs::default_for(kind);
        let pc_file = self.power_control.clone().unwrap_or_default();
        let power_control = PowerControlConfigs {
            macro_served: pc_file
                .macro_served
                .unwrap_or_default()
                .resolve(pc_default.macro_served, "macro_served")?,
            relay_served: pc_file
                .relay_served
                .unwrap_or_default()
                .resolve(pc_default.relay_served, "relay_served")?,
        };
        let cfg = SimConfig {
            scenario: sc,
            radio: self.radio.clone().unwrap_or_default(),
            propagation: self.propagation.clone().unwrap_or_default(),
            dl_mapping,
            ul_mapping: self.ul_mapping.unwrap_or(dl_mapping),
            power_control,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn from_toml_str(text: &str) -> Result<SimConfig, ConfigError> {
    ConfigFile::parse(text)?.resolve()
}

/// Reads the raw file; resolution is left to the caller so command-line
/// overrides can be applied first.
pub fn read_config_file(path: &Path) -> Result<ConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
    ConfigFile::parse(&text)
}

pub fn load_config(path: &Path) -> Result<SimConfig, ConfigError> {
    read_config_file(path)?.resolve()
}
