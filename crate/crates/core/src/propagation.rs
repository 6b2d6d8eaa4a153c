//! Composite link gains: path loss with LOS probability, NLOS-only
//! log-normal shadowing, sector antenna pattern and penetration loss.
//!
//! Distances enter the formulas in kilometres. Link gain is signed so that
//! received power in dBm is `tx_power + gain`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::scenario::{wrap_distance, NetworkLayout, Node, NodeKind, ScenarioKind, UserTerminal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    MacroToUe,
    RelayToUe,
}

impl From<NodeKind> for LinkKind {
    fn from(k: NodeKind) -> Self {
        match k {
            NodeKind::MacroSector => LinkKind::MacroToUe,
            NodeKind::RelayNode => LinkKind::RelayToUe,
        }
    }
}

/// `intercept + slope·log10(R[km])` for the LOS and NLOS branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossCoeffs {
    pub los_intercept_db: f64,
    pub los_slope_db: f64,
    pub nlos_intercept_db: f64,
    pub nlos_slope_db: f64,
}

impl PathLossCoeffs {
    pub const MACRO_TO_UE: PathLossCoeffs = PathLossCoeffs {
        los_intercept_db: 103.4,
        los_slope_db: 24.2,
        nlos_intercept_db: 131.1,
        nlos_slope_db: 42.8,
    };
    pub const RELAY_TO_UE: PathLossCoeffs = PathLossCoeffs {
        los_intercept_db: 103.8,
        los_slope_db: 20.9,
        nlos_intercept_db: 145.4,
        nlos_slope_db: 37.5,
    };
}

/// LOS probability curve as a function of distance in km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum LosCurve {
    /// `min(knee/R, 1)·(1 − e^(−R/decay)) + e^(−R/decay)`
    KneeExponential { knee_km: f64, decay_km: f64 },
    /// `min(1, e^(−(R − offset)/decay))`
    ShiftedExponential { offset_km: f64, decay_km: f64 },
    /// `0.5 − min(0.5, a·e^(−near/R)) + min(0.5, a·e^(−R/decay))`
    TwoSidedExponential {
        amplitude: f64,
        near_km: f64,
        decay_km: f64,
    },
}

impl LosCurve {
    pub const MACRO_URBAN: LosCurve = LosCurve::KneeExponential {
        knee_km: 0.018,
        decay_km: 0.063,
    };
    pub const MACRO_SUBURBAN: LosCurve = LosCurve::ShiftedExponential {
        offset_km: 0.01,
        decay_km: 1.0,
    };
    pub const RELAY_URBAN: LosCurve = LosCurve::TwoSidedExponential {
        amplitude: 5.0,
        near_km: 0.156,
        decay_km: 0.03,
    };
    pub const RELAY_SUBURBAN: LosCurve = LosCurve::TwoSidedExponential {
        amplitude: 3.0,
        near_km: 0.3,
        decay_km: 0.095,
    };

    pub fn probability(&self, r_km: f64) -> f64 {
        let p = match *self {
            LosCurve::KneeExponential { knee_km, decay_km } => {
                if r_km <= 0.0 {
                    return 1.0;
                }
                let e = (-r_km / decay_km).exp();
                (knee_km / r_km).min(1.0) * (1.0 - e) + e
            }
            LosCurve::ShiftedExponential {
                offset_km,
                decay_km,
            } => (-(r_km - offset_km) / decay_km).exp(),
            LosCurve::TwoSidedExponential {
                amplitude,
                near_km,
                decay_km,
            } => {
                let near = if r_km <= 0.0 {
                    0.0
                } else {
                    amplitude * (-near_km / r_km).exp()
                };
                0.5 - near.min(0.5) + (amplitude * (-r_km / decay_km).exp()).min(0.5)
            }
        };
        p.clamp(0.0, 1.0)
    }

    fn validate(&self, field: &str) -> Result<(), ConfigError> {
        let ok = match *self {
            LosCurve::KneeExponential { knee_km, decay_km } => knee_km > 0.0 && decay_km > 0.0,
            LosCurve::ShiftedExponential {
                offset_km,
                decay_km,
            } => offset_km >= 0.0 && decay_km > 0.0,
            LosCurve::TwoSidedExponential {
                amplitude,
                near_km,
                decay_km,
            } => amplitude > 0.0 && near_km > 0.0 && decay_km > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ConfigError::Invalid(format!(
                "{field}: LOS curve parameters must be positive"
            )))
        }
    }
}

/// Horizontal sector pattern `G_max − min(12·(θ/θ_3dB)², A_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaPattern {
    pub beamwidth_3db_deg: f64,
    pub max_attenuation_db: f64,
}

impl Default for AntennaPattern {
    fn default() -> Self {
        AntennaPattern {
            beamwidth_3db_deg: 65.0,
            max_attenuation_db: 20.0,
        }
    }
}

/// Every propagation constant, overridable from the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationTable {
    pub macro_to_ue: PathLossCoeffs,
    pub relay_to_ue: PathLossCoeffs,
    pub los_macro_urban: LosCurve,
    pub los_macro_suburban: LosCurve,
    pub los_relay_urban: LosCurve,
    pub los_relay_suburban: LosCurve,
    pub shadowing_std_macro_db: f64,
    pub shadowing_std_relay_db: f64,
    pub min_distance_m: f64,
    pub macro_antenna: AntennaPattern,
}

impl Default for PropagationTable {
    fn default() -> Self {
        PropagationTable {
            macro_to_ue: PathLossCoeffs::MACRO_TO_UE,
            relay_to_ue: PathLossCoeffs::RELAY_TO_UE,
            los_macro_urban: LosCurve::MACRO_URBAN,
            los_macro_suburban: LosCurve::MACRO_SUBURBAN,
            los_relay_urban: LosCurve::RELAY_URBAN,
            los_relay_suburban: LosCurve::RELAY_SUBURBAN,
            shadowing_std_macro_db: 8.0,
            shadowing_std_relay_db: 10.0,
            min_distance_m: 10.0,
            macro_antenna: AntennaPattern::default(),
        }
    }
}

impl PropagationTable {
    pub fn model(&self, link_kind: LinkKind, scenario_kind: ScenarioKind) -> PathLossModel {
        let (coeffs, los_curve, shadowing_std_db) = match (link_kind, scenario_kind) {
            (LinkKind::MacroToUe, ScenarioKind::Urban) => (
                self.macro_to_ue,
                self.los_macro_urban,
                self.shadowing_std_macro_db,
            ),
            (LinkKind::MacroToUe, ScenarioKind::Suburban) => (
                self.macro_to_ue,
                self.los_macro_suburban,
                self.shadowing_std_macro_db,
            ),
            (LinkKind::RelayToUe, ScenarioKind::Urban) => (
                self.relay_to_ue,
                self.los_relay_urban,
                self.shadowing_std_relay_db,
            ),
            (LinkKind::RelayToUe, ScenarioKind::Suburban) => (
                self.relay_to_ue,
                self.los_relay_suburban,
                self.shadowing_std_relay_db,
            ),
        };
        PathLossModel {
            link_kind,
            scenario_kind,
            coeffs,
            los_curve,
            shadowing_std_db,
            min_distance_m: self.min_distance_m,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, c) in [
            ("macro_to_ue", &self.macro_to_ue),
            ("relay_to_ue", &self.relay_to_ue),
        ] {
            if !(c.los_slope_db > 0.0 && c.nlos_slope_db > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "propagation.{name}: path-loss slopes must be positive"
                )));
            }
        }
        self.los_macro_urban
            .validate("propagation.los_macro_urban")?;
        self.los_macro_suburban
            .validate("propagation.los_macro_suburban")?;
        self.los_relay_urban
            .validate("propagation.los_relay_urban")?;
        self.los_relay_suburban
            .validate("propagation.los_relay_suburban")?;
        for (name, v) in [
            (
                "propagation.shadowing_std_macro_db",
                self.shadowing_std_macro_db,
            ),
            (
                "propagation.shadowing_std_relay_db",
                self.shadowing_std_relay_db,
            ),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::range(name, v, "[0, inf)"));
            }
        }
        if !(self.min_distance_m > 0.0) {
            return Err(ConfigError::range(
                "propagation.min_distance_m",
                self.min_distance_m,
                "(0, inf)",
            ));
        }
        let a = &self.macro_antenna;
        if !(a.beamwidth_3db_deg > 0.0 && a.max_attenuation_db >= 0.0) {
            return Err(ConfigError::Invalid(
                "propagation.macro_antenna: bad pattern".into(),
            ));
        }
        Ok(())
    }
}

/// Path-loss and LOS model for one link kind in one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    pub link_kind: LinkKind,
    pub scenario_kind: ScenarioKind,
    pub coeffs: PathLossCoeffs,
    pub los_curve: LosCurve,
    pub shadowing_std_db: f64,
    pub min_distance_m: f64,
}

impl PathLossModel {
    /// Path loss in dB. Distances below the floor are clamped to it. The
    /// NLOS branch never drops below the LOS branch.
    pub fn path_loss(&self, distance_m: f64, is_los: bool) -> f64 {
        let log_r = (distance_m.max(self.min_distance_m) / 1000.0).log10();
        let c = &self.coeffs;
        let los = c.los_intercept_db + c.los_slope_db * log_r;
        if is_los {
            los
        } else {
            (c.nlos_intercept_db + c.nlos_slope_db * log_r).max(los)
        }
    }

    pub fn los_probability(&self, distance_m: f64) -> f64 {
        self.los_curve.probability(distance_m.max(0.0) / 1000.0)
    }

    /// Draws the LOS state and shadowing of one link. Always consumes one
    /// uniform and one normal variate so streams stay aligned.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, distance_m: f64) -> LinkRealization {
        let u: f64 = rng.random();
        let z: f64 = rng.sample(StandardNormal);
        LinkRealization::new(
            u < self.los_probability(distance_m),
            self.shadowing_std_db * z,
        )
    }
}

/// Realized LOS state of one link and its shadowing term (dB, 0 for LOS).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRealization {
    pub los: bool,
    pub shadowing_db: f64,
}

impl LinkRealization {
    pub fn new(los: bool, nlos_shadowing_db: f64) -> Self {
        LinkRealization {
            los,
            shadowing_db: if los { 0.0 } else { nlos_shadowing_db },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGain {
    pub node_id: usize,
    pub terminal_id: usize,
    pub gain_db: f64,
}

/// Antenna gain towards `azimuth_offset_deg` from boresight.
pub fn antenna_gain(node: &Node, azimuth_offset_deg: f64, pattern: &AntennaPattern) -> f64 {
    match node.kind {
        NodeKind::MacroSector => {
            let x = azimuth_offset_deg / pattern.beamwidth_3db_deg;
            node.antenna_gain_dbi - (12.0 * x * x).min(pattern.max_attenuation_db)
        }
        NodeKind::RelayNode => node.antenna_gain_dbi,
    }
}

/// Gain of a link from its geometry and realized randomness.
pub fn gain_from_geometry(
    node: &Node,
    distance_m: f64,
    azimuth_deg: f64,
    penetration_loss_db: f64,
    model: &PathLossModel,
    pattern: &AntennaPattern,
    link: LinkRealization,
) -> f64 {
    -model.path_loss(distance_m, link.los) + antenna_gain(node, azimuth_deg, pattern)
        - penetration_loss_db
        - link.shadowing_db
}

pub fn link_gain(
    node: &Node,
    terminal: &UserTerminal,
    layout: &NetworkLayout,
    model: &PathLossModel,
    pattern: &AntennaPattern,
    link: LinkRealization,
) -> LinkGain {
    let (d, az) = wrap_distance(terminal.position, node, layout);
    LinkGain {
        node_id: node.id,
        terminal_id: terminal.id,
        gain_db: gain_from_geometry(
            node,
            d,
            az,
            terminal.penetration_loss_db,
            model,
            pattern,
            link,
        ),
    }
}
