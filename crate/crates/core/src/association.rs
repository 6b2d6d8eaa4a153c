//! Biased cell selection with macro power reduction (relay cell extension).
//!
//! A macro power reduction of `X` dB and a relay bias of `Y` dB shift every
//! macro-vs-relay comparison by the same `X + Y` dB. Selection therefore
//! scores macros at their nominal power and adds the effective bias to the
//! relay side, which keeps `(X, Y)` and `(0, X + Y)` bit-identical.

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::drop::DropState;
use crate::error::ConfigError;
use crate::exec::Parallelism;
use crate::propagation::{gain_from_geometry, LinkGain, LinkKind};
use crate::rng::{substream, StreamTag};
use crate::scenario::{wrap_distance, NetworkLayout, MAX_POWER_REDUCTION_DB};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub x_reduction_db: f64,
    pub y_bias_db: f64,
}

impl OperatingPoint {
    pub const NONE: OperatingPoint = OperatingPoint {
        x_reduction_db: 0.0,
        y_bias_db: 0.0,
    };

    pub fn new(x_reduction_db: f64, y_bias_db: f64) -> Result<Self, ConfigError> {
        if !(0.0..=MAX_POWER_REDUCTION_DB).contains(&x_reduction_db) {
            return Err(ConfigError::range(
                "power_reduction_db",
                x_reduction_db,
                "[0, 16]",
            ));
        }
        if !(y_bias_db.is_finite() && y_bias_db >= 0.0) {
            return Err(ConfigError::range("bias_db", y_bias_db, "[0, inf)"));
        }
        Ok(OperatingPoint {
            x_reduction_db,
            y_bias_db,
        })
    }

    /// Pure biasing with no power reduction.
    pub fn bias_only(y_bias_db: f64) -> Result<Self, ConfigError> {
        Self::new(0.0, y_bias_db)
    }

    pub fn effective_bias_db(&self) -> f64 {
        self.x_reduction_db + self.y_bias_db
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationMap {
    serving: Vec<usize>,
    counts: Vec<usize>,
}

impl AssociationMap {
    pub fn from_serving(serving: Vec<usize>, n_nodes: usize) -> Self {
        let mut counts = vec![0; n_nodes];
        for &s in &serving {
            counts[s] += 1;
        }
        AssociationMap { serving, counts }
    }

    pub fn serving(&self, terminal: usize) -> usize {
        self.serving[terminal]
    }

    pub fn serving_nodes(&self) -> &[usize] {
        &self.serving
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn cell_size(&self, node: usize) -> usize {
        self.counts[node]
    }

    /// Members of every cell in terminal (drop) order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.counts.len()];
        for (t, &s) in self.serving.iter().enumerate() {
            m[s].push(t);
        }
        m
    }

    pub fn relay_served_fraction(&self, layout: &NetworkLayout) -> f64 {
        if self.serving.is_empty() {
            return 0.0;
        }
        let n_macro = layout.n_macro();
        self.serving.iter().filter(|&&s| s >= n_macro).count() as f64 / self.serving.len() as f64
    }
}

#[inline]
fn score(node_tx_dbm: f64, is_macro: bool, gain_db: f64, effective_bias_db: f64) -> f64 {
    if is_macro {
        node_tx_dbm + gain_db
    } else {
        node_tx_dbm + gain_db + effective_bias_db
    }
}

/// Serving node for one terminal given its gains to every node. Ties go to
/// the lowest node id.
pub fn select_cell(layout: &NetworkLayout, gains: &[LinkGain], op: OperatingPoint) -> usize {
    let b = op.effective_bias_db();
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for g in gains {
        let node = &layout.nodes[g.node_id];
        let s = score(node.tx_power_dbm, node.is_macro(), g.gain_db, b);
        if s > best.1 || (s == best.1 && g.node_id < best.0) {
            best = (g.node_id, s);
        }
    }
    best.0
}

pub fn associate(drop: &DropState<'_>, op: OperatingPoint) -> AssociationMap {
    let b = op.effective_bias_db();
    let nodes = &drop.layout.nodes;
    let n_t = drop.n_terminals();
    let mut best = vec![(0usize, f64::NEG_INFINITY); n_t];
    for node in nodes {
        let is_macro = node.is_macro();
        for (t, slot) in best.iter_mut().enumerate() {
            let s = score(node.tx_power_dbm, is_macro, drop.gain_db(node.id, t), b);
            if s > slot.1 {
                *slot = (node.id, s);
            }
        }
    }
    AssociationMap::from_serving(best.into_iter().map(|(n, _)| n).collect(), nodes.len())
}

/// Strongest macro and relay selection scores at one location, before bias.
#[derive(Debug, Clone, Copy)]
struct AreaSample {
    best_macro: f64,
    best_relay: f64,
}

fn area_samples(
    cfg: &SimConfig,
    layout: &NetworkLayout,
    batch: usize,
    n: usize,
) -> Vec<AreaSample> {
    let mut rng = substream(cfg.scenario.seed, batch as u64, StreamTag::CoverageSamples);
    let macro_model = cfg
        .propagation
        .model(LinkKind::MacroToUe, cfg.scenario.scenario);
    let relay_model = cfg
        .propagation
        .model(LinkKind::RelayToUe, cfg.scenario.scenario);
    let pen = cfg.radio.penetration_loss_db;
    let pattern = &cfg.propagation.macro_antenna;
    (0..n)
        .map(|_| {
            let p = layout.sample_point(&mut rng);
            let mut s = AreaSample {
                best_macro: f64::NEG_INFINITY,
                best_relay: f64::NEG_INFINITY,
            };
            for node in &layout.nodes {
                let model = if node.is_macro() {
                    &macro_model
                } else {
                    &relay_model
                };
                let (d, az) = wrap_distance(p, node, layout);
                let link = model.draw(&mut rng, d);
                let rx =
                    node.tx_power_dbm + gain_from_geometry(node, d, az, pen, model, pattern, link);
                if node.is_macro() {
                    s.best_macro = s.best_macro.max(rx);
                } else {
                    s.best_relay = s.best_relay.max(rx);
                }
            }
            s
        })
        .collect()
}

/// Fraction of the network area served by relays at each operating point.
///
/// `n_area_samples` uniform locations, split into `realizations` batches
/// with independent LOS and shadowing draws, are shared by all operating
/// points, so the fractions are directly comparable.
pub fn coverage_fractions(
    cfg: &SimConfig,
    layout: &NetworkLayout,
    ops: &[OperatingPoint],
    n_area_samples: usize,
    realizations: usize,
    par: Parallelism,
) -> Vec<f64> {
    if layout.n_relays() == 0 || n_area_samples == 0 {
        return vec![0.0; ops.len()];
    }
    let realizations = realizations.clamp(1, n_area_samples);
    let batches = par.map_indexed(realizations, |b| {
        let n = n_area_samples / realizations + usize::from(b < n_area_samples % realizations);
        area_samples(cfg, layout, b, n)
    });
    ops.iter()
        .map(|op| {
            let bias = op.effective_bias_db();
            let covered: usize = batches
                .iter()
                .map(|batch| {
                    batch
                        .iter()
                        .filter(|s| s.best_relay + bias > s.best_macro)
                        .count()
                })
                .sum();
            covered as f64 / n_area_samples as f64
        })
        .collect()
}

pub fn coverage_fraction(
    cfg: &SimConfig,
    layout: &NetworkLayout,
    op: OperatingPoint,
    n_area_samples: usize,
    realizations: usize,
    par: Parallelism,
) -> f64 {
    coverage_fractions(cfg, layout, &[op], n_area_samples, realizations, par)[0]
}
