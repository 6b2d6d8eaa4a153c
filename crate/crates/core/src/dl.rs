//! Downlink SINR under full reuse, round-robin sharing and the capped
//! Shannon throughput mapping.

use serde::{Deserialize, Serialize};

use crate::association::{AssociationMap, OperatingPoint};
use crate::config::RadioParams;
use crate::drop::DropState;
use crate::error::ConfigError;
use crate::{db_to_linear, linear_to_db};

/// `min(max_se, bw_eff·log2(1 + sinr/sinr_eff))` above the SINR floor,
/// zero below it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShannonMapping {
    pub bw_eff: f64,
    pub sinr_eff: f64,
    pub max_spectral_eff: f64,
    pub sinr_floor_db: f64,
}

impl Default for ShannonMapping {
    fn default() -> Self {
        ShannonMapping {
            bw_eff: 0.56,
            sinr_eff: 1.25,
            max_spectral_eff: 6.0 * 0.9,
            sinr_floor_db: -7.0,
        }
    }
}

impl ShannonMapping {
    /// Spectral efficiency in bps/Hz.
    pub fn spectral_efficiency(&self, sinr_db: f64) -> f64 {
        if !(sinr_db >= self.sinr_floor_db) {
            return 0.0;
        }
        let se = self.bw_eff * (1.0 + db_to_linear(sinr_db) / self.sinr_eff).log2();
        se.min(self.max_spectral_eff)
    }

    pub fn in_outage(&self, sinr_db: f64) -> bool {
        !(sinr_db >= self.sinr_floor_db)
    }

    pub(crate) fn validate(&self, table: &str) -> Result<(), ConfigError> {
        for (k, v) in [
            ("bw_eff", self.bw_eff),
            ("sinr_eff", self.sinr_eff),
            ("max_spectral_eff", self.max_spectral_eff),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::range(format!("{table}.{k}"), v, "(0, inf)"));
            }
        }
        if !self.sinr_floor_db.is_finite() {
            return Err(ConfigError::range(
                format!("{table}.sinr_floor_db"),
                self.sinr_floor_db,
                "finite",
            ));
        }
        Ok(())
    }
}

pub fn shannon_throughput(sinr_db: f64, bandwidth_hz: f64, mapping: &ShannonMapping) -> f64 {
    bandwidth_hz * mapping.spectral_efficiency(sinr_db)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlTerminal {
    pub serving: usize,
    pub sinr_db: f64,
    pub prb_share: f64,
    pub throughput_bps: f64,
    pub outage: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DlResult {
    pub terminals: Vec<DlTerminal>,
}

impl DlResult {
    pub fn throughputs(&self) -> impl Iterator<Item = f64> + '_ {
        self.terminals.iter().map(|t| t.throughput_bps)
    }

    pub fn outage_count(&self) -> usize {
        self.terminals.iter().filter(|t| t.outage).count()
    }
}

/// Linear transmit power of every node at `op` (macros reduced by X).
fn tx_powers_lin(drop: &DropState<'_>, op: OperatingPoint) -> Vec<f64> {
    drop.layout
        .nodes
        .iter()
        .map(|n| {
            let p = if n.is_macro() {
                n.tx_power_dbm - op.x_reduction_db
            } else {
                n.tx_power_dbm
            };
            db_to_linear(p)
        })
        .collect()
}

fn sinr_with(
    drop: &DropState<'_>,
    tx_lin: &[f64],
    serving: usize,
    terminal: usize,
    noise_lin: f64,
) -> f64 {
    let mut interference = 0.0;
    for (node, &p) in tx_lin.iter().enumerate() {
        if node != serving {
            interference += p * drop.gain_lin(node, terminal);
        }
    }
    let signal = tx_lin[serving] * drop.gain_lin(serving, terminal);
    linear_to_db(signal / (interference + noise_lin))
}

/// Downlink SINR of `terminal`: every non-serving node interferes
/// (including the donor macro of a relay-served terminal).
pub fn dl_sinr(
    drop: &DropState<'_>,
    association: &AssociationMap,
    terminal: usize,
    op: OperatingPoint,
    noise_dbm: f64,
) -> f64 {
    let tx = tx_powers_lin(drop, op);
    sinr_with(
        drop,
        &tx,
        association.serving(terminal),
        terminal,
        db_to_linear(noise_dbm),
    )
}

/// Per-terminal SINR and throughput for one drop. Each cell's band is
/// shared equally among its terminals; the relay backhaul is ideal.
pub fn dl_drop_throughputs(
    drop: &DropState<'_>,
    association: &AssociationMap,
    op: OperatingPoint,
    radio: &RadioParams,
    mapping: &ShannonMapping,
) -> DlResult {
    let tx = tx_powers_lin(drop, op);
    let noise_lin = db_to_linear(radio.dl_noise_dbm());
    let terminals = (0..drop.n_terminals())
        .map(|t| {
            let serving = association.serving(t);
            let sinr_db = sinr_with(drop, &tx, serving, t, noise_lin);
            let share = 1.0 / association.cell_size(serving) as f64;
            DlTerminal {
                serving,
                sinr_db,
                prb_share: share,
                throughput_bps: shannon_throughput(sinr_db, radio.bandwidth_hz, mapping) * share,
                outage: mapping.in_outage(sinr_db),
            }
        })
        .collect();
    DlResult { terminals }
}
