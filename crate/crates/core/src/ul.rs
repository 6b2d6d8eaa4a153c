//! Uplink: open-loop fractional power control, round-robin PRB allocation,
//! co-PRB inter-cell interference and uplink throughput.
//!
//! Terminal transmit power follows `min(P_max, P0 + 10·log10(M) + α·L)`
//! where `L` is the negated gain of the serving link (antennas,
//! penetration and shadowing included). `L` does not depend on the macro
//! power reduction, so the macro reduction influences the uplink only
//! through association.
//!
//! Within a cell PRBs are orthogonal. Each cell hands out contiguous PRB
//! blocks to its terminals in drop order; on every PRB index the occupant
//! of each other cell interferes at the receiver.

use serde::{Deserialize, Serialize};

use crate::association::AssociationMap;
use crate::config::RadioParams;
use crate::dl::ShannonMapping;
use crate::drop::DropState;
use crate::error::{ConfigError, Error};
use crate::scenario::ScenarioKind;
use crate::{db_to_linear, linear_to_db};

pub const P0_MIN_DBM: f64 = -126.0;
pub const P0_MAX_DBM: f64 = 23.0;
pub const P_MAX_CAP_DBM: f64 = 23.0;
/// Legal path-loss compensation factors.
pub const ALPHAS: [f64; 8] = [0.0, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerControlConfig {
    pub p0_dbm: f64,
    pub alpha: f64,
    pub p_max_dbm: f64,
}

impl PowerControlConfig {
    /// Validates against the 1 dB P0 grid, the legal α set and the 23 dBm
    /// terminal limit. α is snapped to the exact legal value.
    pub fn new(p0_dbm: f64, alpha: f64, p_max_dbm: f64) -> Result<Self, ConfigError> {
        if !(P0_MIN_DBM..=P0_MAX_DBM).contains(&p0_dbm) || p0_dbm.fract() != 0.0 {
            return Err(ConfigError::range(
                "p0_dbm",
                p0_dbm,
                "[-126, 23] in 1 dB steps",
            ));
        }
        let alpha = ALPHAS
            .iter()
            .copied()
            .find(|a| (a - alpha).abs() < 1e-9)
            .ok_or_else(|| {
                ConfigError::range("alpha", alpha, "{0, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}")
            })?;
        if !(p_max_dbm <= P_MAX_CAP_DBM && p_max_dbm.is_finite()) {
            return Err(ConfigError::range("p_max_dbm", p_max_dbm, "(-inf, 23]"));
        }
        Ok(PowerControlConfig {
            p0_dbm,
            alpha,
            p_max_dbm,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        Self::new(self.p0_dbm, self.alpha, self.p_max_dbm).map(|_| ())
    }
}

/// One power-control triple per serving-node class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerControlConfigs {
    pub macro_served: PowerControlConfig,
    pub relay_served: PowerControlConfig,
}

impl PowerControlConfigs {
    pub fn shared(pc: PowerControlConfig) -> Self {
        PowerControlConfigs {
            macro_served: pc,
            relay_served: pc,
        }
    }

    /// Conventional eNB-only operating settings: full compensation in the
    /// interference-limited urban case, fractional in the suburban case.
    pub fn default_for(kind: ScenarioKind) -> Self {
        let pc = match kind {
            ScenarioKind::Urban => PowerControlConfig {
                p0_dbm: -101.0,
                alpha: 1.0,
                p_max_dbm: 23.0,
            },
            ScenarioKind::Suburban => PowerControlConfig {
                p0_dbm: -63.0,
                alpha: 0.6,
                p_max_dbm: 23.0,
            },
        };
        Self::shared(pc)
    }

    pub fn for_class(&self, macro_served: bool) -> &PowerControlConfig {
        if macro_served {
            &self.macro_served
        } else {
            &self.relay_served
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.macro_served.validate()?;
        self.relay_served.validate()
    }
}

/// `min(P_max, P0 + 10·log10(M) + α·L)` in dBm.
pub fn ue_tx_power(
    pc: &PowerControlConfig,
    m_prbs: usize,
    path_loss_db: f64,
) -> Result<f64, Error> {
    if m_prbs == 0 {
        return Err(Error::ZeroPrbs);
    }
    Ok(tx_power(pc, m_prbs, path_loss_db))
}

#[inline]
fn tx_power(pc: &PowerControlConfig, m_prbs: usize, path_loss_db: f64) -> f64 {
    pc.p_max_dbm
        .min(pc.p0_dbm + 10.0 * (m_prbs as f64).log10() + pc.alpha * path_loss_db)
}

/// Equal split of `total` PRBs over `n` terminals; the first `total % n`
/// terminals get one extra. Beyond `total` terminals the excess get none.
pub fn allocate_prbs(n: usize, total: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let base = total / n;
    let extra = total % n;
    (0..n).map(|i| base + usize::from(i < extra)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlTerminal {
    pub serving: usize,
    /// `-inf` when the terminal received no PRB.
    pub tx_power_dbm: f64,
    pub m_prbs: usize,
    pub first_prb: usize,
    pub path_loss_db: f64,
    pub sinr_db: f64,
    pub throughput_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UlResult {
    pub terminals: Vec<UlTerminal>,
}

impl UlResult {
    pub fn throughputs(&self) -> impl Iterator<Item = f64> + '_ {
        self.terminals.iter().map(|t| t.throughput_bps)
    }
}

#[derive(Debug, Clone)]
struct CtxTerminal {
    rx: usize,
    macro_served: bool,
    path_loss_db: f64,
    m: usize,
    first_prb: usize,
    /// Bucket slot: group offset + block index.
    slot: usize,
}

#[derive(Debug, Clone)]
struct CtxReceiver {
    node: usize,
    noise_lin: f64,
    members: Vec<usize>,
}

#[derive(Debug, Clone)]
struct SizeGroup {
    offset: usize,
    block_of_prb: Vec<usize>,
}

/// Drop state reduced to what the uplink needs for a fixed association:
/// receivers with at least one terminal, per-terminal PRB blocks and the
/// linear gains from every terminal to every active receiver. Evaluating a
/// power-control setting touches nothing else.
#[derive(Debug, Clone)]
pub struct UlContext {
    n_prbs: usize,
    prb_bandwidth_hz: f64,
    mapping: ShannonMapping,
    terminals: Vec<CtxTerminal>,
    serving_node: Vec<usize>,
    receivers: Vec<CtxReceiver>,
    gains_lin: Vec<f64>,
    groups: Vec<SizeGroup>,
    n_slots: usize,
}

impl UlContext {
    pub fn new(
        drop: &DropState<'_>,
        association: &AssociationMap,
        radio: &RadioParams,
        mapping: &ShannonMapping,
    ) -> Self {
        let n_prbs = radio.n_prbs;
        let n_t = drop.n_terminals();
        let n_macro = drop.layout.n_macro();
        let members = association.members();

        // one slot group per distinct cell size; cells of equal size share
        // block boundaries
        let mut sizes: Vec<usize> = members.iter().map(Vec::len).filter(|&n| n > 0).collect();
        sizes.sort_unstable();
        sizes.dedup();
        let mut groups = Vec::with_capacity(sizes.len());
        let mut n_slots = 0;
        for &n in &sizes {
            let alloc = allocate_prbs(n, n_prbs);
            let mut block_of_prb = Vec::with_capacity(n_prbs);
            for (j, &m) in alloc.iter().enumerate() {
                block_of_prb.extend(std::iter::repeat_n(j, m));
            }
            groups.push(SizeGroup {
                offset: n_slots,
                block_of_prb,
            });
            n_slots += n.min(n_prbs);
        }

        let mut terminals = vec![
            CtxTerminal {
                rx: usize::MAX,
                macro_served: true,
                path_loss_db: 0.0,
                m: 0,
                first_prb: 0,
                slot: 0,
            };
            n_t
        ];
        let mut receivers = Vec::new();
        let mut gains_lin = Vec::new();
        for (node, cell) in members.iter().enumerate() {
            if cell.is_empty() {
                continue;
            }
            let rx = receivers.len();
            let group = &groups[sizes.binary_search(&cell.len()).expect("size present")];
            let alloc = allocate_prbs(cell.len(), n_prbs);
            let mut first = 0;
            for (j, (&t, &m)) in cell.iter().zip(&alloc).enumerate() {
                terminals[t] = CtxTerminal {
                    rx,
                    macro_served: node < n_macro,
                    path_loss_db: -drop.gain_db(node, t),
                    m,
                    first_prb: first,
                    slot: group.offset + j.min(n_prbs.saturating_sub(1)),
                };
                first += m;
            }
            let nf = drop.layout.nodes[node].noise_figure_db;
            receivers.push(CtxReceiver {
                node,
                noise_lin: db_to_linear(radio.ul_noise_per_prb_dbm(nf)),
                members: cell.clone(),
            });
            gains_lin.extend_from_slice(drop.node_gains_lin(node));
        }
        UlContext {
            n_prbs,
            prb_bandwidth_hz: radio.prb_bandwidth_hz,
            mapping: *mapping,
            terminals,
            serving_node: association.serving_nodes().to_vec(),
            receivers,
            gains_lin,
            groups,
            n_slots,
        }
    }

    pub fn n_terminals(&self) -> usize {
        self.terminals.len()
    }

    /// `(macro_served, M, L)` of every terminal holding at least one PRB.
    pub fn transmitters(&self) -> impl Iterator<Item = (bool, usize, f64)> + '_ {
        self.terminals
            .iter()
            .filter(|t| t.m > 0)
            .map(|t| (t.macro_served, t.m, t.path_loss_db))
    }

    fn run(&self, pcs: &PowerControlConfigs, mut sink: impl FnMut(usize, f64, f64, f64)) {
        let n_t = self.terminals.len();
        let mut tx_dbm = vec![f64::NEG_INFINITY; n_t];
        let mut psd_lin = vec![0.0; n_t];
        for (t, ct) in self.terminals.iter().enumerate() {
            if ct.m > 0 {
                let p = tx_power(pcs.for_class(ct.macro_served), ct.m, ct.path_loss_db);
                tx_dbm[t] = p;
                psd_lin[t] = db_to_linear(p - 10.0 * (ct.m as f64).log10());
            }
        }
        let mut sinr_db = vec![f64::NEG_INFINITY; n_t];
        let mut slots = vec![0.0; self.n_slots];
        let mut interference = vec![0.0; self.n_prbs];
        for (r, rx) in self.receivers.iter().enumerate() {
            let row = &self.gains_lin[r * n_t..(r + 1) * n_t];
            slots.iter_mut().for_each(|s| *s = 0.0);
            for (t, ct) in self.terminals.iter().enumerate() {
                if ct.m > 0 && ct.rx != r {
                    slots[ct.slot] += psd_lin[t] * row[t];
                }
            }
            for (k, i) in interference.iter_mut().enumerate() {
                *i = self
                    .groups
                    .iter()
                    .map(|g| g.block_of_prb.get(k).map_or(0.0, |&b| slots[g.offset + b]))
                    .sum();
            }
            for &v in &rx.members {
                let cv = &self.terminals[v];
                if cv.m == 0 {
                    continue;
                }
                let signal = psd_lin[v] * row[v];
                let mean: f64 = interference[cv.first_prb..cv.first_prb + cv.m]
                    .iter()
                    .map(|i| signal / (rx.noise_lin + i))
                    .sum::<f64>()
                    / cv.m as f64;
                sinr_db[v] = linear_to_db(mean);
            }
        }
        for (t, ct) in self.terminals.iter().enumerate() {
            let thr = if ct.m > 0 {
                ct.m as f64 * self.prb_bandwidth_hz * self.mapping.spectral_efficiency(sinr_db[t])
            } else {
                0.0
            };
            sink(t, tx_dbm[t], sinr_db[t], thr);
        }
    }

    pub fn evaluate(&self, pcs: &PowerControlConfigs) -> UlResult {
        let mut terminals = Vec::with_capacity(self.terminals.len());
        self.run(pcs, |t, tx, sinr, thr| {
            let ct = &self.terminals[t];
            terminals.push(UlTerminal {
                serving: self.serving_node[t],
                tx_power_dbm: tx,
                m_prbs: ct.m,
                first_prb: ct.first_prb,
                path_loss_db: ct.path_loss_db,
                sinr_db: sinr,
                throughput_bps: thr,
            });
        });
        UlResult { terminals }
    }

    /// Appends every terminal's throughput to `out`.
    pub fn throughputs_into(&self, pcs: &PowerControlConfigs, out: &mut Vec<f64>) {
        self.run(pcs, |_, _, _, thr| out.push(thr));
    }

    /// Node ids of the receivers with at least one terminal.
    pub fn active_receivers(&self) -> impl Iterator<Item = usize> + '_ {
        self.receivers.iter().map(|r| r.node)
    }
}

pub fn ul_drop_throughputs(
    drop: &DropState<'_>,
    association: &AssociationMap,
    pcs: &PowerControlConfigs,
    radio: &RadioParams,
    mapping: &ShannonMapping,
) -> UlResult {
    UlContext::new(drop, association, radio, mapping).evaluate(pcs)
}

/// Uplink SINR of one terminal (mean linear SINR over its PRBs, in dB).
pub fn ul_sinr(
    drop: &DropState<'_>,
    association: &AssociationMap,
    terminal: usize,
    pcs: &PowerControlConfigs,
    radio: &RadioParams,
    mapping: &ShannonMapping,
) -> f64 {
    ul_drop_throughputs(drop, association, pcs, radio, mapping).terminals[terminal].sinr_db
}
