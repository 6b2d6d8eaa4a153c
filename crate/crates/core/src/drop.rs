//! One Monte Carlo drop: terminal positions plus the realized gain of every
//! node–terminal link.
//!
//! Macro links and relay links come from separate substreams, so a relay
//! deployment and its eNB-only reference see identical terminals and
//! identical macro-link realizations (common random numbers). The same gain
//! is used in both directions of a link.

use crate::config::SimConfig;
use crate::db_to_linear;
use crate::error::ConfigError;
use crate::propagation::{link_gain, LinkGain, LinkKind, LinkRealization, PropagationTable};
use crate::rng::{substream, StreamTag};
use crate::scenario::{drop_users, wrap_distance, NetworkLayout, ScenarioKind, UserTerminal};

#[derive(Debug, Clone)]
pub struct DropState<'a> {
    pub layout: &'a NetworkLayout,
    pub terminals: Vec<UserTerminal>,
    n_terminals: usize,
    links: Vec<LinkRealization>,
    gains_db: Vec<f64>,
    gains_lin: Vec<f64>,
}

impl<'a> DropState<'a> {
    /// Drops terminals and realizes all links for `drop_index`.
    pub fn realize(
        cfg: &SimConfig,
        layout: &'a NetworkLayout,
        drop_index: usize,
    ) -> Result<Self, ConfigError> {
        let terminals = drop_users(layout, &cfg.scenario, &cfg.radio, drop_index)?;
        Ok(Self::with_terminals(
            layout,
            terminals,
            cfg.scenario.scenario,
            &cfg.propagation,
            cfg.scenario.seed,
            drop_index,
        ))
    }

    /// Realizes links for explicitly placed terminals.
    pub fn with_terminals(
        layout: &'a NetworkLayout,
        terminals: Vec<UserTerminal>,
        scenario: ScenarioKind,
        table: &PropagationTable,
        seed: u64,
        drop_index: usize,
    ) -> Self {
        let n_t = terminals.len();
        let n_nodes = layout.nodes.len();
        let mut links = Vec::with_capacity(n_nodes * n_t);
        let mut gains_db = Vec::with_capacity(n_nodes * n_t);
        let mut macro_rng = substream(seed, drop_index as u64, StreamTag::MacroLinks);
        let mut relay_rng = substream(seed, drop_index as u64, StreamTag::RelayLinks);
        for node in &layout.nodes {
            let kind = LinkKind::from(node.kind);
            let model = table.model(kind, scenario);
            let rng = match kind {
                LinkKind::MacroToUe => &mut macro_rng,
                LinkKind::RelayToUe => &mut relay_rng,
            };
            for t in &terminals {
                let (d, _) = wrap_distance(t.position, node, layout);
                let link = model.draw(rng, d);
                gains_db
                    .push(link_gain(node, t, layout, &model, &table.macro_antenna, link).gain_db);
                links.push(link);
            }
        }
        Self::assemble(layout, terminals, links, gains_db)
    }

    /// Uses caller-supplied gains (node-major, `gains_db[node * n_t + t]`).
    /// All links are marked NLOS with the implied shadowing unknown (0).
    pub fn from_gains(
        layout: &'a NetworkLayout,
        terminals: Vec<UserTerminal>,
        gains_db: Vec<f64>,
    ) -> Self {
        assert_eq!(gains_db.len(), layout.nodes.len() * terminals.len());
        let links = vec![LinkRealization::new(false, 0.0); gains_db.len()];
        Self::assemble(layout, terminals, links, gains_db)
    }

    fn assemble(
        layout: &'a NetworkLayout,
        terminals: Vec<UserTerminal>,
        links: Vec<LinkRealization>,
        gains_db: Vec<f64>,
    ) -> Self {
        let gains_lin = gains_db.iter().map(|&g| db_to_linear(g)).collect();
        DropState {
            layout,
            n_terminals: terminals.len(),
            terminals,
            links,
            gains_db,
            gains_lin,
        }
    }

    pub fn n_terminals(&self) -> usize {
        self.n_terminals
    }

    pub fn n_nodes(&self) -> usize {
        self.layout.nodes.len()
    }

    #[inline]
    pub fn gain_db(&self, node: usize, terminal: usize) -> f64 {
        self.gains_db[node * self.n_terminals + terminal]
    }

    #[inline]
    pub fn gain_lin(&self, node: usize, terminal: usize) -> f64 {
        self.gains_lin[node * self.n_terminals + terminal]
    }

    /// Linear gains from every terminal to `node`.
    pub fn node_gains_lin(&self, node: usize) -> &[f64] {
        &self.gains_lin[node * self.n_terminals..(node + 1) * self.n_terminals]
    }

    pub fn link(&self, node: usize, terminal: usize) -> LinkRealization {
        self.links[node * self.n_terminals + terminal]
    }

    pub fn gains_for_terminal(&self, terminal: usize) -> Vec<LinkGain> {
        (0..self.n_nodes())
            .map(|node| LinkGain {
                node_id: node,
                terminal_id: terminal,
                gain_db: self.gain_db(node, terminal),
            })
            .collect()
    }

    /// Shifts every gain by `delta_db` (sensitivity checks).
    pub fn shifted(&self, delta_db: f64) -> DropState<'a> {
        let g = self.gains_db.iter().map(|g| g + delta_db).collect();
        Self::assemble(self.layout, self.terminals.clone(), self.links.clone(), g)
    }
}
