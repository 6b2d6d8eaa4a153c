//! Uplink power-control optimization strategies.
//!
//! * Strategy I tunes one shared triple on the eNB-only deployment and uses
//!   it at every node class.
//! * Strategy II picks one per-class pair that is kept for all biases. It
//!   maximizes the worst-case 5%-ile improvement over strategy I while the
//!   50%-ile stays at or above the constraint baseline at every bias.
//! * Strategy III re-optimizes the per-class pair at each bias under the
//!   same 50%-ile constraint.
//!
//! Every search starts from (and evaluates) the previous strategy's
//! result and only accepts strict improvements, so III ≥ II ≥ I at the
//! 5%-ile holds by construction. The search is coarse-to-fine coordinate
//! descent over the class triples.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::association::{associate, OperatingPoint};
use crate::config::SimConfig;
use crate::drop::DropState;
use crate::error::Result;
use crate::exec::Parallelism;
use crate::metrics::{gain_from_levels, percentile_unsorted};
use crate::scenario::build_layout;
use crate::ul::{
    PowerControlConfig, PowerControlConfigs, UlContext, ALPHAS, P0_MAX_DBM, P0_MIN_DBM,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PcStrategyKind {
    #[serde(rename = "I_eNbOnlySetting")]
    EnbOnlySetting,
    #[serde(rename = "II_RelayOptimized")]
    RelayOptimized,
    #[serde(rename = "III_PerBiasOptimized")]
    PerBiasOptimized,
}

impl PcStrategyKind {
    pub const ALL: [PcStrategyKind; 3] = [
        PcStrategyKind::EnbOnlySetting,
        PcStrategyKind::RelayOptimized,
        PcStrategyKind::PerBiasOptimized,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PcStrategyKind::EnbOnlySetting => "I",
            PcStrategyKind::RelayOptimized => "II",
            PcStrategyKind::PerBiasOptimized => "III",
        }
    }
}

/// Reference for the "no 50%-ile degradation" constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintBaseline {
    /// Strategy I on the relay deployment at the same bias.
    #[default]
    StrategyI,
    /// Strategy I on the eNB-only deployment.
    EnbOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcSearchSpace {
    pub p0_min_dbm: i32,
    pub p0_max_dbm: i32,
    pub coarse_step_db: i32,
    pub fine_radius_db: i32,
    pub alphas: Vec<f64>,
    pub p_max_dbm: Vec<f64>,
    /// Full coordinate passes over the node classes.
    pub max_rounds: usize,
    /// Drops used for the coarse stage; 0 screens on all drops. The final
    /// acceptance and the fine pass always use every drop.
    pub screening_drops: usize,
}

impl Default for PcSearchSpace {
    fn default() -> Self {
        PcSearchSpace {
            p0_min_dbm: P0_MIN_DBM as i32,
            p0_max_dbm: P0_MAX_DBM as i32,
            coarse_step_db: 4,
            fine_radius_db: 3,
            alphas: ALPHAS.to_vec(),
            p_max_dbm: vec![23.0, 15.0],
            max_rounds: 2,
            screening_drops: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PcStrategy {
    pub search_space: PcSearchSpace,
    pub constraint: ConstraintBaseline,
}

/// Result of one strategy at one bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcPoint {
    pub strategy: PcStrategyKind,
    pub bias_db: f64,
    pub configs: PowerControlConfigs,
    pub p5_bps: f64,
    pub p50_bps: f64,
    /// Against strategy I on the eNB-only deployment; `None` if undefined.
    pub gain_5pct_percent: Option<f64>,
    pub gain_50pct_percent: Option<f64>,
    /// Set when no configuration met the 50%-ile constraint and the
    /// strategy-I configuration was returned instead.
    pub infeasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcReport {
    pub strategy_i: PowerControlConfig,
    pub reference_p5_bps: f64,
    pub reference_p50_bps: f64,
    pub points: Vec<PcPoint>,
    pub evaluations: usize,
}

impl PcReport {
    pub fn point(&self, kind: PcStrategyKind, bias_db: f64) -> Option<&PcPoint> {
        self.points
            .iter()
            .find(|p| p.strategy == kind && p.bias_db == bias_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Levels {
    p5: f64,
    p50: f64,
}

/// Which class triples a search step may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ClassSel {
    Shared,
    Macro,
    Relay,
}

impl ClassSel {
    fn get(self, c: &PowerControlConfigs) -> PowerControlConfig {
        match self {
            ClassSel::Shared | ClassSel::Macro => c.macro_served,
            ClassSel::Relay => c.relay_served,
        }
    }

    fn set(self, c: &PowerControlConfigs, pc: PowerControlConfig) -> PowerControlConfigs {
        match self {
            ClassSel::Shared => PowerControlConfigs::shared(pc),
            ClassSel::Macro => PowerControlConfigs {
                macro_served: pc,
                ..*c
            },
            ClassSel::Relay => PowerControlConfigs {
                relay_served: pc,
                ..*c
            },
        }
    }

    fn matches(self, macro_served: bool) -> bool {
        match self {
            ClassSel::Shared => true,
            ClassSel::Macro => macro_served,
            ClassSel::Relay => !macro_served,
        }
    }
}

type ConfigKey = [u64; 6];

fn key(c: &PowerControlConfigs) -> ConfigKey {
    let (m, r) = (c.macro_served, c.relay_served);
    [
        m.p0_dbm.to_bits(),
        m.alpha.to_bits(),
        m.p_max_dbm.to_bits(),
        r.p0_dbm.to_bits(),
        r.alpha.to_bits(),
        r.p_max_dbm.to_bits(),
    ]
}

/// Cached per-drop uplink contexts for one deployment at one bias.
struct ContextSet {
    contexts: Vec<UlContext>,
    cache: HashMap<(usize, ConfigKey), Levels>,
}

impl ContextSet {
    /// Pooled levels over the first `n_drops` drops.
    fn levels(
        &mut self,
        pcs: &PowerControlConfigs,
        n_drops: usize,
        par: Parallelism,
        evaluations: &mut usize,
    ) -> Levels {
        let n_drops = n_drops.min(self.contexts.len());
        if let Some(l) = self.cache.get(&(n_drops, key(pcs))) {
            return *l;
        }
        *evaluations += 1;
        let contexts = &self.contexts[..n_drops];
        let parts = par.map_indexed(contexts.len(), |i| {
            let mut v = Vec::with_capacity(contexts[i].n_terminals());
            contexts[i].throughputs_into(pcs, &mut v);
            v
        });
        let mut all: Vec<f64> = parts.concat();
        let p5 = percentile_unsorted(&mut all, 0.05).unwrap_or(0.0);
        let p50 = percentile_unsorted(&mut all, 0.5).unwrap_or(0.0);
        let l = Levels { p5, p50 };
        self.cache.insert((n_drops, key(pcs)), l);
        l
    }

    /// Smallest `10·log10(M) + α·L` over the class's transmitters; P0 at
    /// or above `p_max` minus this clamps the whole class.
    fn min_control_term(&self, sel: ClassSel, alpha: f64, n_drops: usize) -> Option<f64> {
        self.contexts[..n_drops.min(self.contexts.len())]
            .iter()
            .flat_map(|c| c.transmitters())
            .filter(|&(macro_served, _, _)| sel.matches(macro_served))
            .map(|(_, m, l)| 10.0 * (m as f64).log10() + alpha * l)
            .min_by(f64::total_cmp)
    }
}

/// Lexicographic objective; `None` marks an infeasible configuration.
type Score = Option<(f64, f64)>;

fn better(a: Score, b: Score) -> bool {
    match (a, b) {
        (Some(_), None) => true,
        (Some((a1, a2)), Some((b1, b2))) => a1 > b1 || (a1 == b1 && a2 > b2),
        _ => false,
    }
}

pub struct PcOptimizer {
    space: PcSearchSpace,
    constraint: ConstraintBaseline,
    par: Parallelism,
    baseline: ContextSet,
    biases: Vec<f64>,
    relay: Vec<ContextSet>,
    n_drops: usize,
    /// Drops the current search stage evaluates on.
    active_drops: usize,
    evaluations: usize,
}

impl PcOptimizer {
    /// Realizes every drop once, for the eNB-only and the relay deployment,
    /// and caches uplink contexts at each bias.
    pub fn new(
        cfg: &SimConfig,
        strategy: &PcStrategy,
        biases: &[f64],
        par: Parallelism,
    ) -> Result<Self> {
        cfg.validate()?;
        let ops = biases
            .iter()
            .map(|&b| OperatingPoint::bias_only(b))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let base_cfg = cfg.baseline();
        let base_layout = build_layout(&base_cfg.scenario, &base_cfg.radio)?;
        let layout = build_layout(&cfg.scenario, &cfg.radio)?;
        let n = cfg.scenario.n_drops;

        let base = par.map_indexed(n, |d| -> Result<UlContext> {
            let drop = DropState::realize(&base_cfg, &base_layout, d)?;
            let assoc = associate(&drop, OperatingPoint::NONE);
            Ok(UlContext::new(
                &drop,
                &assoc,
                &base_cfg.radio,
                &base_cfg.ul_mapping,
            ))
        });
        let per_drop = par.map_indexed(n, |d| -> Result<Vec<UlContext>> {
            let drop = DropState::realize(cfg, &layout, d)?;
            Ok(ops
                .iter()
                .map(|&op| {
                    UlContext::new(&drop, &associate(&drop, op), &cfg.radio, &cfg.ul_mapping)
                })
                .collect())
        });

        let baseline = ContextSet {
            contexts: base.into_iter().collect::<Result<_>>()?,
            cache: HashMap::new(),
        };
        let mut relay: Vec<ContextSet> = ops
            .iter()
            .map(|_| ContextSet {
                contexts: Vec::with_capacity(n),
                cache: HashMap::new(),
            })
            .collect();
        for drop in per_drop {
            for (set, ctx) in relay.iter_mut().zip(drop?) {
                set.contexts.push(ctx);
            }
        }
        Ok(PcOptimizer {
            space: strategy.search_space.clone(),
            constraint: strategy.constraint,
            par,
            baseline,
            biases: biases.to_vec(),
            relay,
            n_drops: n,
            active_drops: n,
            evaluations: 0,
        })
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn p0_grid(&self, pmax: f64, min_term: Option<f64>) -> Vec<f64> {
        // Above the clamp threshold every value gives the same result.
        let hi = match min_term {
            Some(t) => (self.space.p0_max_dbm as f64).min((pmax - t).ceil()),
            None => self.space.p0_min_dbm as f64,
        };
        let mut out = Vec::new();
        let mut p0 = self.space.p0_min_dbm;
        loop {
            out.push(p0 as f64);
            if p0 as f64 >= hi || p0 >= self.space.p0_max_dbm {
                break;
            }
            p0 = (p0 + self.space.coarse_step_db).min(self.space.p0_max_dbm);
        }
        out
    }

    /// Coarse coordinate search (optionally on a drop subset), then a
    /// fine pass on all drops. The result never scores below `start` on
    /// the full drop set.
    fn search(
        &mut self,
        start: PowerControlConfigs,
        classes: &[ClassSel],
        sets: &[usize],
        score: &mut dyn FnMut(&mut Self, &PowerControlConfigs) -> Score,
    ) -> (PowerControlConfigs, Score) {
        let screen = self.space.screening_drops;
        let mut best = start;
        let mut best_score = score(self, &start);
        if screen > 0 && screen < self.n_drops {
            self.active_drops = screen;
            let (cand, _) = self.coordinate(start, classes, sets, score);
            self.active_drops = self.n_drops;
            let s = score(self, &cand);
            if better(s, best_score) {
                best = cand;
                best_score = s;
            }
        } else {
            (best, best_score) = self.coordinate(start, classes, sets, score);
        }
        for &sel in classes {
            (best, best_score) = self.fine(best, best_score, sel, score);
        }
        (best, best_score)
    }

    fn coordinate(
        &mut self,
        start: PowerControlConfigs,
        classes: &[ClassSel],
        sets: &[usize],
        score: &mut dyn FnMut(&mut Self, &PowerControlConfigs) -> Score,
    ) -> (PowerControlConfigs, Score) {
        let mut best = start;
        let mut best_score = score(self, &start);
        for _ in 0..self.space.max_rounds {
            let before = best;
            for &sel in classes {
                let (next, s) = self.search_class(best, best_score, sel, sets, score);
                best = next;
                best_score = s;
            }
            if best == before {
                break;
            }
        }
        (best, best_score)
    }

    fn search_class(
        &mut self,
        start: PowerControlConfigs,
        start_score: Score,
        sel: ClassSel,
        sets: &[usize],
        score: &mut dyn FnMut(&mut Self, &PowerControlConfigs) -> Score,
    ) -> (PowerControlConfigs, Score) {
        let mut best = start;
        let mut best_score = start_score;
        let alphas = self.space.alphas.clone();
        let pmaxes = self.space.p_max_dbm.clone();
        for &pmax in &pmaxes {
            for &alpha in &alphas {
                let min_term = sets
                    .iter()
                    .filter_map(|&s| self.set(s).min_control_term(sel, alpha, self.active_drops))
                    .min_by(f64::total_cmp);
                for p0 in self.p0_grid(pmax, min_term) {
                    let Ok(pc) = PowerControlConfig::new(p0, alpha, pmax) else {
                        continue;
                    };
                    let cand = sel.set(&best, pc);
                    let s = score(self, &cand);
                    if better(s, best_score) {
                        best = cand;
                        best_score = s;
                    }
                }
            }
        }
        self.fine(best, best_score, sel, score)
    }

    /// ±`fine_radius_db` around the current P0 of `sel` at 1 dB steps.
    fn fine(
        &mut self,
        start: PowerControlConfigs,
        start_score: Score,
        sel: ClassSel,
        score: &mut dyn FnMut(&mut Self, &PowerControlConfigs) -> Score,
    ) -> (PowerControlConfigs, Score) {
        let mut best = start;
        let mut best_score = start_score;
        let centre = sel.get(&best);
        for d in -self.space.fine_radius_db..=self.space.fine_radius_db {
            let p0 = centre.p0_dbm + d as f64;
            if d == 0 || p0 < self.space.p0_min_dbm as f64 || p0 > self.space.p0_max_dbm as f64 {
                continue;
            }
            let Ok(pc) = PowerControlConfig::new(p0, centre.alpha, centre.p_max_dbm) else {
                continue;
            };
            let cand = sel.set(&best, pc);
            let s = score(self, &cand);
            if better(s, best_score) {
                best = cand;
                best_score = s;
            }
        }
        (best, best_score)
    }

    /// Set index `usize::MAX` is the eNB-only baseline.
    fn set(&self, idx: usize) -> &ContextSet {
        if idx == usize::MAX {
            &self.baseline
        } else {
            &self.relay[idx]
        }
    }

    fn levels(&mut self, idx: usize, pcs: &PowerControlConfigs) -> Levels {
        let par = self.par;
        let n = self.active_drops;
        let evaluations = &mut self.evaluations;
        let set = if idx == usize::MAX {
            &mut self.baseline
        } else {
            &mut self.relay[idx]
        };
        set.levels(pcs, n, par, evaluations)
    }

    /// 50%-ile floor at bias index `b` for the current drop set.
    fn floor(&mut self, b: usize, c_i: &PowerControlConfigs) -> f64 {
        match self.constraint {
            ConstraintBaseline::StrategyI => self.levels(b, c_i).p50,
            ConstraintBaseline::EnbOnly => self.levels(usize::MAX, c_i).p50,
        }
    }

    /// Runs all three strategies at every bias.
    pub fn run(&mut self, anchor: PowerControlConfig) -> PcReport {
        // Strategy I: shared triple on the eNB-only deployment.
        let (c_i, _) = self.search(
            PowerControlConfigs::shared(anchor),
            &[ClassSel::Shared],
            &[usize::MAX],
            &mut |o, c| {
                let l = o.levels(usize::MAX, c);
                Some((l.p5, l.p50))
            },
        );
        let reference = self.levels(usize::MAX, &c_i);
        let n_b = self.biases.len();
        let i_levels: Vec<Levels> = (0..n_b).map(|b| self.levels(b, &c_i)).collect();

        // Strategy II: one per-class pair for all biases.
        let all: Vec<usize> = (0..n_b).collect();
        let (c_ii, s_ii) = self.search(
            c_i,
            &[ClassSel::Macro, ClassSel::Relay],
            &all,
            &mut |o, c| {
                let mut worst = f64::INFINITY;
                let mut p50_sum = 0.0;
                for b in 0..n_b {
                    let l = o.levels(b, c);
                    if l.p50 < o.floor(b, &c_i) {
                        return None;
                    }
                    worst = worst.min(l.p5 - o.levels(b, &c_i).p5);
                    p50_sum += l.p50;
                }
                Some((worst, p50_sum))
            },
        );

        let mut points = Vec::with_capacity(3 * n_b);
        let biases = self.biases.clone();
        let point = |kind, b: usize, configs, l: Levels, infeasible| PcPoint {
            strategy: kind,
            bias_db: biases[b],
            configs,
            p5_bps: l.p5,
            p50_bps: l.p50,
            gain_5pct_percent: gain_from_levels(reference.p5, l.p5).ok(),
            gain_50pct_percent: gain_from_levels(reference.p50, l.p50).ok(),
            infeasible,
        };
        let mut iii = Vec::with_capacity(n_b);
        let ii_ok = s_ii.is_some();
        let c_ii = if ii_ok { c_ii } else { c_i };
        for b in 0..n_b {
            let mut feasible_score = |o: &mut Self, c: &PowerControlConfigs| {
                let l = o.levels(b, c);
                (l.p50 >= o.floor(b, &c_i)).then_some((l.p5, l.p50))
            };
            let s_i = feasible_score(self, &c_i);
            let s_2 = feasible_score(self, &c_ii);
            let start = if better(s_i, s_2) { c_i } else { c_ii };
            let (c, s) = self.search(
                start,
                &[ClassSel::Macro, ClassSel::Relay],
                &[b],
                &mut feasible_score,
            );
            iii.push((c, s.is_some()));
        }
        for (b, &l) in i_levels.iter().enumerate() {
            points.push(point(PcStrategyKind::EnbOnlySetting, b, c_i, l, false));
        }
        for b in 0..n_b {
            let l = self.levels(b, &c_ii);
            points.push(point(PcStrategyKind::RelayOptimized, b, c_ii, l, !ii_ok));
        }
        for (b, &(c, ok)) in iii.iter().enumerate() {
            let (c, ok) = if ok { (c, true) } else { (c_i, false) };
            let l = self.levels(b, &c);
            points.push(point(PcStrategyKind::PerBiasOptimized, b, c, l, !ok));
        }
        PcReport {
            strategy_i: c_i.macro_served,
            reference_p5_bps: reference.p5,
            reference_p50_bps: reference.p50,
            points,
            evaluations: self.evaluations,
        }
    }
}

/// Optimizes all three strategies for `cfg` at the given biases. The
/// configured macro-served triple seeds the strategy-I search.
pub fn optimize_pc(
    cfg: &SimConfig,
    strategy: &PcStrategy,
    bias_points: &[f64],
    par: Parallelism,
) -> Result<PcReport> {
    let mut opt = PcOptimizer::new(cfg, strategy, bias_points, par)?;
    Ok(opt.run(cfg.power_control.macro_served))
}
