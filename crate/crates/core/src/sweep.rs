//! Scenario runs and bias × power-reduction sweeps.
//!
//! Every drop is realized once and then evaluated at all requested
//! operating points, so grid points and the eNB-only reference share
//! terminals and shadowing draws (common random numbers). Drops run in
//! parallel; per-drop samples are concatenated in drop order.

use serde::{Deserialize, Serialize};

use crate::association::{associate, OperatingPoint};
use crate::config::SimConfig;
use crate::dl::dl_drop_throughputs;
use crate::drop::DropState;
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::metrics::{gain, ThroughputDistribution};
use crate::scenario::build_layout;
use crate::ul::{PowerControlConfigs, UlContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Dl,
    Ul,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Dl => "dl",
            Direction::Ul => "ul",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dl" => Ok(Direction::Dl),
            "ul" => Ok(Direction::Ul),
            other => Err(format!("unknown direction `{other}` (expected dl or ul)")),
        }
    }
}

/// Which link directions to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Directions {
    pub dl: bool,
    pub ul: bool,
}

impl Directions {
    pub const BOTH: Directions = Directions { dl: true, ul: true };

    pub fn only(d: Direction) -> Self {
        Directions {
            dl: d == Direction::Dl,
            ul: d == Direction::Ul,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub label: String,
    pub op: OperatingPoint,
    pub dl: ThroughputDistribution,
    pub ul: ThroughputDistribution,
    /// Fraction of dropped terminals served by relays.
    pub coverage_fraction: f64,
    pub dl_outage_rate: f64,
    pub ul_outage_rate: f64,
}

impl ScenarioResult {
    pub fn distribution(&self, d: Direction) -> &ThroughputDistribution {
        match d {
            Direction::Dl => &self.dl,
            Direction::Ul => &self.ul,
        }
    }
}

#[derive(Debug, Default, Clone)]
struct OpSamples {
    dl: Vec<f64>,
    ul: Vec<f64>,
    relay_served: usize,
    dl_outage: usize,
    ul_outage: usize,
    terminals: usize,
}

/// Short run descriptor such as `urban_rn4_x16_y2`.
pub fn run_label(cfg: &SimConfig, op: OperatingPoint) -> String {
    if cfg.scenario.rns_per_sector == 0 {
        return format!("{}_enb_only", cfg.scenario.scenario.as_str());
    }
    format!(
        "{}_rn{}_x{}_y{}",
        cfg.scenario.scenario.as_str(),
        cfg.scenario.rns_per_sector,
        op.x_reduction_db,
        op.y_bias_db
    )
}

/// Simulates `cfg` at every operating point over the same drops.
pub fn evaluate_operating_points(
    cfg: &SimConfig,
    ops: &[OperatingPoint],
    pcs: &PowerControlConfigs,
    dirs: Directions,
    par: Parallelism,
) -> Result<Vec<ScenarioResult>> {
    cfg.validate()?;
    let layout = build_layout(&cfg.scenario, &cfg.radio)?;
    let n_macro = layout.n_macro();
    let per_drop: Vec<Result<Vec<OpSamples>>> = par.map_indexed(cfg.scenario.n_drops, |d| {
        let drop = DropState::realize(cfg, &layout, d)?;
        Ok(ops
            .iter()
            .map(|&op| {
                let assoc = associate(&drop, op);
                let mut s = OpSamples {
                    relay_served: assoc
                        .serving_nodes()
                        .iter()
                        .filter(|&&n| n >= n_macro)
                        .count(),
                    terminals: drop.n_terminals(),
                    ..OpSamples::default()
                };
                if dirs.dl {
                    let r = dl_drop_throughputs(&drop, &assoc, op, &cfg.radio, &cfg.dl_mapping);
                    s.dl_outage = r.outage_count();
                    s.dl = r.throughputs().collect();
                }
                if dirs.ul {
                    let r =
                        UlContext::new(&drop, &assoc, &cfg.radio, &cfg.ul_mapping).evaluate(pcs);
                    s.ul_outage = r
                        .terminals
                        .iter()
                        .filter(|t| cfg.ul_mapping.in_outage(t.sinr_db))
                        .count();
                    s.ul = r.throughputs().collect();
                }
                s
            })
            .collect())
    });
    let per_drop = per_drop.into_iter().collect::<Result<Vec<_>>>()?;

    Ok(ops
        .iter()
        .enumerate()
        .map(|(i, &op)| {
            let mut acc = OpSamples::default();
            for drop in &per_drop {
                let s = &drop[i];
                acc.dl.extend_from_slice(&s.dl);
                acc.ul.extend_from_slice(&s.ul);
                acc.relay_served += s.relay_served;
                acc.dl_outage += s.dl_outage;
                acc.ul_outage += s.ul_outage;
                acc.terminals += s.terminals;
            }
            let n = acc.terminals.max(1) as f64;
            let label = run_label(cfg, op);
            ScenarioResult {
                op,
                dl: ThroughputDistribution::new(label.clone(), acc.dl),
                ul: ThroughputDistribution::new(label.clone(), acc.ul),
                coverage_fraction: acc.relay_served as f64 / n,
                dl_outage_rate: acc.dl_outage as f64 / n,
                ul_outage_rate: acc.ul_outage as f64 / n,
                label,
            }
        })
        .collect())
}

/// Runs the scenario at its configured operating point.
pub fn run_scenario(cfg: &SimConfig, par: Parallelism) -> Result<ScenarioResult> {
    let op = OperatingPoint::new(cfg.scenario.power_reduction_db, cfg.scenario.bias_db)?;
    let mut r = evaluate_operating_points(cfg, &[op], &cfg.power_control, Directions::BOTH, par)?;
    Ok(r.remove(0))
}

/// The eNB-only reference for `cfg` (same seed and drops, no relays).
pub fn run_baseline(cfg: &SimConfig, dirs: Directions, par: Parallelism) -> Result<ScenarioResult> {
    let base = cfg.baseline();
    let mut r = evaluate_operating_points(
        &base,
        &[OperatingPoint::NONE],
        &base.power_control,
        dirs,
        par,
    )?;
    Ok(r.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    pub x_reduction_db: f64,
    pub y_bias_db: f64,
    /// `None` when the reference percentile is zero.
    pub gain_5pct_percent: Option<f64>,
    pub gain_50pct_percent: Option<f64>,
    pub coverage_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainSurface {
    pub direction: Direction,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    /// Y-major: all X values for the first Y, then the next Y, ...
    pub cells: Vec<SurfaceCell>,
    pub reference: ScenarioResult,
    pub runs: Vec<ScenarioResult>,
}

impl GainSurface {
    pub fn cell(&self, x: f64, y: f64) -> Option<&SurfaceCell> {
        self.cells
            .iter()
            .find(|c| c.x_reduction_db == x && c.y_bias_db == y)
    }

    /// Cell with the highest defined 5%-ile gain (first on ties).
    pub fn best(&self) -> Option<&SurfaceCell> {
        self.cells
            .iter()
            .filter(|c| c.gain_5pct_percent.is_some())
            .fold(None, |best: Option<&SurfaceCell>, c| match best {
                Some(b) if b.gain_5pct_percent >= c.gain_5pct_percent => Some(b),
                _ => Some(c),
            })
    }
}

fn optional_gain(
    reference: &ThroughputDistribution,
    candidate: &ThroughputDistribution,
    q: f64,
) -> Result<Option<f64>> {
    match gain(reference, candidate, q) {
        Ok(g) => Ok(Some(g)),
        Err(Error::UndefinedGain) => Ok(None),
        Err(e) => Err(e),
    }
}

/// 5%- and 50%-ile gains against the eNB-only reference over the grid
/// `x_values × y_values`.
pub fn sweep_grid(
    cfg: &SimConfig,
    x_values: &[f64],
    y_values: &[f64],
    direction: Direction,
    par: Parallelism,
) -> Result<GainSurface> {
    let mut ops = Vec::with_capacity(x_values.len() * y_values.len());
    for &y in y_values {
        for &x in x_values {
            ops.push(OperatingPoint::new(x, y)?);
        }
    }
    let dirs = Directions::only(direction);
    let reference = run_baseline(cfg, dirs, par)?;
    let runs = if ops.is_empty() {
        Vec::new()
    } else {
        evaluate_operating_points(cfg, &ops, &cfg.power_control, dirs, par)?
    };
    let refd = reference.distribution(direction);
    let cells = runs
        .iter()
        .map(|r| {
            let cand = r.distribution(direction);
            Ok(SurfaceCell {
                x_reduction_db: r.op.x_reduction_db,
                y_bias_db: r.op.y_bias_db,
                gain_5pct_percent: optional_gain(refd, cand, 0.05)?,
                gain_50pct_percent: optional_gain(refd, cand, 0.5)?,
                coverage_fraction: r.coverage_fraction,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GainSurface {
        direction,
        x_values: x_values.to_vec(),
        y_values: y_values.to_vec(),
        cells,
        reference,
        runs,
    })
}

/// Effective uplink bias implied by a downlink operating point: the
/// association is shared by both directions.
pub fn dl_limited_effective_bias(dl_optimum: OperatingPoint) -> f64 {
    dl_optimum.effective_bias_db()
}
