//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Criteria 1-6 are exact properties; 7-11 are banded
//! quantitative targets at 200 drops with default constants.

// The oracles are deliberately written as plain index loops.
#![allow(clippy::needless_range_loop, clippy::manual_checked_ops)]

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relaysim::association::{associate, coverage_fractions};
use relaysim::dl::dl_drop_throughputs;
use relaysim::io::{cdf_csv, coverage_csv, pc_csv, surface_csv};
use relaysim::pc::{optimize_pc, PcSearchSpace, PcStrategy, PcStrategyKind};
use relaysim::propagation::PropagationTable;
use relaysim::scenario::build_layout;
use relaysim::sweep::{
    evaluate_operating_points, run_baseline, run_scenario, sweep_grid, Direction, Directions,
};
use relaysim::ul::{allocate_prbs, ue_tx_power, ul_drop_throughputs};
use relaysim::{
    DropState, NetworkLayout, Node, NodeKind, OperatingPoint, Parallelism, Point,
    PowerControlConfig, PowerControlConfigs, ScenarioKind, SimConfig, UserTerminal,
};

const REL_TOL: f64 = 1e-12;
const HEADLINE_DROPS: usize = 200;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= REL_TOL * a.abs().max(b.abs())
}

fn percent_gain(reference: f64, candidate: f64) -> f64 {
    100.0 * (candidate - reference) / reference
}

fn cfg(kind: ScenarioKind, rns: usize, drops: usize) -> SimConfig {
    let mut c = SimConfig::new(kind, rns);
    c.scenario.n_drops = drops;
    c
}

fn effective_bias_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut mismatches = 0;
    for _ in 0..20 {
        let kind = if rng.random_bool(0.5) {
            ScenarioKind::Urban
        } else {
            ScenarioKind::Suburban
        };
        let rns = if rng.random_bool(0.5) { 4 } else { 10 };
        let mut c = cfg(kind, rns, 1);
        c.scenario.seed = rng.random_range(0..1u64 << 62);
        let x = rng.random_range(0..=32) as f64 * 0.5;
        let y = rng.random_range(0..=40) as f64 * 0.5;
        let layout = build_layout(&c.scenario, &c.radio).unwrap();
        let drop = DropState::realize(&c, &layout, 0).unwrap();
        let split = OperatingPoint::new(x, y).unwrap();
        let merged = OperatingPoint::bias_only(x + y).unwrap();
        let (a, b) = (associate(&drop, split), associate(&drop, merged));
        let ua = ul_drop_throughputs(&drop, &a, &c.power_control, &c.radio, &c.ul_mapping);
        let ub = ul_drop_throughputs(&drop, &b, &c.power_control, &c.radio, &c.ul_mapping);
        if a != b || ua != ub {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 60.0,
        format!("20 configs, {mismatches} mismatches, {secs:.1} s (exact equality, < 60 s)"),
    )
}

fn power_control_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    let alphas = [0.0, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    for _ in 0..10_000 {
        let p0 = rng.random_range(-126..=23) as f64;
        let alpha = alphas[rng.random_range(0..alphas.len())];
        let pmax = rng.random_range(0..=23) as f64;
        let pc = PowerControlConfig::new(p0, alpha, pmax).unwrap();
        let m = rng.random_range(1..=5usize);
        let l = rng.random_range(60.0..180.0);
        let p = ue_tx_power(&pc, m, l).unwrap();
        // clamp at p_max
        let open_loop = p0 + 10.0 * (m as f64).log10() + alpha * l;
        if p > pmax
            || (open_loop >= pmax && p != pmax)
            || (open_loop < pmax && !rel_close(p, open_loop))
        {
            failures += 1;
        }
        // alpha = 0 ignores the path loss
        let flat = PowerControlConfig::new(p0, 0.0, pmax).unwrap();
        if ue_tx_power(&flat, m, l).unwrap() != ue_tx_power(&flat, m, l + 37.0).unwrap() {
            failures += 1;
        }
        // M and 10·M differ by exactly 10 dB below the clamp
        let low = PowerControlConfig::new(-126.0, 0.4, 23.0).unwrap();
        let d = ue_tx_power(&low, 10 * m, l).unwrap() - ue_tx_power(&low, m, l).unwrap();
        if (d - 10.0).abs() > REL_TOL * 130.0 {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("10000 random cases, {failures} failures (tol 1e-12 rel)"),
    )
}

fn round_robin_fairness() -> Outcome {
    let mut violations = 0;
    let mut cells = 0;
    for n in 1..=120 {
        let a = allocate_prbs(n, 50);
        let (mx, mn) = (a.iter().max().unwrap(), a.iter().min().unwrap());
        if mx - mn > 1 || a.iter().sum::<usize>() > 50 {
            violations += 1;
        }
    }
    for (kind, rns, op) in [
        (
            ScenarioKind::Urban,
            4,
            OperatingPoint::new(16.0, 10.0).unwrap(),
        ),
        (ScenarioKind::Urban, 10, OperatingPoint::NONE),
        (
            ScenarioKind::Suburban,
            4,
            OperatingPoint::bias_only(6.0).unwrap(),
        ),
    ] {
        let c = cfg(kind, rns, 3);
        let layout = build_layout(&c.scenario, &c.radio).unwrap();
        for d in 0..3 {
            let drop = DropState::realize(&c, &layout, d).unwrap();
            let assoc = associate(&drop, op);
            let ul = ul_drop_throughputs(&drop, &assoc, &c.power_control, &c.radio, &c.ul_mapping);
            for members in assoc.members().iter().filter(|m| !m.is_empty()) {
                cells += 1;
                let prbs: Vec<usize> = members.iter().map(|&t| ul.terminals[t].m_prbs).collect();
                let (mx, mn) = (prbs.iter().max().unwrap(), prbs.iter().min().unwrap());
                if mx - mn > 1 || prbs.iter().sum::<usize>() > 50 {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("{cells} realized cells + 120 cell sizes, {violations} violations"),
    )
}

fn monotone_dl_sinr_in_reduction() -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    for (kind, seed) in [(ScenarioKind::Urban, 11), (ScenarioKind::Suburban, 12)] {
        let mut c = cfg(kind, 4, 1);
        c.scenario.seed = seed;
        let layout = build_layout(&c.scenario, &c.radio).unwrap();
        let n_macro = layout.n_macro();
        let drop = DropState::realize(&c, &layout, 0).unwrap();
        let assoc = associate(&drop, OperatingPoint::bias_only(4.0).unwrap());
        let sinrs: Vec<Vec<f64>> = (0..=16)
            .map(|x| {
                let op = OperatingPoint::new(x as f64, 4.0).unwrap();
                dl_drop_throughputs(&drop, &assoc, op, &c.radio, &c.dl_mapping)
                    .terminals
                    .iter()
                    .map(|t| 10f64.powf(t.sinr_db / 10.0))
                    .collect()
            })
            .collect();
        for t in 0..drop.n_terminals() {
            checked += 1;
            let macro_served = assoc.serving(t) < n_macro;
            for w in sinrs.windows(2) {
                let (a, b) = (w[0][t], w[1][t]);
                let ok = if macro_served {
                    b <= a * (1.0 + REL_TOL)
                } else {
                    b >= a * (1.0 - REL_TOL)
                };
                if !ok {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        checked >= 1000 && violations == 0,
        format!("{checked} terminals x 17 reductions, {violations} violations (tol 1e-12 rel)"),
    )
}

/// Two tri-sector sites, one relay, five terminals.
fn oracle_network() -> (NetworkLayout, Vec<UserTerminal>) {
    let mut nodes = Vec::new();
    let sites = [Point::new(0.0, 0.0), Point::new(500.0, 0.0)];
    for (s, &site) in sites.iter().enumerate() {
        for (k, bore) in [30.0, 150.0, 270.0].into_iter().enumerate() {
            nodes.push(Node {
                id: nodes.len(),
                kind: NodeKind::MacroSector,
                position: site,
                boresight_deg: Some(bore),
                tx_power_dbm: 46.0,
                antenna_gain_dbi: 14.0,
                noise_figure_db: 5.0,
                sector: 3 * s + k,
            });
        }
    }
    nodes.push(Node {
        id: 6,
        kind: NodeKind::RelayNode,
        position: Point::new(180.0, 120.0),
        boresight_deg: None,
        tx_power_dbm: 30.0,
        antenna_gain_dbi: 5.0,
        noise_figure_db: 5.0,
        sector: 0,
    });
    let layout =
        NetworkLayout::from_parts(nodes, sites.to_vec(), vec![Point::default()], vec![], 500.0)
            .unwrap();
    let positions = [
        (150.0, 110.0),
        (120.0, 60.0),
        (-80.0, 140.0),
        (420.0, -90.0),
        (260.0, 40.0),
    ];
    let terminals = positions
        .iter()
        .enumerate()
        .map(|(id, &(x, y))| UserTerminal {
            id,
            position: Point::new(x, y),
            sector_of_drop: 0,
            penetration_loss_db: 20.0,
        })
        .collect();
    (layout, terminals)
}

/// Direct evaluation of the composite link gain from positions.
fn oracle_gain(node: &Node, ue: &UserTerminal, los: bool, shadow: f64) -> f64 {
    let dx = ue.position.x - node.position.x;
    let dy = ue.position.y - node.position.y;
    let r_km = dx.hypot(dy).max(10.0) / 1000.0;
    let lg = r_km.log10();
    let (los_pl, nlos_pl) = match node.kind {
        NodeKind::MacroSector => (103.4 + 24.2 * lg, 131.1 + 42.8 * lg),
        NodeKind::RelayNode => (103.8 + 20.9 * lg, 145.4 + 37.5 * lg),
    };
    let pl = if los { los_pl } else { nlos_pl.max(los_pl) };
    let antenna = match node.boresight_deg {
        Some(b) => {
            let mut theta = dy.atan2(dx).to_degrees() - b;
            while theta > 180.0 {
                theta -= 360.0;
            }
            while theta <= -180.0 {
                theta += 360.0;
            }
            14.0 - (12.0 * (theta / 65.0).powi(2)).min(20.0)
        }
        None => 5.0,
    };
    -pl + antenna - 20.0 - if los { 0.0 } else { shadow }
}

fn oracle_se(sinr_lin: f64) -> f64 {
    if 10.0 * sinr_lin.log10() < -7.0 {
        0.0
    } else {
        (0.56 * (1.0 + sinr_lin / 1.25).log2()).min(5.4)
    }
}

fn brute_force_oracle() -> Outcome {
    let (layout, terminals) = oracle_network();
    let n_t = terminals.len();
    let n_nodes = layout.nodes.len();
    let table = PropagationTable::default();
    let mut c = cfg(ScenarioKind::Urban, 0, 1);
    c.power_control = PowerControlConfigs {
        macro_served: PowerControlConfig::new(-95.0, 1.0, 23.0).unwrap(),
        relay_served: PowerControlConfig::new(-80.0, 0.8, 15.0).unwrap(),
    };
    let mut mismatches = Vec::new();
    let mut checks = 0;
    let mut relay_served = 0;
    for seed in 0..40u64 {
        let drop = DropState::with_terminals(
            &layout,
            terminals.clone(),
            ScenarioKind::Urban,
            &table,
            seed,
            0,
        );
        let mut g = vec![vec![0.0; n_t]; n_nodes];
        for (n, node) in layout.nodes.iter().enumerate() {
            for (t, ue) in terminals.iter().enumerate() {
                let link = drop.link(n, t);
                g[n][t] = oracle_gain(node, ue, link.los, link.shadowing_db);
                checks += 1;
                if !rel_close(g[n][t], drop.gain_db(n, t)) {
                    mismatches.push(format!("gain n{n} t{t}"));
                }
            }
        }
        let (x, y) = (6.0, 3.0);
        let op = OperatingPoint::new(x, y).unwrap();
        let tx: Vec<f64> = layout
            .nodes
            .iter()
            .map(|n| {
                if n.kind == NodeKind::MacroSector {
                    46.0 - x
                } else {
                    30.0
                }
            })
            .collect();
        let serving: Vec<usize> = (0..n_t)
            .map(|t| {
                let mut best = 0;
                let mut best_score = f64::NEG_INFINITY;
                for n in 0..n_nodes {
                    let bias = if n == 6 { y } else { 0.0 };
                    let score = tx[n] + g[n][t] + bias;
                    if score > best_score {
                        best = n;
                        best_score = score;
                    }
                }
                best
            })
            .collect();
        let assoc = associate(&drop, op);
        relay_served += serving.iter().filter(|&&s| s == 6).count();
        checks += 1;
        if assoc.serving_nodes() != serving.as_slice() {
            mismatches.push(format!("association seed {seed}"));
            continue;
        }
        let cell_size = |n: usize| serving.iter().filter(|&&s| s == n).count();

        // downlink: direct summation over every other node
        let noise_dl = 10f64.powf((-174.0 + 70.0 + 9.0) / 10.0);
        let dl = dl_drop_throughputs(&drop, &assoc, op, &c.radio, &c.dl_mapping);
        for t in 0..n_t {
            let s = serving[t];
            let signal = 10f64.powf((tx[s] + g[s][t]) / 10.0);
            let interference: f64 = (0..n_nodes)
                .filter(|&n| n != s)
                .map(|n| 10f64.powf((tx[n] + g[n][t]) / 10.0))
                .sum();
            let sinr = signal / (interference + noise_dl);
            let thr = 10e6 * oracle_se(sinr) / cell_size(s) as f64;
            checks += 2;
            if !rel_close(sinr, 10f64.powf(dl.terminals[t].sinr_db / 10.0)) {
                mismatches.push(format!("dl sinr seed {seed} t{t}"));
            }
            if !rel_close(thr, dl.terminals[t].throughput_bps) {
                mismatches.push(format!("dl thr seed {seed} t{t}"));
            }
        }

        // uplink: contiguous round-robin blocks, per-PRB co-channel sums
        let mut prb_owner = vec![vec![None; 50]; n_nodes];
        let mut block = vec![(0usize, 0usize); n_t];
        for n in 0..n_nodes {
            let members: Vec<usize> = (0..n_t).filter(|&t| serving[t] == n).collect();
            let k = members.len();
            let mut next = 0;
            for (j, &t) in members.iter().enumerate() {
                let m = if k == 0 {
                    0
                } else {
                    50 / k + usize::from(j < 50 % k)
                };
                block[t] = (next, m);
                for owner in &mut prb_owner[n][next..next + m] {
                    *owner = Some(t);
                }
                next += m;
            }
        }
        let psd: Vec<f64> = (0..n_t)
            .map(|t| {
                let pc = if serving[t] < 6 {
                    c.power_control.macro_served
                } else {
                    c.power_control.relay_served
                };
                let m = block[t].1 as f64;
                let p = pc
                    .p_max_dbm
                    .min(pc.p0_dbm + 10.0 * m.log10() + pc.alpha * -g[serving[t]][t]);
                p - 10.0 * m.log10()
            })
            .collect();
        let noise_ul = 10f64.powf((-174.0 + 10.0 * 180e3f64.log10() + 5.0) / 10.0);
        let ul = ul_drop_throughputs(&drop, &assoc, &c.power_control, &c.radio, &c.ul_mapping);
        for t in 0..n_t {
            let s = serving[t];
            let (first, m) = block[t];
            let signal = 10f64.powf((psd[t] + g[s][t]) / 10.0);
            let mut sum = 0.0;
            for k in first..first + m {
                let interference: f64 = (0..n_nodes)
                    .filter(|&n| n != s)
                    .filter_map(|n| prb_owner[n][k])
                    .map(|u| 10f64.powf((psd[u] + g[s][u]) / 10.0))
                    .sum();
                sum += signal / (noise_ul + interference);
            }
            let sinr = sum / m as f64;
            let thr = m as f64 * 180e3 * oracle_se(sinr);
            checks += 3;
            if ul.terminals[t].m_prbs != m {
                mismatches.push(format!("ul prbs seed {seed} t{t}"));
            }
            if !rel_close(sinr, 10f64.powf(ul.terminals[t].sinr_db / 10.0)) {
                mismatches.push(format!("ul sinr seed {seed} t{t}"));
            }
            if !rel_close(thr, ul.terminals[t].throughput_bps) {
                mismatches.push(format!("ul thr seed {seed} t{t}"));
            }
        }
    }
    let first = mismatches
        .first()
        .map(|m| format!(" (first: {m})"))
        .unwrap_or_default();
    outcome(
        mismatches.is_empty() && relay_served > 0,
        format!(
            "40 realizations, {relay_served} relay-served terminals, {checks} checks, {} mismatches{first} (tol 1e-12 rel)",
            mismatches.len()
        ),
    )
}

/// Every CSV the tool emits, for a small configuration.
fn csv_bundle() -> String {
    let par = Parallelism::default();
    let c = cfg(ScenarioKind::Urban, 4, 4);
    let run = run_scenario(&c, par).unwrap();
    let base = run_baseline(&c, Directions::BOTH, par).unwrap();
    let mut out = cdf_csv(&[&base.dl, &run.dl]).unwrap();
    out += &cdf_csv(&[&base.ul, &run.ul]).unwrap();
    for d in [Direction::Dl, Direction::Ul] {
        out +=
            &surface_csv(&sweep_grid(&c, &[0.0, 16.0], &[0.0, 2.0, 4.0], d, par).unwrap()).unwrap();
    }
    let strategy = PcStrategy {
        search_space: PcSearchSpace {
            coarse_step_db: 16,
            fine_radius_db: 1,
            alphas: vec![0.8, 1.0],
            max_rounds: 1,
            screening_drops: 2,
            ..PcSearchSpace::default()
        },
        ..PcStrategy::default()
    };
    out += &pc_csv(
        &optimize_pc(&cfg(ScenarioKind::Urban, 4, 3), &strategy, &[0.0, 9.0], par).unwrap(),
    )
    .unwrap();
    let layout = build_layout(&c.scenario, &c.radio).unwrap();
    let ops: Vec<_> = (0..5)
        .map(|y| OperatingPoint::bias_only(3.0 * y as f64).unwrap())
        .collect();
    let fr = coverage_fractions(&c, &layout, &ops, 2000, 8, par);
    out += &coverage_csv(&ops.iter().copied().zip(fr).collect::<Vec<_>>()).unwrap();
    out
}

fn thread_count_determinism() -> Outcome {
    let bundles: Vec<String> = [1, 4, 8]
        .iter()
        .map(|&n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(csv_bundle)
        })
        .collect();
    let same = bundles.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "{} CSV bytes, identical across 1/4/8 threads: {same}",
            bundles[0].len()
        ),
    )
}

fn urban_no_bias_gain(results: &UrbanDl) -> Outcome {
    let cov = results.no_bias_coverage;
    let g = results.gain_no_bias;
    let pass = (cov - 0.29).abs() <= 0.10 && g > 0.0 && (g - 71.0).abs() <= 35.0;
    outcome(
        pass,
        format!("coverage {cov:.3} (0.29 +/- 0.10), 5%-ile DL gain {g:.1}% (71 +/- 35, > 0)"),
    )
}

fn urban_reduction_trend(results: &UrbanDl) -> Outcome {
    outcome(
        results.gain_16_2 > results.gain_no_bias,
        format!(
            "5%-ile DL gain at (16, 2) {:.1}% vs (0, 0) {:.1}%",
            results.gain_16_2, results.gain_no_bias
        ),
    )
}

struct UrbanDl {
    no_bias_coverage: f64,
    gain_no_bias: f64,
    gain_16_2: f64,
}

fn urban_dl() -> UrbanDl {
    let c = cfg(ScenarioKind::Urban, 4, HEADLINE_DROPS);
    let par = Parallelism::default();
    let ops = [
        OperatingPoint::NONE,
        OperatingPoint::new(16.0, 2.0).unwrap(),
    ];
    let runs = evaluate_operating_points(
        &c,
        &ops,
        &c.power_control,
        Directions::only(Direction::Dl),
        par,
    )
    .unwrap();
    let base = run_baseline(&c, Directions::only(Direction::Dl), par).unwrap();
    let r5 = base.dl.percentile(0.05).unwrap();
    UrbanDl {
        no_bias_coverage: runs[0].coverage_fraction,
        gain_no_bias: percent_gain(r5, runs[0].dl.percentile(0.05).unwrap()),
        gain_16_2: percent_gain(r5, runs[1].dl.percentile(0.05).unwrap()),
    }
}

fn suburban_trend() -> Outcome {
    let c = cfg(ScenarioKind::Suburban, 4, HEADLINE_DROPS);
    let ys: Vec<f64> = (0..=10).map(f64::from).collect();
    let s = sweep_grid(
        &c,
        &[0.0, 4.0, 8.0],
        &ys,
        Direction::Dl,
        Parallelism::default(),
    )
    .unwrap();
    let g00 = s.cell(0.0, 0.0).unwrap().gain_5pct_percent.unwrap();
    let g80 = s.cell(8.0, 0.0).unwrap().gain_5pct_percent.unwrap();
    let best = s.best().unwrap();
    let reduction_hurts = g80 < g00;
    let small_bias = (1.0..=7.0).contains(&best.y_bias_db);
    outcome(
        reduction_hurts && small_bias,
        format!(
            "gain (8, 0) {g80:.1}% < (0, 0) {g00:.1}%: {reduction_hurts}; optimum at (X {}, Y {}) gain {:.1}%, Y in [1, 7]: {small_bias}",
            best.x_reduction_db,
            best.y_bias_db,
            best.gain_5pct_percent.unwrap()
        ),
    )
}

fn ul_strategy_ordering() -> Outcome {
    let c = cfg(ScenarioKind::Urban, 4, HEADLINE_DROPS);
    let biases = [0.0, 6.0, 12.0, 18.0];
    let report = optimize_pc(&c, &PcStrategy::default(), &biases, Parallelism::default()).unwrap();
    let p5 = |k, b| report.point(k, b).unwrap().p5_bps;
    let ordered = biases.iter().all(|&b| {
        p5(PcStrategyKind::PerBiasOptimized, b) >= p5(PcStrategyKind::RelayOptimized, b)
            && p5(PcStrategyKind::RelayOptimized, b) >= p5(PcStrategyKind::EnbOnlySetting, b)
    });
    let feasible = report.points.iter().all(|p| {
        p.p50_bps
            >= report
                .point(PcStrategyKind::EnbOnlySetting, p.bias_db)
                .unwrap()
                .p50_bps
    });
    let peak = biases
        .iter()
        .filter(|&&b| b <= 12.0)
        .map(|&b| p5(PcStrategyKind::EnbOnlySetting, b))
        .fold(f64::NEG_INFINITY, f64::max);
    let ratio = p5(PcStrategyKind::EnbOnlySetting, 18.0) / peak;
    let degrades = ratio < 0.75;
    let levels: Vec<String> = PcStrategyKind::ALL
        .iter()
        .map(|&k| {
            let v: Vec<String> = biases
                .iter()
                .map(|&b| format!("{:.0}", p5(k, b) / 1e3))
                .collect();
            format!("{} [{}]", k.as_str(), v.join(" "))
        })
        .collect();
    outcome(
        ordered && feasible && degrades,
        format!(
            "III >= II >= I: {ordered}; 50%-ile feasible: {feasible}; I(18)/max I(<=12) = {ratio:.3} (< 0.75): {degrades}; 5%-ile kbps at biases {biases:?}: {}",
            levels.join(", ")
        ),
    )
}

fn coverage_monotone() -> Outcome {
    let mut violations = 0;
    let mut points = 0;
    let par = Parallelism::default();
    for kind in [ScenarioKind::Urban, ScenarioKind::Suburban] {
        for rns in [4, 10] {
            let c = cfg(kind, rns, 20);
            let layout = build_layout(&c.scenario, &c.radio).unwrap();
            let mut ops: Vec<OperatingPoint> = Vec::new();
            for x in [0.0, 4.0, 8.0, 12.0, 16.0] {
                for y in 0..=10 {
                    ops.push(OperatingPoint::new(x, y as f64).unwrap());
                }
            }
            ops.sort_by(|a, b| a.effective_bias_db().total_cmp(&b.effective_bias_db()));
            let area = coverage_fractions(&c, &layout, &ops, 20_000, 20, par);
            let drops = evaluate_operating_points(
                &c,
                &ops,
                &c.power_control,
                Directions::only(Direction::Dl),
                par,
            )
            .unwrap();
            let terminal: Vec<f64> = drops.iter().map(|r| r.coverage_fraction).collect();
            for series in [&area, &terminal] {
                for i in 1..ops.len() {
                    points += 1;
                    let same = ops[i].effective_bias_db() == ops[i - 1].effective_bias_db();
                    if series[i] < series[i - 1] || (same && series[i] != series[i - 1]) {
                        violations += 1;
                    }
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("{points} consecutive pairs (area and terminal estimators, urban/suburban, 4/10 RNs), {violations} decreases"),
    )
}

type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let urban = std::cell::OnceCell::new();
    let criteria: Vec<Criterion> = vec![
        (
            1,
            "effective-bias identity",
            Box::new(effective_bias_identity),
        ),
        (2, "uplink power formula", Box::new(power_control_formula)),
        (3, "round-robin fairness", Box::new(round_robin_fairness)),
        (
            4,
            "monotone DL SINR in eNB power reduction",
            Box::new(monotone_dl_sinr_in_reduction),
        ),
        (
            5,
            "brute-force oracle equivalence",
            Box::new(brute_force_oracle),
        ),
        (
            6,
            "thread-count determinism",
            Box::new(thread_count_determinism),
        ),
        (
            7,
            "urban 4-RN no-bias coverage and gain",
            Box::new(|| urban_no_bias_gain(urban.get_or_init(urban_dl))),
        ),
        (
            8,
            "urban 4-RN power-reduction trend",
            Box::new(|| urban_reduction_trend(urban.get_or_init(urban_dl))),
        ),
        (
            9,
            "suburban 4-RN trend and small optimum bias",
            Box::new(suburban_trend),
        ),
        (
            10,
            "UL power-control strategy ordering",
            Box::new(ul_strategy_ordering),
        ),
        (
            11,
            "coverage monotone in effective bias",
            Box::new(coverage_monotone),
        ),
    ];
    let mut failed = Vec::new();
    for (n, name, run) in &criteria {
        let t = Instant::now();
        let o = run();
        println!(
            "criterion {n:>2} {}: {name}: {} [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(*n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!(
            "acceptance: {} of {} criteria failed: {failed:?}",
            failed.len(),
            criteria.len()
        );
        std::process::exit(1);
    }
}
