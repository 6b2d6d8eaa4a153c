//! `relaysim` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error.
//! Diagnostics go to stderr; stdout carries only the completion summary.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use relaysim::association::coverage_fractions;
use relaysim::config::{read_config_file, ConfigFile};
use relaysim::io::{
    cdf_csv, cdf_file_name, coverage_csv, pc_csv, surface_csv, surface_file_name, OutputDir,
    COVERAGE_FILE, MANIFEST_FILE, PC_FILE,
};
use relaysim::metrics::gain;
use relaysim::pc::{optimize_pc, ConstraintBaseline, PcSearchSpace, PcStrategy, PcStrategyKind};
use relaysim::scenario::build_layout;
use relaysim::sweep::{run_baseline, run_scenario, sweep_grid, Direction, Directions};
use relaysim::{ConfigError, Error, OperatingPoint, Parallelism, ScenarioKind, SimConfig};

#[derive(Parser, Debug)]
#[command(
    name = "relaysim",
    version,
    about = "Relay-enhanced cellular DL/UL system-level simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one operating point against the eNB-only reference.
    Run(Common),
    /// Sweep eNB power reduction × relay bias.
    Sweep(SweepArgs),
    /// Optimize uplink power control with strategies I, II and III.
    OptimizePc(PcArgs),
    /// Relay-served area fraction as a function of effective bias.
    Coverage(CoverageArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML configuration file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    /// Relays per sector (0, 4 or 10).
    #[arg(long)]
    rns: Option<usize>,
    /// Relay cell-selection bias Y in dB.
    #[arg(long)]
    bias: Option<f64>,
    /// eNB transmit power reduction X in dB, at most 16.
    #[arg(long = "power-reduction")]
    power_reduction: Option<f64>,
    /// Independent network drops (default 50).
    #[arg(long)]
    drops: Option<usize>,
    /// Master random seed, below 2^63 (default 1).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Replace existing output files.
    #[arg(long)]
    force: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Permit relay counts other than 0, 4 and 10.
    #[arg(long)]
    allow_nonstandard_rns: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Urban,
    Suburban,
}

impl From<ScenarioArg> for ScenarioKind {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Urban => ScenarioKind::Urban,
            ScenarioArg::Suburban => ScenarioKind::Suburban,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    Dl,
    Ul,
    Both,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Power reductions in dB: comma list of values or `start:stop:step`.
    #[arg(long = "x-values", default_value = "0:16:1")]
    x_values: String,
    /// Biases in dB, same syntax.
    #[arg(long = "y-values", default_value = "0:4:1")]
    y_values: String,
    /// Link direction(s) to evaluate.
    #[arg(long, value_enum, default_value = "dl")]
    direction: DirectionArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConstraintArg {
    StrategyI,
    EnbOnly,
}

#[derive(Args, Debug)]
struct PcArgs {
    #[command(flatten)]
    common: Common,
    /// Effective biases in dB, same syntax as the sweep axes.
    #[arg(long, default_value = "0:18:6")]
    biases: String,
    /// Reference for the 50%-ile constraint.
    #[arg(long, value_enum, default_value = "strategy-i")]
    constraint: ConstraintArg,
    /// Drops used for the coarse search stage (0: all).
    #[arg(long, default_value_t = 20)]
    screening_drops: usize,
}

#[derive(Args, Debug)]
struct CoverageArgs {
    #[command(flatten)]
    common: Common,
    /// Biases Y in dB at the configured power reduction.
    #[arg(long, default_value = "0:20:1")]
    biases: String,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Independent LOS/shadowing realizations the samples are split over.
    #[arg(long, default_value_t = 50)]
    realizations: usize,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Runtime(Error),
    #[error("{0}")]
    Threads(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(c) => CliError::Config(c),
            other => CliError::Runtime(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Threads(_) => 3,
        }
    }
}

/// Parses `a,b,c`, `start:stop:step` or a mix of both.
fn parse_axis(name: &str, text: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = |part: &str| ConfigError::Parse(format!("--{name}: cannot parse `{part}`"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [v] => out.push(v.parse().map_err(|_| bad(part))?),
            [a, b, s] => {
                let (a, b, s): (f64, f64, f64) = (
                    a.parse().map_err(|_| bad(part))?,
                    b.parse().map_err(|_| bad(part))?,
                    s.parse().map_err(|_| bad(part))?,
                );
                if s.is_nan() || s <= 0.0 || b < a {
                    return Err(bad(part));
                }
                let n = ((b - a) / s + 1e-9).floor() as usize;
                out.extend((0..=n).map(|i| a + i as f64 * s));
            }
            _ => return Err(bad(part)),
        }
    }
    Ok(out)
}

fn resolve_config(c: &Common) -> Result<SimConfig, ConfigError> {
    let mut file = match &c.config {
        Some(p) => read_config_file(p)?,
        None => ConfigFile::default(),
    };
    if let Some(s) = c.scenario {
        file.scenario = Some(s.into());
    }
    if let Some(v) = c.rns {
        file.rns_per_sector = Some(v);
    }
    if let Some(v) = c.bias {
        file.bias_db = Some(v);
    }
    if let Some(v) = c.power_reduction {
        file.power_reduction_db = Some(v);
    }
    if let Some(v) = c.drops {
        file.n_drops = Some(v);
    }
    if let Some(v) = c.seed {
        file.seed = Some(v);
    }
    if c.allow_nonstandard_rns {
        file.allow_nonstandard_rns = Some(true);
    }
    file.resolve()
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
    {
        return t;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn setup(c: &Common) -> Result<(SimConfig, OutputDir), CliError> {
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Threads(e.to_string()))?;
    }
    let cfg = resolve_config(c)?;
    let out = OutputDir::create(&c.out, c.force)?;
    Ok((cfg, out))
}

fn fmt_gain(g: Result<f64, Error>) -> String {
    g.map(|v| format!("{v:.1}%"))
        .unwrap_or_else(|_| "undefined".into())
}

fn run(c: &Common) -> Result<String, CliError> {
    let (cfg, mut out) = setup(c)?;
    let files = vec![
        cdf_file_name(Direction::Dl),
        cdf_file_name(Direction::Ul),
        MANIFEST_FILE.into(),
    ];
    out.check(&files)?;
    let par = Parallelism::default();
    let result = run_scenario(&cfg, par)?;
    let base = run_baseline(&cfg, Directions::BOTH, par)?;
    out.write(&files[0], &cdf_csv(&[&base.dl, &result.dl])?)?;
    out.write(&files[1], &cdf_csv(&[&base.ul, &result.ul])?)?;
    let dir = out.path().display().to_string();
    out.finish(&cfg, timestamp())?;
    Ok(format!(
        "run {}: 5%-ile gain DL {} UL {}, relay coverage {:.3}, {} drops -> {dir}",
        result.label,
        fmt_gain(gain(&base.dl, &result.dl, 0.05)),
        fmt_gain(gain(&base.ul, &result.ul, 0.05)),
        result.coverage_fraction,
        cfg.scenario.n_drops
    ))
}

fn sweep(a: &SweepArgs) -> Result<String, CliError> {
    let xs = parse_axis("x-values", &a.x_values)?;
    let ys = parse_axis("y-values", &a.y_values)?;
    let (cfg, mut out) = setup(&a.common)?;
    let dirs: Vec<Direction> = match a.direction {
        DirectionArg::Dl => vec![Direction::Dl],
        DirectionArg::Ul => vec![Direction::Ul],
        DirectionArg::Both => vec![Direction::Dl, Direction::Ul],
    };
    let mut files: Vec<String> = dirs.iter().map(|&d| surface_file_name(d)).collect();
    files.push(MANIFEST_FILE.into());
    out.check(&files)?;
    let mut best = Vec::new();
    for (&d, name) in dirs.iter().zip(&files) {
        let s = sweep_grid(&cfg, &xs, &ys, d, Parallelism::default())?;
        out.write(name, &surface_csv(&s)?)?;
        if let Some(b) = s.best() {
            best.push(format!(
                "{} best (X {}, Y {}) {:.1}%",
                d.as_str(),
                b.x_reduction_db,
                b.y_bias_db,
                b.gain_5pct_percent.unwrap_or(f64::NAN)
            ));
        }
    }
    let dir = out.path().display().to_string();
    out.finish(&cfg, timestamp())?;
    Ok(format!(
        "sweep {}x{} grid: {} -> {dir}",
        ys.len(),
        xs.len(),
        if best.is_empty() {
            "no cells".into()
        } else {
            best.join(", ")
        }
    ))
}

fn optimize(a: &PcArgs) -> Result<String, CliError> {
    let biases = parse_axis("biases", &a.biases)?;
    for &b in &biases {
        OperatingPoint::bias_only(b)?;
    }
    let (cfg, mut out) = setup(&a.common)?;
    out.check(&[PC_FILE.into(), MANIFEST_FILE.into()])?;
    let strategy = PcStrategy {
        search_space: PcSearchSpace {
            screening_drops: a.screening_drops,
            ..PcSearchSpace::default()
        },
        constraint: match a.constraint {
            ConstraintArg::StrategyI => ConstraintBaseline::StrategyI,
            ConstraintArg::EnbOnly => ConstraintBaseline::EnbOnly,
        },
    };
    let report = optimize_pc(&cfg, &strategy, &biases, Parallelism::default())?;
    out.write(PC_FILE, &pc_csv(&report)?)?;
    let dir = out.path().display().to_string();
    out.finish(&cfg, timestamp())?;
    let best = |k: PcStrategyKind| {
        report
            .points
            .iter()
            .filter(|p| p.strategy == k)
            .filter_map(|p| p.gain_5pct_percent)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    Ok(format!(
        "optimize-pc: strategy I (p0 {}, alpha {}, p_max {}); best 5%-ile gain I {:.1}% II {:.1}% III {:.1}% over {} biases, {} evaluations -> {dir}",
        report.strategy_i.p0_dbm,
        report.strategy_i.alpha,
        report.strategy_i.p_max_dbm,
        best(PcStrategyKind::EnbOnlySetting),
        best(PcStrategyKind::RelayOptimized),
        best(PcStrategyKind::PerBiasOptimized),
        biases.len(),
        report.evaluations
    ))
}

fn coverage(a: &CoverageArgs) -> Result<String, CliError> {
    let ys = parse_axis("biases", &a.biases)?;
    let (cfg, mut out) = setup(&a.common)?;
    out.check(&[COVERAGE_FILE.into(), MANIFEST_FILE.into()])?;
    let ops = ys
        .iter()
        .map(|&y| OperatingPoint::new(cfg.scenario.power_reduction_db, y))
        .collect::<Result<Vec<_>, _>>()?;
    let layout = build_layout(&cfg.scenario, &cfg.radio)?;
    let fr = coverage_fractions(
        &cfg,
        &layout,
        &ops,
        a.samples,
        a.realizations,
        Parallelism::default(),
    );
    let points: Vec<_> = ops.iter().copied().zip(fr.iter().copied()).collect();
    out.write(COVERAGE_FILE, &coverage_csv(&points)?)?;
    let dir = out.path().display().to_string();
    out.finish(&cfg, timestamp())?;
    let range = match (fr.first(), fr.last()) {
        (Some(lo), Some(hi)) => format!("{lo:.3} .. {hi:.3}"),
        _ => "empty".into(),
    };
    Ok(format!(
        "coverage: {} bias points, relay area fraction {range} -> {dir}",
        ops.len()
    ))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run(c) => run(c),
        Command::Sweep(a) => sweep(a),
        Command::OptimizePc(a) => optimize(a),
        Command::Coverage(a) => coverage(a),
    };
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
