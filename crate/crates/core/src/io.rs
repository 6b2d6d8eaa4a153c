//! CSV and manifest output.
//!
//! Floats use Rust's shortest round-trip formatting and rows follow a
//! fixed order, so reruns with the same configuration are byte-identical.
//! Existing files are never replaced unless `force` is set.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::association::OperatingPoint;
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::metrics::ThroughputDistribution;
use crate::pc::PcReport;
use crate::sweep::{Direction, GainSurface};

pub const CDF_HEADER: [&str; 3] = ["run_label", "throughput_bps", "cdf_fraction"];
pub const SURFACE_HEADER: [&str; 5] = [
    "x_reduction_db",
    "y_bias_db",
    "gain_5pct_percent",
    "gain_50pct_percent",
    "coverage_fraction",
];
pub const PC_HEADER: [&str; 13] = [
    "strategy",
    "bias_db",
    "macro_p0_dbm",
    "macro_alpha",
    "macro_p_max_dbm",
    "relay_p0_dbm",
    "relay_alpha",
    "relay_p_max_dbm",
    "p5_bps",
    "p50_bps",
    "gain_5pct_percent",
    "gain_50pct_percent",
    "infeasible",
];
pub const COVERAGE_HEADER: [&str; 4] = [
    "x_reduction_db",
    "y_bias_db",
    "effective_bias_db",
    "coverage_fraction",
];

pub fn cdf_file_name(d: Direction) -> String {
    format!("cdf_{}.csv", d.as_str())
}

pub fn surface_file_name(d: Direction) -> String {
    format!("surface_{}.csv", d.as_str())
}

pub const PC_FILE: &str = "pc_strategies.csv";
pub const COVERAGE_FILE: &str = "coverage.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

fn opt(v: Option<f64>) -> String {
    v.map(|g| g.to_string()).unwrap_or_default()
}

fn render<R, I>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(header).map_err(ser)?;
    for row in rows {
        let row: Vec<String> = row.into_iter().collect();
        w.write_record(&row).map_err(ser)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

/// One row per sample of each distribution, in the given run order.
pub fn cdf_csv(runs: &[&ThroughputDistribution]) -> Result<String> {
    render(
        &CDF_HEADER,
        runs.iter().flat_map(|d| {
            d.cdf_points()
                .map(move |(x, f)| vec![d.label.clone(), x.to_string(), f.to_string()])
        }),
    )
}

/// Y-major rows; undefined gains are empty fields.
pub fn surface_csv(surface: &GainSurface) -> Result<String> {
    render(
        &SURFACE_HEADER,
        surface.cells.iter().map(|c| {
            vec![
                c.x_reduction_db.to_string(),
                c.y_bias_db.to_string(),
                opt(c.gain_5pct_percent),
                opt(c.gain_50pct_percent),
                c.coverage_fraction.to_string(),
            ]
        }),
    )
}

pub fn pc_csv(report: &PcReport) -> Result<String> {
    render(
        &PC_HEADER,
        report.points.iter().map(|p| {
            let (m, r) = (p.configs.macro_served, p.configs.relay_served);
            vec![
                p.strategy.as_str().to_string(),
                p.bias_db.to_string(),
                m.p0_dbm.to_string(),
                m.alpha.to_string(),
                m.p_max_dbm.to_string(),
                r.p0_dbm.to_string(),
                r.alpha.to_string(),
                r.p_max_dbm.to_string(),
                p.p5_bps.to_string(),
                p.p50_bps.to_string(),
                opt(p.gain_5pct_percent),
                opt(p.gain_50pct_percent),
                p.infeasible.to_string(),
            ]
        }),
    )
}

pub fn coverage_csv(points: &[(OperatingPoint, f64)]) -> Result<String> {
    render(
        &COVERAGE_HEADER,
        points.iter().map(|(op, f)| {
            vec![
                op.x_reduction_db.to_string(),
                op.y_bias_db.to_string(),
                op.effective_bias_db().to_string(),
                f.to_string(),
            ]
        }),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub timestamp_unix: u64,
    pub outputs: Vec<String>,
    /// Settings that depart from the reference deployment.
    pub non_reference_settings: Vec<String>,
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn new(cfg: &SimConfig, outputs: Vec<String>, timestamp_unix: u64) -> Result<Self> {
        let config =
            serde_json::to_value(cfg.to_file()).map_err(|e| Error::Serialize(e.to_string()))?;
        Ok(RunManifest {
            config_hash: cfg.hash(),
            seed: cfg.scenario.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix,
            outputs,
            non_reference_settings: non_reference_settings(cfg),
            config,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// Human-readable list of settings outside the reference deployment.
pub fn non_reference_settings(cfg: &SimConfig) -> Vec<String> {
    let s = &cfg.scenario;
    let mut flags = Vec::new();
    if s.isd_m != s.scenario.default_isd_m() {
        flags.push(format!("isd_m={}", s.isd_m));
    }
    if s.n_sites != 19 {
        flags.push(format!("n_sites={}", s.n_sites));
    }
    if s.ues_per_sector != 10 {
        flags.push(format!("ues_per_sector={}", s.ues_per_sector));
    }
    if s.allow_nonstandard_rns && !s.is_reference_deployment() {
        flags.push(format!("rns_per_sector={}", s.rns_per_sector));
    }
    flags
}

/// Writes result files into one directory, refusing to replace existing
/// files unless forced. The manifest is written last.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    force: bool,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: impl Into<PathBuf>, force: bool) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(OutputDir {
            dir,
            force,
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Fails before anything is written if any of `names` already exists.
    pub fn check(&self, names: &[String]) -> Result<()> {
        if self.force {
            return Ok(());
        }
        for n in names {
            let p = self.dir.join(n);
            if p.exists() {
                return Err(Error::WouldOverwrite(p));
            }
        }
        Ok(())
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let p = self.dir.join(name);
        if !self.force && p.exists() {
            return Err(Error::WouldOverwrite(p));
        }
        fs::write(&p, contents).map_err(|source| Error::Io { path: p, source })?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn finish(mut self, cfg: &SimConfig, timestamp_unix: u64) -> Result<RunManifest> {
        let manifest = RunManifest::new(cfg, self.written.clone(), timestamp_unix)?;
        self.write(MANIFEST_FILE, &manifest.to_json()?)?;
        Ok(manifest)
    }
}
