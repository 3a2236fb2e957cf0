//! Batch driver for the `thermoq` command-line tool: configuration,
//! sweeps, result tables and verification reports.

pub mod config;
pub mod crossval;
pub mod experiments;
pub mod output;
pub mod report;

use std::path::{Path, PathBuf};

use config::{config_hash, Format, RunConfig};
use report::Report;

/// Invalid invocation or configuration (exit status 2).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Files written by a run and its verification report.
#[derive(Debug)]
pub struct RunOutcome {
    pub table: PathBuf,
    pub report_file: PathBuf,
    pub report: Report,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            EXIT_OK
        } else {
            EXIT_VERIFICATION
        }
    }
}

/// Executes a parsed configuration and writes the table and report.
pub fn run_config(cfg: &RunConfig, hash: &str) -> anyhow::Result<RunOutcome> {
    let (rows, verification, points) = experiments::execute(cfg);
    let default_name = format!("{}.{}", cfg.stem(), cfg.output.format.extension());
    let table = output::resolve_output(cfg.output.path.as_deref(), &default_name);
    output::write_table(&table, cfg.output.format, &rows, hash)?;
    let report = verification.into_report(cfg.experiment.kind(), hash, points, rows.len());
    let report_file = output::report_path(&table);
    std::fs::write(&report_file, serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(RunOutcome { table, report_file, report })
}

/// `thermoq run <config>`.
pub fn run_file(path: &Path) -> Result<anyhow::Result<RunOutcome>, UsageError> {
    let (cfg, text) = RunConfig::load(path)?;
    Ok(run_config(&cfg, &config_hash(&text)))
}

/// `thermoq cross-validate`: the same code path as a `cross-validate`
/// config, hashed over its canonical JSON form.
pub fn cross_validate(seed: u64, draws: usize, tamper: config::TamperSpec) -> Result<anyhow::Result<RunOutcome>, UsageError> {
    let text = serde_json::json!({
        "name": format!("crossval-seed{seed}-draws{draws}"),
        "experiment": "cross-validate",
        "params": { "seed": seed, "draws": draws, "tamper": tamper },
        "output": { "format": Format::Csv },
    })
    .to_string();
    let cfg = RunConfig::from_json(&text)?;
    Ok(run_config(&cfg, &config_hash(&text)))
}
