use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::{info, warn};

use super::config::OutputFormat;
use super::run::RunResult;
use crate::error::{Error, Result};

pub const COMPARISON_FILE: &str = "comparison.csv";
pub const EPOCHS_FILE: &str = "epochs.csv";
pub const RESULT_FILE: &str = "result.json";
pub const SWEEP_FILE: &str = "sweep.dat";

const COMPARISON_HEADER: [&str; 9] = [
    "scenario",
    "N",
    "k",
    "analytic",
    "enumerated",
    "mc_mean",
    "mc_halfwidth",
    "gap",
    "pass",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmitReport {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl EmitReport {
    fn empty(&mut self, msg: String) {
        warn!("{msg}");
        self.warnings.push(msg);
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Serialize(format!("{}: {other:?}", path.display())),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_comparison(result: &RunResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(COMPARISON_HEADER).map_err(|e| csv_err(path, e))?;
    for r in &result.comparison {
        w.write_record([
            r.scenario.clone(),
            r.nodes.to_string(),
            r.k.to_string(),
            opt(r.analytic),
            opt(r.enumerated),
            opt(r.mc_mean),
            opt(r.mc_halfwidth),
            opt(r.gap),
            r.pass.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_epochs(result: &RunResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["epoch", "user", "status", "hops"])
        .map_err(|e| csv_err(path, e))?;
    for r in result.simulation.iter().flat_map(|s| &s.records) {
        w.write_record([
            r.epoch.to_string(),
            r.user.to_string(),
            r.status.as_str().to_string(),
            r.hops.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_sweep(result: &RunResult, path: &Path) -> Result<()> {
    let mut out = format!(
        "# scenario {} seed {}\n# N,analytic,mc_mean\n",
        result.config.name, result.seed.root
    );
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "NaN".into());
    for p in &result.sweep {
        out.push_str(&format!("{},{},{}\n", p.nodes, cell(p.analytic), cell(p.mc_mean)));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes the requested formats under `dir`, creating it if needed.
/// Formats with nothing to show still get a header-only file and a warning.
pub fn emit_results(result: &RunResult, dir: &Path, formats: &[OutputFormat]) -> Result<EmitReport> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut report = EmitReport::default();
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    for format in formats {
        match format {
            OutputFormat::Csv => {
                let has_estimates = !result.comparison.is_empty();
                if has_estimates || result.simulation.is_none() {
                    let path = dir.join(COMPARISON_FILE);
                    if !has_estimates {
                        report.empty(format!("{}: no comparison rows", path.display()));
                    }
                    write_comparison(result, &path)?;
                    report.files.push(path);
                }
                if let Some(sim) = &result.simulation {
                    let path = dir.join(EPOCHS_FILE);
                    if sim.records.is_empty() {
                        report.empty(format!("{}: epoch series is empty, header only", path.display()));
                    }
                    write_epochs(result, &path)?;
                    report.files.push(path);
                }
            }
            OutputFormat::Json => {
                let path = dir.join(RESULT_FILE);
                let mut text = serde_json::to_string_pretty(result).map_err(|e| Error::Serialize(e.to_string()))?;
                text.push('\n');
                let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                f.write_all(text.as_bytes()).map_err(|e| Error::io(&path, e))?;
                report.files.push(path);
            }
            OutputFormat::Dat => {
                let path = dir.join(SWEEP_FILE);
                if result.sweep.is_empty() {
                    report.empty(format!(
                        "{}: no N sweep in this run (set analysis.sweep_nodes), header only",
                        path.display()
                    ));
                }
                write_sweep(result, &path)?;
                report.files.push(path);
            }
        }
    }
    for f in &report.files {
        info!("wrote {}", f.display());
    }
    Ok(report)
}

/// Reads back a `result.json`.
pub fn load_result(path: impl AsRef<Path>) -> Result<RunResult> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Serialize(format!("{}: {e}", path.display())))
}
