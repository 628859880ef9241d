use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use log::{error, info};

use sos_core::harness::{emit_results, load_scenario, run_mode, Mode, OutputFormat};
use sos_core::{Error, Result};

/// Run an SOS denial-of-service scenario and write the results.
#[derive(Debug, Parser)]
#[command(name = "sos-sim", version)]
struct Cli {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,

    /// analytic, enumerate, montecarlo, simulate or compare.
    #[arg(long, default_value = "compare")]
    mode: Mode,

    /// Root seed; overrides `overlay.seed` in the scenario.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory, or `-` to print the JSON result on stdout.
    /// Defaults to `output.dir` from the scenario.
    #[arg(long)]
    out: Option<String>,

    /// Comma-separated list of csv, json, dat. Defaults to `output.formats`.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<OutputFormat>>,
}

fn execute(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let cfg = load_scenario(&cli.scenario)?;
    let result = run_mode(&cfg, cli.mode, cli.seed)?;
    let out = cli.out.unwrap_or_else(|| cfg.output.dir.clone());
    if out == "-" {
        let text = serde_json::to_string_pretty(&result).map_err(|e| Error::Serialize(e.to_string()))?;
        let mut stdout = std::io::stdout().lock();
        writeln!(stdout, "{text}").map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        })?;
    } else {
        let formats = cli.format.unwrap_or_else(|| cfg.output.formats.clone());
        emit_results(&result, &PathBuf::from(out), &formats)?;
    }
    info!("finished in {:.3?}", started.elapsed());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
