//! Scenario files in, result files out.

mod config;
mod emit;
mod run;

pub use config::{
    load_scenario, AnalysisConfig, AttackConfig, AttackModel, OutputConfig, OutputFormat, OverlayConfig, RolesConfig,
    ScenarioConfig, ScheduledLoadConfig, UsersConfig,
};
pub use emit::{emit_results, load_result, EmitReport, COMPARISON_FILE, EPOCHS_FILE, RESULT_FILE, SWEEP_FILE};
pub use run::{run_mode, Mode, NamedEstimate, RunResult, SeedProvenance, SeedSource, SimulationReport, UserSeries};
