//! Closed-form, brute-force and sampled estimates of the chance that a
//! random flood of `k` nodes cuts a user off.

mod denial;
pub mod exact;
mod montecarlo;
mod report;
mod walk;

pub use denial::{
    analytic_denial_exact, analytic_denial_probability, denial_predicate, enumerate_denial_exact,
    enumerate_denial_oracle, LayerModel, RoleSets, ScenarioParams, DEFAULT_ENUMERATION_CAP,
};
pub use montecarlo::{montecarlo_denial, montecarlo_partitioned, McEstimate};
pub use report::{
    compare_report, node_sweep, ComparisonRow, DenialEstimate, EstimateOptions, SweepPoint, EXACT_TOLERANCE,
};
pub use walk::{expected_walk_length, WalkReport};
