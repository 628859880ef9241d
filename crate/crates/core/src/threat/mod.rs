//! Attacker models and the epoch-by-epoch attack / repair / heal loop.

mod attacker;
mod health;
mod sim;

pub use attacker::{
    sample_nodes, static_attack_sample, Adaptive, Allocation, AllocationPolicy, Attacker, AttackerBudget, AttackerView,
    Congestion, ScheduledLoad, StaticRandom,
};
pub use health::{apply_congestion, heal_step, HealingConfig, NodeHealth};
pub use sim::{AttackWindow, EpochRecord, EpochReport, EpochSummary, Scenario, Simulation, SimulationTrace};
