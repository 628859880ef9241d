use std::fmt;
use std::str::FromStr;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::config::{AttackModel, ScenarioConfig};
use crate::analysis::{
    analytic_denial_probability, enumerate_denial_oracle, montecarlo_partitioned, node_sweep, ComparisonRow,
    DenialEstimate, RoleSets, SweepPoint,
};
use crate::error::{Error, Result};
use crate::packet::DeliveryStatus;
use crate::seed::derive_seed;
use crate::threat::{
    Adaptive, AllocationPolicy, AttackWindow, Attacker, AttackerBudget, Congestion, EpochRecord, EpochSummary,
    Scenario, ScheduledLoad, Simulation, StaticRandom,
};
use crate::world::World;
use crate::Address;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Analytic,
    Enumerate,
    Montecarlo,
    Simulate,
    Compare,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Enumerate => "enumerate",
            Mode::Montecarlo => "montecarlo",
            Mode::Simulate => "simulate",
            Mode::Compare => "compare",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Mode::Analytic,
            Mode::Enumerate,
            Mode::Montecarlo,
            Mode::Simulate,
            Mode::Compare,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::Config {
            field: "mode".into(),
            message: format!("unknown mode `{s}`"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Config,
    CommandLine,
}

/// Where the root seed came from and how per-module streams are split off it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedProvenance {
    pub root: u64,
    pub source: SeedSource,
    pub derivation: String,
}

impl SeedProvenance {
    fn new(root: u64, source: SeedSource) -> Self {
        Self {
            root,
            source,
            derivation: "stream(label) = u64_le(sha256(\"sos-seed/v1\" || u64_le(root) || label)[0..8])".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedEstimate {
    pub scenario: String,
    pub estimate: DenialEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSeries {
    pub user: Address,
    pub attempts: u64,
    pub delivered: u64,
    pub denial_fraction: f64,
    /// Fraction of epochs in which every SOAP of this user was down.
    pub soap_denial_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub epochs: u64,
    pub denial_fraction: f64,
    pub per_user: Vec<UserSeries>,
    pub attacker_packets: u64,
    pub attacker_delivered: u64,
    pub records: Vec<EpochRecord>,
    pub summaries: Vec<EpochSummary>,
}

/// Everything one invocation produced, with the exact config and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub mode: Mode,
    pub seed: SeedProvenance,
    pub config: ScenarioConfig,
    pub estimates: Vec<NamedEstimate>,
    pub comparison: Vec<ComparisonRow>,
    pub sweep: Vec<SweepPoint>,
    pub simulation: Option<SimulationReport>,
    pub warnings: Vec<String>,
}

struct Run {
    cfg: ScenarioConfig,
    seed: u64,
    warnings: Vec<String>,
}

impl Run {
    fn warn(&mut self, msg: String) {
        warn!("{msg}");
        self.warnings.push(msg);
    }

    fn require_disjoint(&self, mode: Mode) -> Result<()> {
        if self.cfg.roles.disjoint {
            return Ok(());
        }
        Err(Error::Constraint {
            first: "roles.disjoint".into(),
            second: "mode".into(),
            message: format!("mode {mode} needs disjoint role layers"),
        })
    }

    fn require_trials(&self) -> Result<()> {
        if self.cfg.analysis.trials == 0 {
            return Err(Error::Config {
                field: "analysis.trials".into(),
                message: "Monte Carlo needs at least one trial".into(),
            });
        }
        Ok(())
    }

    fn single(&mut self, mode: Mode) -> Result<DenialEstimate> {
        let p = self.cfg.params();
        let opts = self.cfg.estimate_options();
        let mut est = DenialEstimate {
            params: p,
            analytic: None,
            enumerated: None,
            montecarlo: None,
        };
        match mode {
            Mode::Analytic => {
                self.require_disjoint(mode)?;
                est.analytic = Some(analytic_denial_probability(&p, opts.model)?);
            }
            Mode::Enumerate => {
                let roles = RoleSets::canonical(&p);
                est.enumerated = Some(enumerate_denial_oracle(&p, &roles, opts.model, opts.enumeration_cap)?);
            }
            Mode::Montecarlo => {
                self.require_trials()?;
                let roles = RoleSets::canonical(&p);
                est.montecarlo = Some(montecarlo_partitioned(
                    &p,
                    &roles,
                    opts.model,
                    opts.trials,
                    opts.partitions,
                    derive_seed(self.seed, "analysis/montecarlo"),
                    true,
                )?);
            }
            Mode::Compare => {
                est = DenialEstimate::compute(&p, &opts, derive_seed(self.seed, "analysis/montecarlo"))?;
                self.note_skipped(&est, &self.cfg.name.clone());
            }
            Mode::Simulate => unreachable!("simulate has no closed-form estimate"),
        }
        Ok(est)
    }

    fn note_skipped(&mut self, est: &DenialEstimate, scenario: &str) {
        if est.analytic.is_none() {
            self.warn(format!("{scenario}: closed form skipped, role layers overlap"));
        }
        if est.enumerated.is_none() {
            self.warn(format!(
                "{scenario}: enumeration skipped, C({}, {}) exceeds cap {}",
                est.params.nodes, est.params.attacked, self.cfg.analysis.enumeration_cap
            ));
        }
        if est.montecarlo.is_none() {
            self.warn(format!("{scenario}: Monte Carlo skipped, analysis.trials is 0"));
        }
    }

    fn sweep(&mut self, mode: Mode) -> Result<Vec<(SweepPoint, DenialEstimate)>> {
        let sizes = self.cfg.analysis.sweep_nodes.clone();
        if sizes.is_empty() {
            return Ok(Vec::new());
        }
        let mut opts = self.cfg.estimate_options();
        match mode {
            Mode::Compare => {}
            Mode::Analytic => {
                opts.trials = 0;
                opts.enumeration_cap = 0;
            }
            _ => {
                self.warn(format!("N sweep only runs in analytic and compare modes, not {mode}"));
                return Ok(Vec::new());
            }
        }
        let points = node_sweep(
            &self.cfg.params(),
            &sizes,
            &opts,
            derive_seed(self.seed, "analysis/sweep"),
        )?;
        if mode == Mode::Compare {
            for (point, est) in &points {
                self.note_skipped(est, &format!("{}/N={}", self.cfg.name, point.nodes));
            }
        }
        Ok(points)
    }

    fn simulate(&mut self) -> Result<SimulationReport> {
        let cfg = self.cfg.clone();
        let keys = cfg.user_keys()?;
        let world = World::build(&cfg.world_config(), self.seed, keys.as_deref())?;
        let a = &cfg.attack;
        let attacker: Option<Box<dyn Attacker>> = match a.model {
            AttackModel::None => None,
            AttackModel::StaticRandom => Some(Box::new(StaticRandom::new(a.k, a.resample_each_epoch))),
            AttackModel::Adaptive => Some(Box::new(Adaptive::new(a.probe_budget, a.migrate_each_epoch))),
            AttackModel::Congestion if a.schedule.is_empty() => Some(Box::new(Congestion {
                policy: AllocationPolicy::EvenSplit { targets: a.k },
            })),
            AttackModel::Congestion => {
                let mut loads = Vec::with_capacity(a.schedule.len());
                for (i, s) in a.schedule.iter().enumerate() {
                    let node = world
                        .overlay
                        .node_by_address(&Address::new(s.node.clone()))
                        .ok_or_else(|| Error::Config {
                            field: format!("attack.schedule[{i}].node"),
                            message: format!("no overlay node named `{}`", s.node),
                        })?;
                    loads.push(ScheduledLoad {
                        node: node.id,
                        load: s.load,
                        from_epoch: s.from_epoch,
                        until_epoch: s.until_epoch,
                    });
                }
                Some(Box::new(Congestion {
                    policy: AllocationPolicy::Explicit(loads),
                }))
            }
        };
        let no_attacker = attacker.is_none();
        let scenario = Scenario {
            attacker,
            budget: AttackerBudget {
                total_bandwidth: cfg.budget(),
                max_simultaneous_targets: a.max_targets,
            },
            window: AttackWindow {
                start: a.start,
                stop: a.stop,
            },
            inject_packets: a.inject_packets,
            duration: a.duration,
        };
        if no_attacker && a.k > 0 {
            self.warn("attack.k is set but attack.model is none; simulation runs unattacked".into());
        }
        if a.duration == 0 {
            self.warn("attack.duration is 0; the epoch series is empty".into());
        }

        let trace = Simulation::new(world, scenario, self.seed).run()?;
        let per_user = (0..cfg.users.count)
            .map(|u| {
                let address = Address::new(format!("user-{u}"));
                let mine: Vec<_> = trace.records.iter().filter(|r| r.user == address).collect();
                let attempts = mine.len() as u64;
                let delivered = mine.iter().filter(|r| r.status == DeliveryStatus::Delivered).count() as u64;
                let soaps_down = mine.iter().filter(|r| r.soaps_down).count() as u64;
                let frac = |x: u64| if attempts == 0 { 0.0 } else { x as f64 / attempts as f64 };
                UserSeries {
                    user: address,
                    attempts,
                    delivered,
                    denial_fraction: frac(attempts - delivered),
                    soap_denial_fraction: frac(soaps_down),
                }
            })
            .collect();
        Ok(SimulationReport {
            epochs: a.duration,
            denial_fraction: trace.denial_fraction(),
            per_user,
            attacker_packets: trace.summaries.iter().map(|s| u64::from(s.attacker_packets)).sum(),
            attacker_delivered: trace.attacker_delivered(),
            records: trace.records,
            summaries: trace.summaries,
        })
    }
}

/// Runs one mode. `seed_override` replaces `overlay.seed`; the echoed config
/// always carries the seed actually used.
pub fn run_mode(config: &ScenarioConfig, mode: Mode, seed_override: Option<u64>) -> Result<RunResult> {
    config.validate()?;
    let mut cfg = config.clone();
    cfg.fill_defaults();
    let source = match seed_override {
        Some(s) => {
            cfg.overlay.seed = s;
            SeedSource::CommandLine
        }
        None => SeedSource::Config,
    };
    let seed = cfg.overlay.seed;
    info!("running {} in {mode} mode with seed {seed}", cfg.name);
    let mut run = Run {
        cfg,
        seed,
        warnings: Vec::new(),
    };

    let tolerance = run.cfg.analysis.tolerance;
    let mut estimates = Vec::new();
    let mut comparison = Vec::new();
    let mut sweep = Vec::new();
    if mode != Mode::Simulate {
        let est = run.single(mode)?;
        let name = run.cfg.name.clone();
        comparison.push(ComparisonRow::from_estimate(name.clone(), &est, tolerance));
        estimates.push(NamedEstimate {
            scenario: name.clone(),
            estimate: est,
        });
        for (point, est) in run.sweep(mode)? {
            let scenario = format!("{name}/N={}", point.nodes);
            comparison.push(ComparisonRow::from_estimate(scenario.clone(), &est, tolerance));
            estimates.push(NamedEstimate {
                scenario,
                estimate: est,
            });
            sweep.push(point);
        }
    }
    let simulation = match mode {
        Mode::Simulate | Mode::Compare => Some(run.simulate()?),
        _ => None,
    };
    if let Some(bad) = comparison.iter().find(|r| !r.pass) {
        run.warn(format!("comparison row {} failed its agreement check", bad.scenario));
    }

    Ok(RunResult {
        mode,
        seed: SeedProvenance::new(seed, source),
        config: run.cfg,
        estimates,
        comparison,
        sweep,
        simulation,
        warnings: run.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singleton(k: usize) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::with_nodes(10);
        cfg.attack.k = k;
        cfg.attack.duration = 20;
        cfg.fill_defaults();
        cfg
    }

    #[test]
    fn analytic_mode_fills_only_the_closed_form() {
        let r = run_mode(&singleton(1), Mode::Analytic, None).unwrap();
        let est = &r.estimates[0].estimate;
        assert!((est.analytic.unwrap() - 0.3).abs() < 1e-15);
        assert!(est.enumerated.is_none() && est.montecarlo.is_none());
        assert!(r.simulation.is_none());
    }

    #[test]
    fn analytic_mode_needs_disjoint_roles() {
        let mut cfg = singleton(1);
        cfg.roles.disjoint = false;
        assert!(matches!(
            run_mode(&cfg, Mode::Analytic, None),
            Err(Error::Constraint { first, .. }) if first == "roles.disjoint"
        ));
    }

    #[test]
    fn compare_singleton_row() {
        let r = run_mode(&singleton(1), Mode::Compare, Some(5)).unwrap();
        let row = &r.comparison[0];
        assert_eq!((row.nodes, row.k), (10, 1));
        assert!((row.analytic.unwrap() - 0.3).abs() < 1e-15);
        assert!((row.enumerated.unwrap() - 0.3).abs() < 1e-15);
        assert!(row.pass, "{row:?}");
        assert_eq!(r.seed.source, SeedSource::CommandLine);
        assert_eq!(r.config.overlay.seed, 5);
        assert!(r.simulation.is_some());
    }

    #[test]
    fn enumeration_over_cap_is_too_large() {
        let mut cfg = ScenarioConfig::with_nodes(60);
        cfg.attack.k = 10;
        assert!(matches!(
            run_mode(&cfg, Mode::Enumerate, None),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn identical_inputs_identical_results() {
        let mut cfg = singleton(2);
        cfg.attack.model = AttackModel::StaticRandom;
        cfg.attack.resample_each_epoch = true;
        cfg.analysis.trials = 5000;
        cfg.analysis.sweep_nodes = vec![10, 20];
        let a = run_mode(&cfg, Mode::Compare, None).unwrap();
        let b = run_mode(&cfg, Mode::Compare, None).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.sweep.len(), 2);
        assert_eq!(a.comparison.len(), 3);
    }

    #[test]
    fn schedule_with_unknown_node_is_reported() {
        let mut cfg = singleton(0);
        cfg.attack.model = AttackModel::Congestion;
        cfg.attack.schedule = vec![super::super::config::ScheduledLoadConfig {
            node: "nowhere".into(),
            load: 1,
            from_epoch: 0,
            until_epoch: 1,
        }];
        assert!(matches!(
            run_mode(&cfg, Mode::Simulate, None),
            Err(Error::Config { field, .. }) if field == "attack.schedule[0].node"
        ));
    }
}
