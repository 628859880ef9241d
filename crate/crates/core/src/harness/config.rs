use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{EstimateOptions, LayerModel, ScenarioParams, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::packet::{AuthKey, Routing, DEFAULT_REPLAY_WINDOW};
use crate::ring::{MAX_BITS, MIN_HASH_BITS};
use crate::threat::HealingConfig;
use crate::world::WorldConfig;

/// A complete experiment description. Every section except `overlay` may be
/// omitted; after [`load_scenario`] all defaults are written out explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub overlay: OverlayConfig,
    #[serde(default)]
    pub roles: RolesConfig,
    #[serde(default)]
    pub users: UsersConfig,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default)]
    pub healing: HealingConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_name() -> String {
    "scenario".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlayConfig {
    pub nodes: usize,
    #[serde(default = "default_bits")]
    pub bits: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_capacity")]
    pub capacity: u64,
    #[serde(default = "default_routing")]
    pub routing: Routing,
    #[serde(default = "default_replay_window")]
    pub replay_window: u64,
}

fn default_bits() -> u32 {
    32
}
fn default_seed() -> u64 {
    1
}
fn default_capacity() -> u64 {
    100
}
fn default_routing() -> Routing {
    Routing::Chord
}
fn default_replay_window() -> u64 {
    DEFAULT_REPLAY_WINDOW
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RolesConfig {
    pub soaps_per_user: usize,
    /// SOAP pool size; `null` means one pool slot per `soaps_per_user`.
    pub soap_pool: Option<usize>,
    pub soap_cap: usize,
    pub beacons: usize,
    pub servlets: usize,
    pub disjoint: bool,
}

impl Default for RolesConfig {
    fn default() -> Self {
        Self {
            soaps_per_user: 1,
            soap_pool: None,
            soap_cap: 3,
            beacons: 1,
            servlets: 1,
            disjoint: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsersConfig {
    pub count: usize,
    /// Hex-encoded 32-byte keys, one per user. `null` derives keys from the seed.
    pub keys: Option<Vec<String>>,
}

impl Default for UsersConfig {
    fn default() -> Self {
        Self { count: 1, keys: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackModel {
    #[default]
    None,
    StaticRandom,
    Adaptive,
    Congestion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduledLoadConfig {
    /// Overlay node address, e.g. `overlay-0003`.
    pub node: String,
    pub load: u64,
    pub from_epoch: u64,
    pub until_epoch: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackConfig {
    pub model: AttackModel,
    /// Nodes flooded at once.
    pub k: usize,
    /// Total bandwidth; `null` means `k * overlay.capacity`.
    pub budget: Option<u64>,
    pub max_targets: Option<usize>,
    /// Simulated epochs.
    pub duration: u64,
    pub start: u64,
    pub stop: Option<u64>,
    pub resample_each_epoch: bool,
    pub probe_budget: u32,
    pub migrate_each_epoch: bool,
    pub inject_packets: bool,
    /// Explicit per-node loads for the congestion model. Empty means an
    /// even split over `k` random nodes each epoch.
    pub schedule: Vec<ScheduledLoadConfig>,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            model: AttackModel::None,
            k: 0,
            budget: None,
            max_targets: None,
            duration: 100,
            start: 0,
            stop: None,
            resample_each_epoch: false,
            probe_budget: 3,
            migrate_each_epoch: false,
            inject_packets: true,
            schedule: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub trials: u64,
    pub partitions: usize,
    pub enumeration_cap: u64,
    /// Allowed gap between the closed form and the enumeration.
    pub tolerance: f64,
    pub layer_model: LayerModel,
    /// Overlay sizes for the N sweep; empty disables it.
    pub sweep_nodes: Vec<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            partitions: 8,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            tolerance: 1e-12,
            layer_model: LayerModel::Three,
            sweep_nodes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    /// gnuplot data file for the N sweep.
    Dat,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "dat" => Ok(OutputFormat::Dat),
            other => Err(Error::Config {
                field: "output.formats".into(),
                message: format!("unknown format `{other}` (expected csv, json or dat)"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "results".into(),
            formats: vec![OutputFormat::Csv, OutputFormat::Json],
        }
    }
}

fn field(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn constraint(first: &str, second: &str, message: impl Into<String>) -> Error {
    Error::Constraint {
        first: first.into(),
        second: second.into(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    /// Parses JSON text, rejecting unknown keys and reporting the path of
    /// the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            field(if path.is_empty() { "." } else { &path }, e.into_inner().to_string())
        })?;
        cfg.fill_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    /// A config with every default except the overlay size.
    pub fn with_nodes(nodes: usize) -> Self {
        let mut cfg = Self {
            name: default_name(),
            overlay: OverlayConfig {
                nodes,
                bits: default_bits(),
                seed: default_seed(),
                capacity: default_capacity(),
                routing: default_routing(),
                replay_window: default_replay_window(),
            },
            roles: RolesConfig::default(),
            users: UsersConfig::default(),
            attack: AttackConfig::default(),
            healing: HealingConfig::default(),
            analysis: AnalysisConfig::default(),
            output: OutputConfig::default(),
        };
        cfg.fill_defaults();
        cfg
    }

    /// Replaces the `null` placeholders that stand for derived values.
    pub fn fill_defaults(&mut self) {
        self.roles.soap_pool.get_or_insert(self.roles.soaps_per_user);
        let budget = self.attack.k as u64 * self.overlay.capacity;
        self.attack.budget.get_or_insert(budget);
    }

    pub fn soap_pool(&self) -> usize {
        self.roles.soap_pool.unwrap_or(self.roles.soaps_per_user)
    }

    pub fn budget(&self) -> u64 {
        self.attack
            .budget
            .unwrap_or(self.attack.k as u64 * self.overlay.capacity)
    }

    pub fn validate(&self) -> Result<()> {
        let o = &self.overlay;
        let r = &self.roles;
        if o.nodes == 0 {
            return Err(field("overlay.nodes", "must be at least 1"));
        }
        if !(MIN_HASH_BITS..=MAX_BITS).contains(&o.bits) {
            return Err(field(
                "overlay.bits",
                format!("must be in {MIN_HASH_BITS}..={MAX_BITS}"),
            ));
        }
        if o.bits < 64 && o.nodes as u128 > 1u128 << o.bits {
            return Err(constraint(
                "overlay.nodes",
                "overlay.bits",
                "more nodes than ring identifiers",
            ));
        }
        if o.capacity == 0 {
            return Err(field("overlay.capacity", "must be at least 1"));
        }
        if o.replay_window == 0 {
            return Err(field("overlay.replay_window", "must be at least 1"));
        }
        for (name, v) in [
            ("roles.soaps_per_user", r.soaps_per_user),
            ("roles.beacons", r.beacons),
            ("roles.servlets", r.servlets),
        ] {
            if v == 0 {
                return Err(field(name, "must be at least 1"));
            }
            if v > o.nodes {
                return Err(constraint(name, "overlay.nodes", format!("{v} exceeds {}", o.nodes)));
            }
        }
        if r.beacons > u32::MAX as usize {
            return Err(field("roles.beacons", "too large"));
        }
        let pool = self.soap_pool();
        if pool < r.soaps_per_user {
            return Err(constraint(
                "roles.soap_pool",
                "roles.soaps_per_user",
                "pool is smaller than the per-user SOAP count",
            ));
        }
        if r.soaps_per_user > r.soap_cap {
            return Err(constraint(
                "roles.soaps_per_user",
                "roles.soap_cap",
                "per-user SOAP count exceeds the cap",
            ));
        }
        if r.disjoint && pool + r.beacons + r.servlets > o.nodes {
            return Err(constraint(
                "roles.disjoint",
                "overlay.nodes",
                format!(
                    "disjoint roles need {} nodes, overlay has {}",
                    pool + r.beacons + r.servlets,
                    o.nodes
                ),
            ));
        }
        if !r.disjoint && pool > o.nodes {
            return Err(constraint("roles.soap_pool", "overlay.nodes", "pool exceeds overlay"));
        }

        if self.users.count == 0 {
            return Err(field("users.count", "must be at least 1"));
        }
        if let Some(keys) = &self.users.keys {
            if keys.len() != self.users.count {
                return Err(constraint(
                    "users.keys",
                    "users.count",
                    format!("{} keys for {} users", keys.len(), self.users.count),
                ));
            }
            for (i, k) in keys.iter().enumerate() {
                parse_key(k).map_err(|m| field(&format!("users.keys[{i}]"), m))?;
            }
        }

        let a = &self.attack;
        if a.k > o.nodes {
            return Err(constraint(
                "attack.k",
                "overlay.nodes",
                format!("k = {} exceeds N = {}", a.k, o.nodes),
            ));
        }
        if a.stop.is_some_and(|stop| stop < a.start) {
            return Err(constraint(
                "attack.stop",
                "attack.start",
                "attack stops before it starts",
            ));
        }
        if a.max_targets == Some(0) {
            return Err(field("attack.max_targets", "must be at least 1 or null"));
        }
        for (i, s) in a.schedule.iter().enumerate() {
            if s.until_epoch < s.from_epoch {
                return Err(constraint(
                    &format!("attack.schedule[{i}].until_epoch"),
                    &format!("attack.schedule[{i}].from_epoch"),
                    "load ends before it starts",
                ));
            }
        }
        if !a.schedule.is_empty() && a.model != AttackModel::Congestion {
            return Err(constraint(
                "attack.schedule",
                "attack.model",
                "explicit schedules only apply to the congestion model",
            ));
        }

        let an = &self.analysis;
        if an.partitions == 0 {
            return Err(field("analysis.partitions", "must be at least 1"));
        }
        if an.enumeration_cap == 0 {
            return Err(field("analysis.enumeration_cap", "must be at least 1"));
        }
        if !(an.tolerance.is_finite() && an.tolerance >= 0.0) {
            return Err(field("analysis.tolerance", "must be a finite non-negative number"));
        }
        for (i, &n) in an.sweep_nodes.iter().enumerate() {
            let name = format!("analysis.sweep_nodes[{i}]");
            if n < a.k {
                return Err(constraint(
                    &name,
                    "attack.k",
                    format!("sweep size {n} is below k = {}", a.k),
                ));
            }
            if r.disjoint && n < r.soaps_per_user + r.beacons + r.servlets {
                return Err(constraint(
                    &name,
                    "roles.disjoint",
                    "sweep size cannot hold disjoint roles",
                ));
            }
        }
        if self.output.formats.is_empty() {
            return Err(field("output.formats", "list at least one format"));
        }
        Ok(())
    }

    pub fn params(&self) -> ScenarioParams {
        ScenarioParams {
            nodes: self.overlay.nodes,
            soaps_per_user: self.roles.soaps_per_user,
            beacons: self.roles.beacons,
            servlets: self.roles.servlets,
            attacked: self.attack.k,
            disjoint: self.roles.disjoint,
        }
    }

    pub fn estimate_options(&self) -> EstimateOptions {
        EstimateOptions {
            model: self.analysis.layer_model,
            trials: self.analysis.trials,
            partitions: self.analysis.partitions,
            enumeration_cap: self.analysis.enumeration_cap,
            tolerance: self.analysis.tolerance,
        }
    }

    pub fn world_config(&self) -> WorldConfig {
        WorldConfig {
            nodes: self.overlay.nodes,
            bits: self.overlay.bits,
            soaps: self.soap_pool(),
            soaps_per_user: self.roles.soaps_per_user,
            soap_cap: self.roles.soap_cap,
            beacons: self.roles.beacons as u32,
            servlets: self.roles.servlets,
            disjoint: self.roles.disjoint,
            users: self.users.count,
            capacity: self.overlay.capacity,
            replay_window: self.overlay.replay_window,
            healing: self.healing,
            routing: self.overlay.routing,
        }
    }

    pub fn user_keys(&self) -> Result<Option<Vec<AuthKey>>> {
        let Some(keys) = &self.users.keys else {
            return Ok(None);
        };
        keys.iter()
            .enumerate()
            .map(|(i, k)| parse_key(k).map_err(|m| field(&format!("users.keys[{i}]"), m)))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

fn parse_key(text: &str) -> std::result::Result<AuthKey, String> {
    let mut bytes = [0u8; 32];
    hex::decode_to_slice(text, &mut bytes).map_err(|e| format!("expected 64 hex digits: {e}"))?;
    Ok(AuthKey::from_bytes(bytes))
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::NotFound(format!("scenario file {}", path.display())));
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    ScenarioConfig::from_json(&text)
}
