use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::error::{Error, Result};
use crate::ring::{Overlay, RingId};
use crate::seed::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackerBudget {
    /// Load units the attacker can place per epoch.
    pub total_bandwidth: u64,
    /// `None` means unlimited.
    pub max_simultaneous_targets: Option<usize>,
}

impl AttackerBudget {
    pub fn new(total_bandwidth: u64) -> Self {
        Self {
            total_bandwidth,
            max_simultaneous_targets: None,
        }
    }

    fn target_limit(&self) -> usize {
        self.max_simultaneous_targets.unwrap_or(usize::MAX)
    }
}

/// Attack load per node for one epoch.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation(pub BTreeMap<RingId, u64>);

impl Allocation {
    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Everything an attacker is allowed to observe about the world. Role
/// placement (SOAPs, beacons, servlets) and the filter are absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackerView {
    pub epoch: u64,
    pub target: Address,
    pub up_nodes: Vec<RingId>,
    /// Every overlay member, live or not. Attack targets are drawn from
    /// this list so that targeting does not depend on earlier damage.
    pub members: Vec<RingId>,
    pub node_capacity: BTreeMap<RingId, u64>,
    /// Addresses of legitimate users, which an attacker may spoof.
    pub user_addresses: Vec<Address>,
    pub own_addresses: Vec<Address>,
}

impl AttackerView {
    fn capacity(&self, id: RingId) -> u64 {
        self.node_capacity.get(&id).copied().unwrap_or(0)
    }
}

pub trait Attacker {
    fn allocate(&mut self, view: &AttackerView, budget: &AttackerBudget, rng: &mut SimRng) -> Allocation;

    /// Coarse per-epoch signal: did legitimate traffic get through.
    fn observe(&mut self, _delivery_ok: bool) {}
}

/// Uniform random `k`-subset of `nodes`, in sampling order.
pub fn sample_nodes<R: Rng + ?Sized>(nodes: &[RingId], k: usize, rng: &mut R) -> Result<Vec<RingId>> {
    if k > nodes.len() {
        return Err(Error::Infeasible(format!(
            "cannot attack {k} of {} live nodes",
            nodes.len()
        )));
    }
    Ok(index::sample(rng, nodes.len(), k)
        .into_iter()
        .map(|i| nodes[i])
        .collect())
}

pub fn static_attack_sample<R: Rng + ?Sized>(overlay: &Overlay, k: usize, rng: &mut R) -> Result<BTreeSet<RingId>> {
    Ok(sample_nodes(overlay.live_ids(), k, rng)?.into_iter().collect())
}

// Saturates nodes in `order` one at a time until the budget runs out; the
// last node may get a partial share.
fn concentrate(order: &[RingId], view: &AttackerView, budget: &AttackerBudget) -> Allocation {
    let mut remaining = budget.total_bandwidth;
    let mut out = BTreeMap::new();
    for &node in order.iter().take(budget.target_limit()) {
        if remaining == 0 {
            break;
        }
        let load = view.capacity(node).min(remaining);
        remaining -= load;
        out.insert(node, load);
    }
    Allocation(out)
}

/// Floods `k` uniformly chosen nodes, optionally picking a fresh set every
/// epoch.
#[derive(Debug, Clone)]
pub struct StaticRandom {
    pub k: usize,
    pub resample_each_epoch: bool,
    current: Option<Vec<RingId>>,
}

impl StaticRandom {
    pub fn new(k: usize, resample_each_epoch: bool) -> Self {
        Self {
            k,
            resample_each_epoch,
            current: None,
        }
    }
}

impl Attacker for StaticRandom {
    fn allocate(&mut self, view: &AttackerView, budget: &AttackerBudget, rng: &mut SimRng) -> Allocation {
        if self.current.is_none() || self.resample_each_epoch {
            let k = self.k.min(view.members.len());
            self.current = Some(sample_nodes(&view.members, k, rng).expect("k clamped to live count"));
        }
        concentrate(self.current.as_deref().unwrap_or_default(), view, budget)
    }
}

/// Attack-and-migrate: concentrates the whole budget on as many nodes as it
/// can saturate, holds that set while legitimate traffic is denied, and
/// moves to a fresh uniform set after `patience` consecutive epochs in which
/// traffic got through.
#[derive(Debug, Clone)]
pub struct Adaptive {
    pub patience: u32,
    current: Vec<RingId>,
    ok_streak: u32,
}

impl Adaptive {
    pub fn new(probe_budget: u32, migrate_each_epoch: bool) -> Self {
        Self {
            patience: if migrate_each_epoch { 1 } else { probe_budget.max(1) },
            current: Vec::new(),
            ok_streak: 0,
        }
    }

    pub fn current(&self) -> &[RingId] {
        &self.current
    }
}

impl Attacker for Adaptive {
    fn allocate(&mut self, view: &AttackerView, budget: &AttackerBudget, rng: &mut SimRng) -> Allocation {
        if self.current.is_empty() || self.ok_streak >= self.patience {
            let widest = view.node_capacity.values().copied().max().unwrap_or(1).max(1);
            let slots = ((budget.total_bandwidth / widest) as usize)
                .max(1)
                .min(budget.target_limit())
                .min(view.members.len());
            self.current = sample_nodes(&view.members, slots, rng).expect("slots clamped to live count");
            self.ok_streak = 0;
        }
        concentrate(&self.current, view, budget)
    }

    fn observe(&mut self, delivery_ok: bool) {
        if delivery_ok {
            self.ok_streak += 1;
        } else {
            self.ok_streak = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledLoad {
    pub node: RingId,
    pub load: u64,
    pub from_epoch: u64,
    /// Exclusive.
    pub until_epoch: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationPolicy {
    /// Budget split evenly over `targets` fresh random nodes every epoch.
    EvenSplit { targets: usize },
    /// Loads fixed in advance by the experimenter.
    Explicit(Vec<ScheduledLoad>),
}

#[derive(Debug, Clone)]
pub struct Congestion {
    pub policy: AllocationPolicy,
}

impl Attacker for Congestion {
    fn allocate(&mut self, view: &AttackerView, budget: &AttackerBudget, rng: &mut SimRng) -> Allocation {
        match &self.policy {
            AllocationPolicy::EvenSplit { targets } => {
                let n = (*targets).min(view.members.len()).min(budget.target_limit());
                if n == 0 {
                    return Allocation::default();
                }
                let picked = sample_nodes(&view.members, n, rng).expect("clamped");
                let share = budget.total_bandwidth / n as u64;
                let extra = (budget.total_bandwidth % n as u64) as usize;
                Allocation(
                    picked
                        .into_iter()
                        .enumerate()
                        .map(|(i, node)| (node, share + u64::from(i < extra)))
                        .filter(|&(_, load)| load > 0)
                        .collect(),
                )
            }
            AllocationPolicy::Explicit(schedule) => {
                let mut out = BTreeMap::new();
                for s in schedule
                    .iter()
                    .filter(|s| (s.from_epoch..s.until_epoch).contains(&view.epoch))
                {
                    *out.entry(s.node).or_insert(0) += s.load;
                }
                Allocation(out)
            }
        }
    }
}
