use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::attacker::{Allocation, AttackerBudget};
use crate::error::{Error, Result};
use crate::ring::{Health, RingId};
use crate::roles::{derive_beacons, select_servlets_avoiding, update_filter};
use crate::world::World;

/// Load state of one overlay node. A node is unavailable for an epoch when
/// its incoming attack load reaches capacity, and for `repair_delay` epochs
/// after the load drops back below capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeHealth {
    pub capacity: u64,
    pub incoming_load: u64,
    pub repair_timer: u32,
}

impl NodeHealth {
    pub fn new(capacity: u64) -> Self {
        Self {
            capacity,
            incoming_load: 0,
            repair_timer: 0,
        }
    }

    pub fn overloaded(&self) -> bool {
        self.incoming_load >= self.capacity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HealingConfig {
    /// Re-derive beacons and replace failed servlets each epoch.
    pub enabled: bool,
    pub repair_delay: u32,
    pub filter_latency: u64,
}

impl Default for HealingConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            repair_delay: 2,
            filter_latency: 1,
        }
    }
}

/// Installs this epoch's attack loads and takes saturated nodes down.
/// Returns the nodes that are overloaded this epoch.
pub fn apply_congestion(
    world: &mut World,
    allocation: &Allocation,
    budget: &AttackerBudget,
) -> Result<BTreeSet<RingId>> {
    let total = allocation.total();
    if total > budget.total_bandwidth {
        return Err(Error::invalid(format!(
            "allocation of {total} exceeds attacker bandwidth {}",
            budget.total_bandwidth
        )));
    }
    if let Some(limit) = budget.max_simultaneous_targets {
        if allocation.0.len() > limit {
            return Err(Error::invalid(format!(
                "allocation names {} nodes, limit is {limit}",
                allocation.0.len()
            )));
        }
    }
    if let Some(unknown) = allocation.0.keys().find(|id| !world.health.contains_key(id)) {
        return Err(Error::NotFound(format!("attacked node {unknown}")));
    }

    for h in world.health.values_mut() {
        h.incoming_load = 0;
    }
    for (id, &load) in &allocation.0 {
        world.health.get_mut(id).expect("checked above").incoming_load = load;
    }

    let mut saturated = BTreeSet::new();
    for (&id, h) in world.health.iter_mut() {
        if h.overloaded() {
            h.repair_timer = 0;
            saturated.insert(id);
        }
    }
    for &id in &saturated {
        world.overlay.set_health(id, Health::Down)?;
    }
    Ok(saturated)
}

/// Node repair, then (when healing is enabled) beacon re-derivation and
/// servlet replacement with a filter update.
pub fn heal_step(world: &mut World) -> Result<()> {
    let delay = world.config.healing.repair_delay;
    let ids: Vec<RingId> = world.health.keys().copied().collect();
    for id in ids {
        let state = world.overlay.node(id).map(|n| n.health);
        let h = world.health.get_mut(&id).expect("known node");
        match state {
            Some(Health::Repairing) => {
                h.repair_timer = h.repair_timer.saturating_sub(1);
                if h.repair_timer == 0 {
                    world.overlay.set_health(id, Health::Up)?;
                }
            }
            Some(Health::Down) if !h.overloaded() => {
                if delay == 0 {
                    world.overlay.set_health(id, Health::Up)?;
                } else {
                    h.repair_timer = delay;
                    world.overlay.set_health(id, Health::Repairing)?;
                }
            }
            _ => {}
        }
    }

    if !world.config.healing.enabled || world.overlay.live_count() == 0 {
        return Ok(());
    }

    world.roles.beacons = derive_beacons(&world.overlay, &world.target, world.config.beacons)?;

    let failed: Vec<RingId> = world
        .roles
        .servlets
        .iter()
        .copied()
        .filter(|&s| !world.overlay.is_up(s))
        .collect();
    if failed.is_empty() {
        return Ok(());
    }
    for s in &failed {
        world.roles.servlets.remove(s);
        world.leases.revoke(*s);
    }

    let wanted = world.config.servlets.saturating_sub(world.roles.servlets.len());
    let mut avoid = world.roles.servlets.clone();
    if world.config.disjoint {
        avoid.extend(world.roles.beacons.iter().copied());
        avoid.extend(world.roles.soaps.iter().copied());
    }
    let eligible = world.overlay.live_ids().iter().filter(|id| !avoid.contains(id)).count();
    if eligible < wanted {
        avoid = world.roles.servlets.clone();
    }
    let eligible = world.overlay.live_ids().iter().filter(|id| !avoid.contains(id)).count();
    let fresh = select_servlets_avoiding(
        &world.overlay,
        &world.target,
        wanted.min(eligible),
        &avoid,
        &mut world.role_rng,
    )?;
    for &s in &fresh {
        world.leases.grant(s, world.epoch)?;
        world.roles.servlets.insert(s);
    }
    let next = update_filter(world.filter.latest(), &world.roles.servlets, &world.overlay)?;
    world.filter.issue(next, world.config.healing.filter_latency);
    Ok(())
}
