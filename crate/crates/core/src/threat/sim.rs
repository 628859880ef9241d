use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::attacker::{Allocation, Attacker, AttackerBudget};
use super::health::{apply_congestion, heal_step};
use crate::address::Address;
use crate::error::Result;
use crate::packet::{
    direct_attack_packet, forward_to_delivery, mint_token, soap_admit, Admission, AuthToken, DeliveryOutcome,
    DeliveryStatus, Packet,
};
use crate::seed::{stream, SimRng};
use crate::world::World;

/// Epochs `[start, stop)` during which the attacker places load. `stop =
/// None` keeps the attack on until the end of the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackWindow {
    pub start: u64,
    pub stop: Option<u64>,
}

impl AttackWindow {
    pub fn always() -> Self {
        Self { start: 0, stop: None }
    }

    pub fn contains(&self, epoch: u64) -> bool {
        epoch >= self.start && self.stop.is_none_or(|stop| epoch < stop)
    }
}

pub struct Scenario {
    pub attacker: Option<Box<dyn Attacker>>,
    pub budget: AttackerBudget,
    pub window: AttackWindow,
    /// Attacker also sends one direct and one overlay packet per epoch.
    pub inject_packets: bool,
    pub duration: u64,
}

impl Scenario {
    pub fn unattacked(duration: u64) -> Self {
        Self {
            attacker: None,
            budget: AttackerBudget::new(0),
            window: AttackWindow::always(),
            inject_packets: false,
            duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: u64,
    pub user: Address,
    pub status: DeliveryStatus,
    pub hops: usize,
    /// Every role layer on the user's path had a live node and the filter
    /// matched the servlets when the attempt was made.
    pub serviceable: bool,
    /// Every SOAP assigned to this user was unavailable.
    pub soaps_down: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub epoch: u64,
    pub attack_load: u64,
    pub unavailable_nodes: usize,
    pub filter_consistent: bool,
    pub attacker_packets: u32,
    pub attacker_delivered: u32,
    pub denied_users: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochReport {
    pub records: Vec<EpochRecord>,
    pub summary: EpochSummary,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub records: Vec<EpochRecord>,
    pub summaries: Vec<EpochSummary>,
}

impl SimulationTrace {
    /// Fraction of user-epoch attempts that were not delivered.
    pub fn denial_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let denied = self
            .records
            .iter()
            .filter(|r| r.status != DeliveryStatus::Delivered)
            .count();
        denied as f64 / self.records.len() as f64
    }

    pub fn attacker_delivered(&self) -> u64 {
        self.summaries.iter().map(|s| u64::from(s.attacker_delivered)).sum()
    }
}

pub struct Simulation {
    pub world: World,
    scenario: Scenario,
    attack_rng: SimRng,
    packet_rng: SimRng,
    next_epoch: u64,
}

impl Simulation {
    pub fn new(world: World, scenario: Scenario, seed: u64) -> Self {
        Self {
            world,
            scenario,
            attack_rng: stream(seed, "attack/allocation"),
            packet_rng: stream(seed, "attack/packets"),
            next_epoch: 0,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// One epoch: attack allocation, health update, healing, then one
    /// delivery attempt per user.
    pub fn advance_epoch(&mut self) -> Result<EpochReport> {
        let epoch = self.next_epoch;
        self.next_epoch += 1;
        let world = &mut self.world;
        world.epoch = epoch;
        world.filter.advance_to(epoch);

        let allocation = match self.scenario.attacker.as_mut() {
            Some(attacker) if self.scenario.window.contains(epoch) => {
                attacker.allocate(&world.attacker_view(), &self.scenario.budget, &mut self.attack_rng)
            }
            _ => Allocation::default(),
        };
        debug_assert!(allocation.total() <= self.scenario.budget.total_bandwidth);
        apply_congestion(world, &allocation, &self.scenario.budget)?;
        heal_step(world)?;

        let filter_consistent = world.filter_consistent();
        let mut records = Vec::with_capacity(world.users.len());
        for u in 0..world.users.len() {
            let serviceable = filter_consistent && world.layers_intact(u);
            let soaps_down = !world.users[u].soaps.iter().any(|&id| world.overlay.is_up(id));
            let outcome = deliver_legitimate(world, u);
            records.push(EpochRecord {
                epoch,
                user: world.users[u].address.clone(),
                status: outcome.status,
                hops: outcome.hops,
                serviceable,
                soaps_down,
            });
        }

        let (mut sent, mut delivered) = (0u32, 0u32);
        if self.scenario.attacker.is_some() && self.scenario.inject_packets {
            for outcome in inject_attack_packets(world, &mut self.packet_rng) {
                sent += 1;
                if outcome.status == DeliveryStatus::Delivered {
                    delivered += 1;
                }
            }
        }

        let denied_users = records.iter().filter(|r| r.status != DeliveryStatus::Delivered).count();
        if let Some(attacker) = self.scenario.attacker.as_mut() {
            attacker.observe(denied_users == 0);
        }

        let summary = EpochSummary {
            epoch,
            attack_load: allocation.total(),
            unavailable_nodes: world.health.len() - world.overlay.live_count(),
            filter_consistent,
            attacker_packets: sent,
            attacker_delivered: delivered,
            denied_users,
        };
        Ok(EpochReport { records, summary })
    }

    pub fn run(&mut self) -> Result<SimulationTrace> {
        let mut trace = SimulationTrace::default();
        while self.next_epoch < self.scenario.duration {
            let report = self.advance_epoch()?;
            trace.records.extend(report.records);
            trace.summaries.push(report.summary);
        }
        Ok(trace)
    }
}

fn deliver_legitimate(world: &mut World, user: usize) -> DeliveryOutcome {
    let u = &mut world.users[user];
    let nonce = u.next_nonce;
    u.next_nonce += 1;
    let token = mint_token(&u.address, &world.target, &u.key, nonce);
    let mut packet = Packet::new(u.address.clone(), token, 512);

    let entry = u.soaps.iter().copied().find(|&s| world.overlay.is_up(s));
    let Some(soap) = entry else {
        return DeliveryOutcome {
            status: DeliveryStatus::DroppedNodeDown,
            hops: 0,
            epoch: world.epoch,
            failed_at: u.soaps.first().copied(),
        };
    };
    match soap_admit(world, soap, &mut packet) {
        Admission::Admitted => forward_to_delivery(world, &mut packet, world.config.routing),
        Admission::Refused(status) => DeliveryOutcome {
            status,
            hops: 0,
            epoch: world.epoch,
            failed_at: None,
        },
    }
}

/// One packet straight at the target from an attacker-known address, and
/// one forged-token packet into a random live overlay node.
fn inject_attack_packets(world: &mut World, rng: &mut SimRng) -> Vec<DeliveryOutcome> {
    let view = world.attacker_view();
    let spoofable: Vec<&Address> = view.own_addresses.iter().chain(&view.user_addresses).collect();
    let mut out = Vec::with_capacity(2);
    if let Some(source) = spoofable.choose(rng) {
        out.push(direct_attack_packet(world, source));
    }

    if let Some(&entry) = view.up_nodes.choose(rng) {
        let claimed = spoofable
            .choose(rng)
            .map(|a| (*a).clone())
            .unwrap_or_else(|| Address::new("attacker-0"));
        let mut tag = [0u8; 32];
        rng.fill_bytes(&mut tag);
        let token = AuthToken {
            user: claimed.clone(),
            target: view.target.clone(),
            nonce: rng.random_range(1..1_000_000),
            tag,
        };
        let mut packet = Packet::new(claimed, token, 1500);
        let outcome = match soap_admit(world, entry, &mut packet) {
            Admission::Admitted => forward_to_delivery(world, &mut packet, world.config.routing),
            Admission::Refused(status) => DeliveryOutcome {
                status,
                hops: 0,
                epoch: world.epoch,
                failed_at: None,
            },
        };
        out.push(outcome);
    }
    out
}
