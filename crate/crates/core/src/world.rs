//! One simulated SOS deployment: overlay, roles, filter, credentials and
//! per-node load state.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::error::{Error, Result};
use crate::packet::{AuthKey, Credentials, Routing, DEFAULT_REPLAY_WINDOW};
use crate::ring::{hash_to_ring, truncated_digest, NodeRecord, Overlay, RingId, MIN_HASH_BITS};
use crate::roles::{
    derive_beacons, select_servlets_avoiding, update_filter, FilterPolicy, LeaseBook, PerimeterFilter, RoleAssignment,
};
use crate::seed::{derive_seed, stream, SimRng};
use crate::threat::{AttackerView, HealingConfig, NodeHealth};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub nodes: usize,
    pub bits: u32,
    /// Size of the SOAP pool.
    pub soaps: usize,
    pub soaps_per_user: usize,
    pub soap_cap: usize,
    pub beacons: u32,
    pub servlets: usize,
    pub disjoint: bool,
    pub users: usize,
    pub capacity: u64,
    pub replay_window: u64,
    pub healing: HealingConfig,
    pub routing: Routing,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            nodes: 10,
            bits: 32,
            soaps: 1,
            soaps_per_user: 1,
            soap_cap: 3,
            beacons: 3,
            servlets: 2,
            disjoint: true,
            users: 1,
            capacity: 100,
            replay_window: DEFAULT_REPLAY_WINDOW,
            healing: HealingConfig::default(),
            routing: Routing::Chord,
        }
    }
}

#[derive(Debug, Clone)]
pub struct User {
    pub address: Address,
    pub key: AuthKey,
    pub next_nonce: u64,
    pub soaps: Vec<RingId>,
}

#[derive(Debug, Clone)]
pub struct World {
    pub epoch: u64,
    pub target: Address,
    pub overlay: Overlay,
    pub roles: RoleAssignment,
    pub leases: LeaseBook,
    pub filter: PerimeterFilter,
    pub credentials: Credentials,
    pub users: Vec<User>,
    pub attackers: Vec<Address>,
    pub health: BTreeMap<RingId, NodeHealth>,
    pub config: WorldConfig,
    pub(crate) role_rng: SimRng,
    pub(crate) route_rng: SimRng,
}

fn node_address(i: usize) -> Address {
    Address::new(format!("overlay-{i:04}"))
}

impl World {
    /// Builds a world with every role populated; `keys`, when given, must
    /// hold one key per user.
    pub fn build(config: &WorldConfig, seed: u64, keys: Option<&[AuthKey]>) -> Result<Self> {
        let cfg = config;
        if cfg.nodes == 0 {
            return Err(Error::invalid("overlay needs at least one node"));
        }
        let mut overlay = Overlay::new(cfg.bits)?;
        if (cfg.nodes as u128) > overlay.space().size() {
            return Err(Error::Infeasible(format!(
                "{} nodes do not fit on a {}-bit ring",
                cfg.nodes, cfg.bits
            )));
        }
        if cfg.soaps_per_user > cfg.soap_cap {
            return Err(Error::invalid("soaps_per_user exceeds the per-user SOAP cap"));
        }
        if cfg.users > 0 && (cfg.soaps_per_user == 0 || cfg.soaps_per_user > cfg.soaps) {
            return Err(Error::invalid("soaps_per_user must be in [1, soaps]"));
        }
        if let Some(keys) = keys {
            if keys.len() != cfg.users {
                return Err(Error::invalid(format!(
                    "{} keys provisioned for {} users",
                    keys.len(),
                    cfg.users
                )));
            }
        }

        let salt = derive_seed(seed, "overlay/placement");
        for i in 0..cfg.nodes {
            let address = node_address(i);
            let mut attempt = 0u32;
            loop {
                let label = format!("{address}@{salt:016x}/{attempt}");
                let id = if cfg.bits >= MIN_HASH_BITS {
                    hash_to_ring(label.as_bytes(), cfg.bits)?
                } else {
                    truncated_digest(label.as_bytes(), cfg.bits)
                };
                match overlay.join(NodeRecord::up(id, address.clone())) {
                    Ok(()) => break,
                    Err(Error::Conflict(_)) => attempt += 1,
                    Err(e) => return Err(e),
                }
            }
        }

        let target = Address::new("target");
        let beacons = derive_beacons(&overlay, &target, cfg.beacons)?;
        let mut role_rng = stream(seed, "roles/servlets");
        let avoid = if cfg.disjoint { beacons.clone() } else { BTreeSet::new() };
        let servlets = select_servlets_avoiding(&overlay, &target, cfg.servlets, &avoid, &mut role_rng)?;

        let mut taken = avoid;
        if cfg.disjoint {
            taken.extend(servlets.iter().copied());
        }
        let candidates: Vec<RingId> = overlay
            .live_ids()
            .iter()
            .copied()
            .filter(|id| !taken.contains(id))
            .collect();
        if cfg.soaps > candidates.len() {
            return Err(Error::Infeasible(format!(
                "need {} SOAPs but only {} nodes remain after placing other roles",
                cfg.soaps,
                candidates.len()
            )));
        }
        let mut soap_rng = stream(seed, "roles/soaps");
        let soaps: BTreeSet<RingId> = index::sample(&mut soap_rng, candidates.len(), cfg.soaps)
            .into_iter()
            .map(|i| candidates[i])
            .collect();
        let pool: Vec<RingId> = soaps.iter().copied().collect();

        let mut key_rng = stream(seed, "users/keys");
        let mut credentials = Credentials::default();
        let mut users = Vec::with_capacity(cfg.users);
        let mut user_soaps = BTreeMap::new();
        for u in 0..cfg.users {
            let address = Address::new(format!("user-{u}"));
            let key = match keys {
                Some(keys) => keys[u],
                None => {
                    let mut bytes = [0u8; 32];
                    key_rng.fill_bytes(&mut bytes);
                    AuthKey::from_bytes(bytes)
                }
            };
            let mine: Vec<RingId> = (0..cfg.soaps_per_user)
                .map(|j| pool[(u * cfg.soaps_per_user + j) % pool.len()])
                .collect();
            credentials.provision(address.clone(), target.clone(), key, cfg.replay_window);
            user_soaps.insert(address.clone(), mine.clone());
            users.push(User {
                address,
                key,
                next_nonce: 1,
                soaps: mine,
            });
        }

        let mut leases = LeaseBook::new(target.clone());
        for &s in &servlets {
            leases.grant(s, 0)?;
        }
        let policy = update_filter(&FilterPolicy::new(target.clone()), &servlets, &overlay)?;
        let health = overlay
            .live_ids()
            .iter()
            .map(|&id| (id, NodeHealth::new(cfg.capacity)))
            .collect();

        Ok(World {
            epoch: 0,
            roles: RoleAssignment {
                target: target.clone(),
                soaps,
                beacons,
                servlets,
                user_soaps,
            },
            leases,
            filter: PerimeterFilter::new(policy),
            credentials,
            users,
            attackers: vec![Address::new("attacker-0"), Address::new("attacker-1")],
            health,
            target,
            overlay,
            config: cfg.clone(),
            role_rng,
            route_rng: stream(seed, "routing/walk"),
        })
    }

    /// What an attacker may know: live membership and the target address.
    pub fn attacker_view(&self) -> AttackerView {
        AttackerView {
            epoch: self.epoch,
            target: self.target.clone(),
            up_nodes: self.overlay.live_ids().to_vec(),
            members: self.overlay.nodes().map(|n| n.id).collect(),
            node_capacity: self.health.iter().map(|(&id, h)| (id, h.capacity)).collect(),
            user_addresses: self.users.iter().map(|u| u.address.clone()).collect(),
            own_addresses: self.attackers.clone(),
        }
    }

    pub fn address_of(&self, id: RingId) -> Option<&Address> {
        self.overlay.node(id).map(|n| &n.address)
    }

    /// The active filter allows exactly the current servlets' addresses.
    pub fn filter_consistent(&self) -> bool {
        let expected: BTreeSet<&Address> = self.roles.servlets.iter().filter_map(|&s| self.address_of(s)).collect();
        let allowed: BTreeSet<&Address> = self.filter.active().allowed_sources.iter().collect();
        expected == allowed
    }

    /// True when `user` has a live SOAP, a live beacon and a live leased
    /// servlet.
    pub fn layers_intact(&self, user: usize) -> bool {
        let up = |id: &RingId| self.overlay.is_up(*id);
        self.users[user].soaps.iter().any(up)
            && self.roles.beacons.iter().any(up)
            && self.leases.active().any(|l| up(&l.servlet))
    }
}
