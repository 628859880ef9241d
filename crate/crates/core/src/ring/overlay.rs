use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::id::{IdSpace, RingId};
use crate::address::Address;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Health {
    Up,
    Down,
    Repairing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: RingId,
    pub address: Address,
    pub health: Health,
}

impl NodeRecord {
    pub fn up(id: RingId, address: Address) -> Self {
        Self {
            id,
            address,
            health: Health::Up,
        }
    }
}

/// Entry `i` is the first live node at or after `id + 2^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingerTable {
    entries: Vec<RingId>,
}

impl FingerTable {
    pub fn entries(&self) -> &[RingId] {
        &self.entries
    }

    pub fn successor(&self) -> RingId {
        self.entries[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lookup {
    pub owner: RingId,
    /// Nodes visited strictly between the start node and the owner.
    pub path: Vec<RingId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub contacted: u64,
    pub endpoint: RingId,
    /// Every node contacted, in order; the last one is the endpoint.
    pub visited: Vec<RingId>,
}

/// Overlay membership with finger tables kept consistent with the live set.
///
/// Only `Up` nodes own keys or appear in finger tables. Every membership or
/// health change rebuilds all finger tables before returning.
#[derive(Debug, Clone)]
pub struct Overlay {
    space: IdSpace,
    nodes: BTreeMap<RingId, NodeRecord>,
    by_address: BTreeMap<Address, RingId>,
    live: Vec<RingId>,
    fingers: BTreeMap<RingId, FingerTable>,
}

impl Overlay {
    pub fn new(bits: u32) -> Result<Self> {
        Ok(Self {
            space: IdSpace::new(bits)?,
            nodes: BTreeMap::new(),
            by_address: BTreeMap::new(),
            live: Vec::new(),
            fingers: BTreeMap::new(),
        })
    }

    pub fn space(&self) -> IdSpace {
        self.space
    }

    pub fn bits(&self) -> u32 {
        self.space.bits()
    }

    /// Number of `Up` nodes.
    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    /// Sorted ids of the `Up` nodes.
    pub fn live_ids(&self) -> &[RingId] {
        &self.live
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeRecord> {
        self.nodes.values()
    }

    pub fn node(&self, id: RingId) -> Option<&NodeRecord> {
        self.nodes.get(&id)
    }

    pub fn node_by_address(&self, address: &Address) -> Option<&NodeRecord> {
        self.by_address.get(address).and_then(|id| self.nodes.get(id))
    }

    pub fn is_up(&self, id: RingId) -> bool {
        matches!(self.nodes.get(&id), Some(n) if n.health == Health::Up)
    }

    pub fn fingers(&self, id: RingId) -> Option<&FingerTable> {
        self.fingers.get(&id)
    }

    pub fn join(&mut self, node: NodeRecord) -> Result<()> {
        if node.id.value() & !self.space.mask() != 0 {
            return Err(Error::invalid(format!(
                "node id {} outside {}-bit ring",
                node.id,
                self.bits()
            )));
        }
        if self.nodes.contains_key(&node.id) {
            return Err(Error::Conflict(format!("node id {} already present", node.id)));
        }
        if self.by_address.contains_key(&node.address) {
            return Err(Error::Conflict(format!("address {} already in use", node.address)));
        }
        self.by_address.insert(node.address.clone(), node.id);
        self.nodes.insert(node.id, node);
        self.rebuild();
        Ok(())
    }

    /// Removes the node from the overlay entirely.
    pub fn leave(&mut self, id: RingId) -> Result<NodeRecord> {
        let node = self
            .nodes
            .remove(&id)
            .ok_or_else(|| Error::NotFound(format!("node {id}")))?;
        self.by_address.remove(&node.address);
        self.rebuild();
        Ok(node)
    }

    /// Marks the node `Down`; it keeps its record and can be repaired.
    pub fn fail(&mut self, id: RingId) -> Result<()> {
        self.set_health(id, Health::Down)
    }

    pub fn set_health(&mut self, id: RingId, health: Health) -> Result<()> {
        let node = self
            .nodes
            .get_mut(&id)
            .ok_or_else(|| Error::NotFound(format!("node {id}")))?;
        let was_up = node.health == Health::Up;
        node.health = health;
        if was_up != (health == Health::Up) {
            self.rebuild();
        }
        Ok(())
    }

    fn rebuild(&mut self) {
        self.live = self
            .nodes
            .values()
            .filter(|n| n.health == Health::Up)
            .map(|n| n.id)
            .collect();
        let mut fingers = BTreeMap::new();
        for &id in &self.live {
            let entries = (0..self.space.bits())
                .map(|i| self.successor_of(self.space.offset_pow2(id, i)))
                .collect();
            fingers.insert(id, FingerTable { entries });
        }
        self.fingers = fingers;
    }

    // First live id at or after `key`, wrapping. Requires a nonempty live set.
    fn successor_of(&self, key: RingId) -> RingId {
        let at = self.live.partition_point(|&id| id < key);
        self.live[at % self.live.len()]
    }

    fn predecessor_of(&self, id: RingId) -> RingId {
        let at = self.live.partition_point(|&x| x < id);
        self.live[(at + self.live.len() - 1) % self.live.len()]
    }

    /// Owner of `key`: the first live node at or clockwise after it.
    pub fn owner_of(&self, key: RingId) -> Result<RingId> {
        if self.live.is_empty() {
            return Err(Error::OverlayEmpty);
        }
        Ok(self.successor_of(key))
    }

    /// Resolves `key` starting from the lowest live node.
    pub fn lookup(&self, key: RingId) -> Result<Lookup> {
        let start = *self.live.first().ok_or(Error::OverlayEmpty)?;
        self.lookup_from(start, key)
    }

    /// Iterative finger-table lookup of `key` starting at `start`.
    pub fn lookup_from(&self, start: RingId, key: RingId) -> Result<Lookup> {
        if self.live.is_empty() {
            return Err(Error::OverlayEmpty);
        }
        if key.value() & !self.space.mask() != 0 {
            return Err(Error::invalid(format!("key {key} outside ring")));
        }
        if !self.is_up(start) {
            return Err(Error::invalid(format!("lookup start {start} is not up")));
        }

        let space = self.space;
        if space.in_arc_closed(key, self.predecessor_of(start), start) {
            return Ok(Lookup {
                owner: start,
                path: Vec::new(),
            });
        }

        let mut path = Vec::new();
        let mut current = start;
        loop {
            let table = &self.fingers[&current];
            let succ = table.successor();
            if space.in_arc_closed(key, current, succ) {
                return Ok(Lookup { owner: succ, path });
            }
            let next = table
                .entries
                .iter()
                .rev()
                .copied()
                .find(|&f| space.in_arc_open(f, current, key))
                .unwrap_or(succ);
            path.push(next);
            current = next;
            debug_assert!(path.len() <= space.bits() as usize);
        }
    }

    /// Forwards to uniformly chosen live nodes (with replacement) until one
    /// in `aware` is contacted.
    pub fn random_walk<R: Rng + ?Sized>(&self, start: RingId, aware: &BTreeSet<RingId>, rng: &mut R) -> Result<Walk> {
        if aware.is_empty() {
            return Err(Error::invalid("random walk needs a nonempty aware set"));
        }
        if let Some(id) = aware.iter().find(|&&id| !self.is_up(id)) {
            return Err(Error::invalid(format!("aware node {id} is not up")));
        }
        if !self.is_up(start) {
            return Err(Error::invalid(format!("walk start {start} is not up")));
        }
        if aware.contains(&start) {
            return Ok(Walk {
                contacted: 0,
                endpoint: start,
                visited: Vec::new(),
            });
        }
        let mut visited = Vec::new();
        loop {
            let next = self.live[rng.random_range(0..self.live.len())];
            visited.push(next);
            if aware.contains(&next) {
                return Ok(Walk {
                    contacted: visited.len() as u64,
                    endpoint: next,
                    visited,
                });
            }
        }
    }
}
