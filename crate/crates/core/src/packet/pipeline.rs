use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::token::AuthToken;
use crate::address::Address;
use crate::ring::RingId;
use crate::roles::FilterVerdict;
use crate::world::World;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routing {
    Chord,
    RandomWalk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeliveryStatus {
    Delivered,
    #[serde(rename = "RejectedAtSOAP")]
    RejectedAtSoap,
    DroppedNodeDown,
    DroppedAtFilter,
    NoRoute,
}

impl DeliveryStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DeliveryStatus::Delivered => "Delivered",
            DeliveryStatus::RejectedAtSoap => "RejectedAtSOAP",
            DeliveryStatus::DroppedNodeDown => "DroppedNodeDown",
            DeliveryStatus::DroppedAtFilter => "DroppedAtFilter",
            DeliveryStatus::NoRoute => "NoRoute",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveryOutcome {
    pub status: DeliveryStatus,
    pub hops: usize,
    pub epoch: u64,
    /// Node at which a `DroppedNodeDown` occurred.
    pub failed_at: Option<RingId>,
}

/// One simulated encapsulation layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncapHeader {
    pub outer_source: Address,
    pub outer_dest: Address,
}

#[derive(Debug, Clone)]
pub struct Packet {
    pub inner_source: Address,
    pub target: Address,
    pub token: AuthToken,
    pub payload_size: u32,
    /// Nonempty exactly while the packet is inside the overlay.
    pub hop_stack: Vec<EncapHeader>,
    pub trace: Vec<RingId>,
    /// Header the packet carried when it reached the perimeter filter.
    pub presented: Option<EncapHeader>,
}

impl Packet {
    pub fn new(inner_source: Address, token: AuthToken, payload_size: u32) -> Self {
        Self {
            inner_source,
            target: token.target.clone(),
            token,
            payload_size,
            hop_stack: Vec::new(),
            trace: Vec::new(),
            presented: None,
        }
    }

    fn rewrite_top(&mut self, from: &Address, to: &Address) {
        let top = self
            .hop_stack
            .last_mut()
            .expect("packet inside the overlay carries a header");
        top.outer_source = from.clone();
        top.outer_dest = to.clone();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Admitted,
    Refused(DeliveryStatus),
}

/// Token check at an overlay entry point. On success the packet is
/// encapsulated with the SOAP as outer source.
pub fn soap_admit(world: &mut World, soap: RingId, packet: &mut Packet) -> Admission {
    if !world.overlay.is_up(soap) {
        return Admission::Refused(DeliveryStatus::DroppedNodeDown);
    }
    if packet.target != world.target || !world.roles.soaps.contains(&soap) {
        return Admission::Refused(DeliveryStatus::NoRoute);
    }
    if !world.credentials.verify(&packet.token).is_valid() {
        return Admission::Refused(DeliveryStatus::RejectedAtSoap);
    }
    let soap_addr = world.address_of(soap).expect("live node has a record").clone();
    packet.hop_stack.push(EncapHeader {
        outer_source: soap_addr,
        outer_dest: world.target.clone(),
    });
    packet.trace.push(soap);
    Admission::Admitted
}

fn outcome(world: &World, packet: &Packet, status: DeliveryStatus, failed_at: Option<RingId>) -> DeliveryOutcome {
    DeliveryOutcome {
        status,
        hops: packet.trace.len(),
        epoch: world.epoch,
        failed_at,
    }
}

/// Carries an admitted packet SOAP -> beacon -> servlet -> filter -> target.
///
/// The SOAP fails over across the target's beacons and the beacon across
/// its leased servlets, taking the first live one in each layer.
pub fn forward_to_delivery(world: &mut World, packet: &mut Packet, routing: Routing) -> DeliveryOutcome {
    let Some(&soap) = packet.trace.first() else {
        return outcome(world, packet, DeliveryStatus::NoRoute, None);
    };
    if packet.hop_stack.is_empty() {
        return outcome(world, packet, DeliveryStatus::NoRoute, None);
    }

    let Some(&first_beacon) = world.roles.beacons.first() else {
        return outcome(world, packet, DeliveryStatus::NoRoute, None);
    };
    let Some(beacon) = world.roles.beacons.iter().copied().find(|&b| world.overlay.is_up(b)) else {
        return outcome(world, packet, DeliveryStatus::DroppedNodeDown, Some(first_beacon));
    };

    let leg: Vec<RingId> = match routing {
        Routing::Chord => {
            let found = world
                .overlay
                .lookup_from(soap, beacon)
                .expect("soap and beacon are live");
            debug_assert_eq!(found.owner, beacon);
            found.path.into_iter().chain(std::iter::once(beacon)).collect()
        }
        Routing::RandomWalk => {
            let aware: BTreeSet<RingId> = world
                .roles
                .beacons
                .iter()
                .copied()
                .filter(|&b| world.overlay.is_up(b))
                .collect();
            let walk = world
                .overlay
                .random_walk(soap, &aware, &mut world.route_rng)
                .expect("soap and beacons are live");
            if walk.visited.is_empty() {
                vec![walk.endpoint]
            } else {
                walk.visited
            }
        }
    };
    let mut here = soap;
    for next in leg {
        let from = world.address_of(here).expect("record").clone();
        let to = world.address_of(next).expect("record").clone();
        packet.rewrite_top(&from, &to);
        packet.trace.push(next);
        here = next;
    }

    let leased: Vec<RingId> = world.leases.active().map(|l| l.servlet).collect();
    let Some(&first_servlet) = leased.first() else {
        return outcome(world, packet, DeliveryStatus::NoRoute, None);
    };
    let Some(servlet) = leased.iter().copied().find(|&s| world.overlay.is_up(s)) else {
        return outcome(world, packet, DeliveryStatus::DroppedNodeDown, Some(first_servlet));
    };
    let beacon_addr = world.address_of(here).expect("record").clone();
    let servlet_addr = world.address_of(servlet).expect("record").clone();
    packet.rewrite_top(&beacon_addr, &servlet_addr);
    packet.trace.push(servlet);

    let target = world.target.clone();
    packet.rewrite_top(&servlet_addr, &target);
    let presented = packet.hop_stack.last().cloned().expect("header present");
    let verdict = world.filter.check(&presented.outer_source);
    packet.presented = Some(presented);
    match verdict {
        FilterVerdict::Pass => {
            packet.hop_stack.pop();
            outcome(world, packet, DeliveryStatus::Delivered, None)
        }
        FilterVerdict::Drop => outcome(world, packet, DeliveryStatus::DroppedAtFilter, None),
    }
}

/// A packet sent straight at the target with the given source address,
/// bypassing the overlay.
pub fn direct_attack_packet(world: &mut World, source: &Address) -> DeliveryOutcome {
    let status = match world.filter.check(source) {
        FilterVerdict::Pass => DeliveryStatus::Delivered,
        FilterVerdict::Drop => DeliveryStatus::DroppedAtFilter,
    };
    DeliveryOutcome {
        status,
        hops: 0,
        epoch: world.epoch,
        failed_at: None,
    }
}
