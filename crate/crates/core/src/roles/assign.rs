use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::error::{Error, Result};
use crate::ring::{truncated_digest, Overlay, RingId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleAssignment {
    pub target: Address,
    pub soaps: BTreeSet<RingId>,
    pub beacons: BTreeSet<RingId>,
    pub servlets: BTreeSet<RingId>,
    /// SOAPs each user may enter through, in preference order.
    pub user_soaps: BTreeMap<Address, Vec<RingId>>,
}

/// Ring key for beacon `index` of `target`: the hash of `"<target>#<index>"`
/// truncated to the overlay width.
pub fn beacon_key(overlay: &Overlay, target: &Address, index: u32) -> RingId {
    let label = format!("{}#{}", target, index);
    truncated_digest(label.as_bytes(), overlay.bits())
}

/// Beacon `i` is the owner of `beacon_key(target, i)`. Owners are
/// deduplicated, so fewer than `count` beacons may come back.
pub fn derive_beacons(overlay: &Overlay, target: &Address, count: u32) -> Result<BTreeSet<RingId>> {
    if count == 0 {
        return Err(Error::invalid("at least one beacon is required"));
    }
    (0..count)
        .map(|i| overlay.owner_of(beacon_key(overlay, target, i)))
        .collect()
}

/// Uniform random `count`-subset of live nodes, never the target itself.
pub fn select_servlets<R: Rng + ?Sized>(
    overlay: &Overlay,
    target: &Address,
    count: usize,
    rng: &mut R,
) -> Result<BTreeSet<RingId>> {
    select_servlets_avoiding(overlay, target, count, &BTreeSet::new(), rng)
}

/// Like [`select_servlets`] but also skips `avoid`, which the harness uses
/// to keep role layers disjoint.
pub fn select_servlets_avoiding<R: Rng + ?Sized>(
    overlay: &Overlay,
    target: &Address,
    count: usize,
    avoid: &BTreeSet<RingId>,
    rng: &mut R,
) -> Result<BTreeSet<RingId>> {
    let candidates: Vec<RingId> = overlay
        .live_ids()
        .iter()
        .copied()
        .filter(|id| !avoid.contains(id))
        .filter(|&id| overlay.node(id).is_some_and(|n| &n.address != target))
        .collect();
    if count > candidates.len() {
        return Err(Error::Infeasible(format!(
            "need {count} servlets but only {} eligible live nodes",
            candidates.len()
        )));
    }
    Ok(index::sample(rng, candidates.len(), count)
        .into_iter()
        .map(|i| candidates[i])
        .collect())
}
