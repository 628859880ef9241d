use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::error::{Error, Result};
use crate::ring::{NodeRecord, Overlay};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkReport {
    pub nodes: usize,
    pub aware: usize,
    pub walks: u64,
    pub mean_contacted: f64,
    /// Expected contacts for uniform forwarding with replacement: `N / N_s`.
    pub geometric: f64,
    /// The `N * N_s` growth form, reported alongside for comparison.
    pub product_form: f64,
    pub relative_gap: f64,
}

/// Average number of nodes a random walk contacts before reaching one of
/// `aware` servlet-aware nodes, from a start outside the aware set.
pub fn expected_walk_length<R: Rng + ?Sized>(
    nodes: usize,
    aware: usize,
    walks: u64,
    rng: &mut R,
) -> Result<WalkReport> {
    if aware == 0 {
        return Err(Error::invalid("random walk needs at least one aware node"));
    }
    if aware > nodes {
        return Err(Error::invalid(format!("aware ({aware}) exceeds nodes ({nodes})")));
    }
    if walks == 0 {
        return Err(Error::invalid("need at least one walk"));
    }
    let mut overlay = Overlay::new(32)?;
    for i in 0..nodes {
        let id = overlay.space().id(i as u64)?;
        overlay.join(NodeRecord::up(id, Address::new(format!("walk-{i:05}"))))?;
    }
    let ids = overlay.live_ids().to_vec();
    let aware_set: BTreeSet<_> = ids[..aware].iter().copied().collect();
    // With every node aware the walk has nowhere to start from outside the
    // set, and the cost is zero.
    let start = ids.get(aware).copied().unwrap_or(ids[0]);

    let mut total = 0u64;
    for _ in 0..walks {
        total += overlay.random_walk(start, &aware_set, rng)?.contacted;
    }
    let mean = total as f64 / walks as f64;
    let geometric = if aware == nodes {
        0.0
    } else {
        nodes as f64 / aware as f64
    };
    let relative_gap = if geometric == 0.0 {
        mean
    } else {
        (mean - geometric).abs() / geometric
    };
    Ok(WalkReport {
        nodes,
        aware,
        walks,
        mean_contacted: mean,
        geometric,
        product_form: (nodes * aware) as f64,
        relative_gap,
    })
}
