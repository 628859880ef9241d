use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::error::{Error, Result};
use crate::ring::{Overlay, RingId};

/// Source-address allowlist installed around the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterPolicy {
    pub target: Address,
    pub allowed_sources: BTreeSet<Address>,
    pub version: u64,
}

impl FilterPolicy {
    /// Deny-all policy at version 0.
    pub fn new(target: Address) -> Self {
        Self {
            target,
            allowed_sources: BTreeSet::new(),
            version: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterVerdict {
    Pass,
    Drop,
}

pub fn filter_check(policy: &FilterPolicy, outer_source: &Address) -> FilterVerdict {
    if policy.allowed_sources.contains(outer_source) {
        FilterVerdict::Pass
    } else {
        FilterVerdict::Drop
    }
}

/// Next policy version allowing exactly the servlets' addresses.
pub fn update_filter(policy: &FilterPolicy, servlets: &BTreeSet<RingId>, overlay: &Overlay) -> Result<FilterPolicy> {
    let allowed_sources = servlets
        .iter()
        .map(|&id| {
            overlay
                .node(id)
                .map(|n| n.address.clone())
                .ok_or_else(|| Error::NotFound(format!("servlet {id} has no overlay record")))
        })
        .collect::<Result<_>>()?;
    Ok(FilterPolicy {
        target: policy.target.clone(),
        allowed_sources,
        version: policy.version + 1,
    })
}

/// Perimeter routers: the active policy plus updates still propagating.
/// An update issued at epoch `t` with latency `L` governs checks from
/// epoch `t + L` on; until then the previous policy applies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerimeterFilter {
    active: FilterPolicy,
    pending: VecDeque<(u64, FilterPolicy)>,
    epoch: u64,
    passed: u64,
    dropped: u64,
}

impl PerimeterFilter {
    pub fn new(initial: FilterPolicy) -> Self {
        Self {
            active: initial,
            pending: VecDeque::new(),
            epoch: 0,
            passed: 0,
            dropped: 0,
        }
    }

    pub fn active(&self) -> &FilterPolicy {
        &self.active
    }

    /// The most recently issued policy, whether or not it is in force yet.
    pub fn latest(&self) -> &FilterPolicy {
        self.pending.back().map(|(_, p)| p).unwrap_or(&self.active)
    }

    pub fn issue(&mut self, policy: FilterPolicy, latency: u64) {
        let effective = self.epoch + latency;
        self.pending.push_back((effective, policy));
        self.settle();
    }

    pub fn advance_to(&mut self, epoch: u64) {
        self.epoch = epoch;
        self.settle();
    }

    fn settle(&mut self) {
        while let Some((at, _)) = self.pending.front() {
            if *at > self.epoch {
                break;
            }
            let (_, policy) = self.pending.pop_front().expect("front checked");
            self.active = policy;
        }
    }

    pub fn check(&mut self, outer_source: &Address) -> FilterVerdict {
        let verdict = filter_check(&self.active, outer_source);
        match verdict {
            FilterVerdict::Pass => self.passed += 1,
            FilterVerdict::Drop => self.dropped += 1,
        }
        verdict
    }

    pub fn passed(&self) -> u64 {
        self.passed
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }
}
