use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::error::{Error, Result};
use crate::ring::RingId;

/// Activation handed by the target to a node it picked as servlet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServletLease {
    pub servlet: RingId,
    pub granted_epoch: u64,
    pub active: bool,
}

/// Leases for one target. Beacons of that target read the active entries to
/// learn where to forward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaseBook {
    target: Address,
    leases: Vec<ServletLease>,
}

impl LeaseBook {
    pub fn new(target: Address) -> Self {
        Self {
            target,
            leases: Vec::new(),
        }
    }

    pub fn target(&self) -> &Address {
        &self.target
    }

    pub fn grant(&mut self, servlet: RingId, epoch: u64) -> Result<()> {
        if self.is_active(servlet) {
            return Err(Error::Conflict(format!(
                "servlet {servlet} already holds an active lease for {}",
                self.target
            )));
        }
        self.leases.push(ServletLease {
            servlet,
            granted_epoch: epoch,
            active: true,
        });
        Ok(())
    }

    pub fn revoke(&mut self, servlet: RingId) -> bool {
        let mut any = false;
        for lease in self.leases.iter_mut().filter(|l| l.servlet == servlet && l.active) {
            lease.active = false;
            any = true;
        }
        any
    }

    pub fn is_active(&self, servlet: RingId) -> bool {
        self.leases.iter().any(|l| l.servlet == servlet && l.active)
    }

    /// Active leases in grant order.
    pub fn active(&self) -> impl Iterator<Item = &ServletLease> {
        self.leases.iter().filter(|l| l.active)
    }

    pub fn history(&self) -> &[ServletLease] {
        &self.leases
    }
}
