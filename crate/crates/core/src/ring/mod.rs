//! Consistent-hashing ring with finger-table routing.

mod id;
mod overlay;

pub(crate) use id::truncated_digest;
pub use id::{hash_to_ring, IdSpace, RingId, MAX_BITS, MIN_HASH_BITS};
pub use overlay::{FingerTable, Health, Lookup, NodeRecord, Overlay, Walk};

#[cfg(test)]
mod tests;
