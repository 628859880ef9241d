use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Smallest and largest identifier widths accepted by [`hash_to_ring`].
pub const MIN_HASH_BITS: u32 = 8;
pub const MAX_BITS: u32 = 64;

/// Identifier space of `2^bits` positions arranged in a circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IdSpace {
    bits: u32,
}

impl IdSpace {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::invalid(format!(
                "identifier width must be in [1, {MAX_BITS}], got {bits}"
            )));
        }
        Ok(Self { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn mask(self) -> u64 {
        if self.bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.bits) - 1
        }
    }

    /// Number of positions on the ring.
    pub fn size(self) -> u128 {
        1u128 << self.bits
    }

    pub fn id(self, value: u64) -> Result<RingId> {
        if value & !self.mask() != 0 {
            return Err(Error::invalid(format!(
                "ring id {value} does not fit in {} bits",
                self.bits
            )));
        }
        Ok(RingId(value))
    }

    /// Clockwise distance from `from` to `to`.
    pub fn distance(self, from: RingId, to: RingId) -> u64 {
        to.0.wrapping_sub(from.0) & self.mask()
    }

    /// `id + 2^i mod 2^bits`.
    pub fn offset_pow2(self, id: RingId, i: u32) -> RingId {
        debug_assert!(i < self.bits);
        RingId(id.0.wrapping_add(1u64 << i) & self.mask())
    }

    /// True if `x` lies in the half-open arc `(from, to]`. When `from == to`
    /// the arc is the whole ring.
    pub fn in_arc_closed(self, x: RingId, from: RingId, to: RingId) -> bool {
        let span = self.distance(from, to);
        let dx = self.distance(from, x);
        if span == 0 {
            return true;
        }
        dx > 0 && dx <= span
    }

    /// True if `x` lies in the open arc `(from, to)`. When `from == to` the
    /// arc is the whole ring except `from`.
    pub fn in_arc_open(self, x: RingId, from: RingId, to: RingId) -> bool {
        let span = self.distance(from, to);
        let dx = self.distance(from, x);
        if span == 0 {
            return dx > 0;
        }
        dx > 0 && dx < span
    }
}

/// A position on the identifier ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RingId(u64);

impl RingId {
    pub fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for RingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Maps a label onto the ring: the first eight bytes of the SHA-256 digest,
/// read big endian, keeping the top `bits` bits.
pub fn hash_to_ring(label: &[u8], bits: u32) -> Result<RingId> {
    if label.is_empty() {
        return Err(Error::invalid("hash label must be nonempty"));
    }
    if !(MIN_HASH_BITS..=MAX_BITS).contains(&bits) {
        return Err(Error::invalid(format!(
            "hash width must be in [{MIN_HASH_BITS}, {MAX_BITS}], got {bits}"
        )));
    }
    Ok(truncated_digest(label, bits))
}

// Same construction as `hash_to_ring`, but usable on the narrow rings that
// exhaustive tests build.
pub(crate) fn truncated_digest(label: &[u8], bits: u32) -> RingId {
    let digest = Sha256::digest(label);
    let mut prefix = [0u8; 8];
    prefix.copy_from_slice(&digest[..8]);
    let word = u64::from_be_bytes(prefix);
    RingId(if bits == 64 { word } else { word >> (64 - bits) })
}
