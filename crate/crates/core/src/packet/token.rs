//! Per-packet admission credentials: an HMAC-SHA256 tag over
//! `(user, target, nonce)` under a key pre-shared between the user and the
//! target's overlay, plus a sliding replay window on the nonce.

use std::collections::BTreeMap;
use std::fmt;

use hmac::{Hmac, KeyInit, Mac};
use sha2::Sha256;

use crate::address::Address;

type HmacSha256 = Hmac<Sha256>;

pub const DEFAULT_REPLAY_WINDOW: u64 = 64;

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct AuthKey([u8; 32]);

impl AuthKey {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Debug for AuthKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AuthKey(..)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthToken {
    pub user: Address,
    pub target: Address,
    pub nonce: u64,
    pub tag: [u8; 32],
}

fn mac_for(user: &Address, target: &Address, nonce: u64, key: &AuthKey) -> HmacSha256 {
    let mut mac = HmacSha256::new_from_slice(key.as_bytes()).expect("hmac accepts any key length");
    for field in [user.as_bytes(), target.as_bytes()] {
        mac.update(&(field.len() as u32).to_be_bytes());
        mac.update(field);
    }
    mac.update(&nonce.to_be_bytes());
    mac
}

pub fn mint_token(user: &Address, target: &Address, key: &AuthKey, nonce: u64) -> AuthToken {
    let tag = mac_for(user, target, nonce, key).finalize().into_bytes();
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&tag);
    AuthToken {
        user: user.clone(),
        target: target.clone(),
        nonce,
        tag: bytes,
    }
}

/// Accepts nonces in `(last_accepted, last_accepted + width]`. Nonces start
/// at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayWindow {
    last_accepted: u64,
    width: u64,
}

impl ReplayWindow {
    pub fn new(width: u64) -> Self {
        Self {
            last_accepted: 0,
            width,
        }
    }

    pub fn last_accepted(&self) -> u64 {
        self.last_accepted
    }
}

impl Default for ReplayWindow {
    fn default() -> Self {
        Self::new(DEFAULT_REPLAY_WINDOW)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenVerdict {
    Valid,
    BadTag,
    Replayed,
    AheadOfWindow,
    UnknownPair,
}

impl TokenVerdict {
    pub fn is_valid(self) -> bool {
        self == TokenVerdict::Valid
    }
}

pub fn verify_token(token: &AuthToken, key: &AuthKey, window: &mut ReplayWindow) -> TokenVerdict {
    let mac = mac_for(&token.user, &token.target, token.nonce, key);
    if mac.verify_slice(&token.tag).is_err() {
        return TokenVerdict::BadTag;
    }
    if token.nonce <= window.last_accepted {
        return TokenVerdict::Replayed;
    }
    if token.nonce - window.last_accepted > window.width {
        return TokenVerdict::AheadOfWindow;
    }
    window.last_accepted = token.nonce;
    TokenVerdict::Valid
}

/// Keys and replay state for every provisioned `(user, target)` pair, as
/// held by the SOAPs.
#[derive(Debug, Clone, Default)]
pub struct Credentials {
    entries: BTreeMap<(Address, Address), (AuthKey, ReplayWindow)>,
}

impl Credentials {
    pub fn provision(&mut self, user: Address, target: Address, key: AuthKey, window: u64) {
        self.entries.insert((user, target), (key, ReplayWindow::new(window)));
    }

    pub fn verify(&mut self, token: &AuthToken) -> TokenVerdict {
        match self.entries.get_mut(&(token.user.clone(), token.target.clone())) {
            Some((key, window)) => verify_token(token, key, window),
            None => TokenVerdict::UnknownPair,
        }
    }
}
