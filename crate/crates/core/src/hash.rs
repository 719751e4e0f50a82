//! Keccak-256 and function-selector helpers. Keccak-256 is the only hash
//! used anywhere: storage digests, mapping slots, check hashing, selectors.

use crate::primitives::Word;
use sha3::{Digest, Keccak256};

/// Keccak-256 of an arbitrary byte string.
pub fn keccak256(data: &[u8]) -> Word {
    let mut h = Keccak256::new();
    h.update(data);
    Word(h.finalize().into())
}

/// Keccak-256 over the concatenation of several byte strings, without
/// materializing the joined buffer.
pub fn keccak256_concat(parts: &[&[u8]]) -> Word {
    let mut h = Keccak256::new();
    for p in parts {
        h.update(p);
    }
    Word(h.finalize().into())
}

/// First 4 bytes of Keccak-256 of the canonical signature string, e.g.
/// `"transferFrom(address,address,uint256)"`.
pub fn selector(signature: &str) -> [u8; 4] {
    let w = keccak256(signature.as_bytes());
    [w.0[0], w.0[1], w.0[2], w.0[3]]
}
