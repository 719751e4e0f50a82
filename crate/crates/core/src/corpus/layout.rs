//! Pinned storage layout shared by both variants of each pair.
//!
//! Scalar state lives in numbered slots; mapping entries live at
//! Keccak-256(key ‖ base-slot), two-key mappings at
//! Keccak-256(key1 ‖ key2 ‖ base-slot), all values as 32-byte words.
//! Slot derivation goes through the host so the hashing is metered like
//! any other contract hashing.

use crate::engine::Host;
use crate::primitives::{Address, Word};

pub const AUCTION_SELLER: u64 = 0;
pub const AUCTION_NFT: u64 = 1;
pub const AUCTION_NFT_ID: u64 = 2;
pub const AUCTION_END_TIME: u64 = 3;
pub const AUCTION_HIGHEST_BID: u64 = 4;
pub const AUCTION_HIGHEST_BIDDER: u64 = 5;
pub const AUCTION_FINALIZED: u64 = 6;

pub const TOKEN_BALANCES: u64 = 0;
pub const TOKEN_ALLOWANCES: u64 = 1;
pub const TOKEN_SUPPLY: u64 = 2;

pub const NFT_OWNERS: u64 = 0;
pub const NFT_APPROVALS: u64 = 1;

pub fn slot(n: u64) -> Word {
    Word::from_u64(n)
}

pub fn map_slot(host: &mut dyn Host, key: Word, base: u64) -> Word {
    let mut buf = [0u8; 64];
    buf[..32].copy_from_slice(&key.0);
    buf[32..].copy_from_slice(&slot(base).0);
    host.keccak(&buf)
}

pub fn map_slot2(host: &mut dyn Host, key1: Word, key2: Word, base: u64) -> Word {
    let mut buf = [0u8; 96];
    buf[..32].copy_from_slice(&key1.0);
    buf[32..64].copy_from_slice(&key2.0);
    buf[64..].copy_from_slice(&slot(base).0);
    host.keccak(&buf)
}

pub fn balance_slot(host: &mut dyn Host, holder: Address) -> Word {
    map_slot(host, Word::from_address(holder), TOKEN_BALANCES)
}

pub fn allowance_slot(host: &mut dyn Host, owner: Address, spender: Address) -> Word {
    map_slot2(
        host,
        Word::from_address(owner),
        Word::from_address(spender),
        TOKEN_ALLOWANCES,
    )
}

pub fn nft_owner_slot(host: &mut dyn Host, id: Word) -> Word {
    map_slot(host, id, NFT_OWNERS)
}

pub fn nft_approval_slot(host: &mut dyn Host, id: Word) -> Word {
    map_slot(host, id, NFT_APPROVALS)
}
