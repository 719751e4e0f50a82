//! Dissimilar contract corpus for differential testing.
//!
//! Every contract ships as a pair of independently structured variants
//! (`*_a`, `*_b`) that must share one storage layout and one observable
//! interface: byte-identical return payloads, byte-identical revert
//! messages, and the same guard precedence. The pinned messages and the
//! layout live in this module so neither variant drifts; the logic of
//! each variant is written separately and must not be shared.
//!
//! `auction_b` carries two deliberate deviations that give the fuzzer a
//! known-faulty pair member: a rebid tying the standing bid is accepted
//! (variant A requires strictly more), and finalizing a lot nobody bid on
//! skips returning the token to the seller. The token and NFT pairs are
//! intended to be exactly equivalent.

pub mod abi;
pub mod layout;

mod auction;
mod nft;
mod token;

pub use auction::{AuctionA, AuctionB};
pub use nft::{NftA, NftB};
pub use token::{TokenA, TokenB};

use crate::engine::Engine;

pub const ERR_BAD_CALLDATA: &[u8] = b"bad calldata";
pub const ERR_UNKNOWN_FUNCTION: &[u8] = b"unknown function";
pub const ERR_BAD_INIT_ARGS: &[u8] = b"bad init args";

pub const ERR_NOT_SELLER: &[u8] = b"not seller";
pub const ERR_ALREADY_STARTED: &[u8] = b"already started";
pub const ERR_BAD_END_TIME: &[u8] = b"bad end time";
pub const ERR_NOT_STARTED: &[u8] = b"not started";
pub const ERR_AUCTION_ENDED: &[u8] = b"auction ended";
pub const ERR_BID_TOO_LOW: &[u8] = b"bid too low";
pub const ERR_REFUND_FAILED: &[u8] = b"refund failed";
pub const ERR_NOT_ENDED: &[u8] = b"not ended";
pub const ERR_ALREADY_FINALIZED: &[u8] = b"already finalized";
pub const ERR_PAYOUT_FAILED: &[u8] = b"payout failed";

pub const ERR_INSUFFICIENT_BALANCE: &[u8] = b"insufficient balance";
pub const ERR_INSUFFICIENT_ALLOWANCE: &[u8] = b"insufficient allowance";

pub const ERR_NOT_OWNER: &[u8] = b"not owner";
pub const ERR_NOT_AUTHORIZED: &[u8] = b"not authorized";

/// Registers all six corpus behaviors under their canonical names.
pub fn register_all(engine: &mut Engine) {
    engine.register_behavior("auction_a", AuctionA::new());
    engine.register_behavior("auction_b", AuctionB::new());
    engine.register_behavior("token_a", TokenA::new());
    engine.register_behavior("token_b", TokenB::new());
    engine.register_behavior("nft_a", NftA::new());
    engine.register_behavior("nft_b", NftB::new());
}
