//! Deterministic contract execution with N-version redundancy.
//!
//! This crate hosts a small, fully deterministic transaction engine for
//! natively implemented contracts, plus the machinery to run every call
//! against several independently written implementations of the same logic
//! and abort the transaction unless all of them agree:
//!
//! - [`state`]: versioned world state (storage slots, balances, code
//!   bindings) with nested snapshots and exact rollback.
//! - [`engine`]: message-call execution, delegate calls, atomicity, and gas
//!   metering over registered native behaviors.
//! - [`checks`]: the check registry; abstract check arguments with a
//!   byte-exact wire encoding, materialized against live call data and
//!   environment at execution time.
//! - [`redundancy`]: the dissimilar-redundancy proxy; per-implementation
//!   sub-execution with result smuggling through revert payloads, unanimity
//!   assertions, and last-implementation persistence.
//! - [`corpus`]: native test contracts (auction, token, NFT) in two
//!   dissimilar variants each, sharing one storage layout; the auction's
//!   B variant carries two deliberately seeded bugs.
//! - [`difffuzz`]: a differential fuzzer generating random transaction
//!   scenarios, with greedy shrinking of divergent cases.
//! - [`gasmeter`]: proxied-vs-standalone cost reports.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature
//! (on by default) is only needed by downstream tooling.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod checks;
pub mod corpus;
pub mod difffuzz;
pub mod engine;
pub mod gas;
pub mod gasmeter;
pub mod hash;
pub mod primitives;
pub mod redundancy;
pub mod state;

pub use engine::{CallContext, Engine, Outcome};
pub use primitives::{Address, Word, U256};
pub use state::WorldState;
