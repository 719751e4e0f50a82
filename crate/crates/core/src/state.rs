//! Versioned world state: per-address storage slots, native balances, and
//! code bindings, with nested snapshots, commit, and exact rollback.
//!
//! Snapshots form a strict stack mirroring call-frame nesting; only the
//! top frame can be committed or reverted. Reverting restores storage,
//! balances, and bindings bit-identically by undoing a journal. Zero
//! values are never stored: writing the zero word (or a zero balance) is
//! indistinguishable from never writing.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::hash::keccak256_concat;
use crate::primitives::{Address, Word, U256};

/// Identifies a registered native behavior. Bindings are opaque to the
/// state layer; resolution lives in the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CodeId(pub u32);

/// Handle for one open snapshot frame. Monotonically increasing, never
/// reused; consumed exactly once by `revert_to` or `commit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SnapshotId(u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateError {
    /// `revert_to`/`commit` named a snapshot that is not the top of the
    /// stack (already consumed, or a deeper frame).
    NotTopOfStack,
    InsufficientBalance,
}

impl fmt::Display for StateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateError::NotTopOfStack => write!(f, "snapshot is not the top of the stack"),
            StateError::InsufficientBalance => write!(f, "insufficient balance"),
        }
    }
}

impl core::error::Error for StateError {}

enum JournalEntry {
    StorageSet { addr: Address, slot: Word, prev: Word },
    BalanceSet { addr: Address, prev: U256 },
    CodeBound { addr: Address, prev: Option<CodeId> },
}

struct Frame {
    id: SnapshotId,
    entries: Vec<JournalEntry>,
}

/// The world: storage, balances, code bindings, and the snapshot journal.
///
/// Single-writer; instances are independent and share nothing.
#[derive(Default)]
pub struct WorldState {
    // Zero values are elided from both maps as an invariant, so map
    // iteration directly yields the canonical non-zero entries.
    storage: BTreeMap<(Address, Word), Word>,
    balances: BTreeMap<Address, U256>,
    code_bindings: BTreeMap<Address, CodeId>,
    journal: Vec<Frame>,
    next_snapshot: u64,
}

impl WorldState {
    pub fn new() -> Self {
        WorldState::default()
    }

    /// Captures the current state and pushes a frame onto the snapshot
    /// stack. Later writes are journaled against that frame.
    pub fn snapshot(&mut self) -> SnapshotId {
        let id = SnapshotId(self.next_snapshot);
        self.next_snapshot += 1;
        self.journal.push(Frame { id, entries: Vec::new() });
        id
    }

    /// Undoes every change made since `id` and pops the frame. `id` must
    /// be the top of the stack.
    pub fn revert_to(&mut self, id: SnapshotId) -> Result<(), StateError> {
        let frame = self.pop_frame(id)?;
        for entry in frame.entries.into_iter().rev() {
            match entry {
                JournalEntry::StorageSet { addr, slot, prev } => {
                    self.apply_storage(addr, slot, prev);
                }
                JournalEntry::BalanceSet { addr, prev } => {
                    self.apply_balance(addr, prev);
                }
                JournalEntry::CodeBound { addr, prev } => match prev {
                    Some(code) => {
                        self.code_bindings.insert(addr, code);
                    }
                    None => {
                        self.code_bindings.remove(&addr);
                    }
                },
            }
        }
        Ok(())
    }

    /// Makes the frame's changes part of the parent frame and pops it.
    /// `id` must be the top of the stack.
    pub fn commit(&mut self, id: SnapshotId) -> Result<(), StateError> {
        let frame = self.pop_frame(id)?;
        if let Some(parent) = self.journal.last_mut() {
            // The parent inherits the undo log so a later revert of the
            // parent also undoes this frame's writes.
            parent.entries.extend(frame.entries);
        }
        Ok(())
    }

    fn pop_frame(&mut self, id: SnapshotId) -> Result<Frame, StateError> {
        match self.journal.last() {
            Some(top) if top.id == id => Ok(self.journal.pop().expect("top exists")),
            _ => Err(StateError::NotTopOfStack),
        }
    }

    pub fn snapshot_depth(&self) -> usize {
        self.journal.len()
    }

    pub fn sload(&self, addr: Address, slot: Word) -> Word {
        self.storage.get(&(addr, slot)).copied().unwrap_or(Word::ZERO)
    }

    pub fn sstore(&mut self, addr: Address, slot: Word, value: Word) {
        let prev = self.sload(addr, slot);
        if prev == value {
            return;
        }
        if let Some(frame) = self.journal.last_mut() {
            frame.entries.push(JournalEntry::StorageSet { addr, slot, prev });
        }
        self.apply_storage(addr, slot, value);
    }

    fn apply_storage(&mut self, addr: Address, slot: Word, value: Word) {
        if value.is_zero() {
            self.storage.remove(&(addr, slot));
        } else {
            self.storage.insert((addr, slot), value);
        }
    }

    pub fn balance(&self, addr: Address) -> U256 {
        self.balances.get(&addr).copied().unwrap_or_else(U256::zero)
    }

    /// Sets a balance outright. Genesis funding; journaled like any write.
    pub fn set_balance(&mut self, addr: Address, amount: U256) {
        let prev = self.balance(addr);
        if prev == amount {
            return;
        }
        if let Some(frame) = self.journal.last_mut() {
            frame.entries.push(JournalEntry::BalanceSet { addr, prev });
        }
        self.apply_balance(addr, amount);
    }

    fn apply_balance(&mut self, addr: Address, amount: U256) {
        if amount.is_zero() {
            self.balances.remove(&addr);
        } else {
            self.balances.insert(addr, amount);
        }
    }

    /// Moves native value. The sum of all balances is conserved; fails
    /// without any change if `from` cannot cover `amount`.
    pub fn transfer_value(
        &mut self,
        from: Address,
        to: Address,
        amount: U256,
    ) -> Result<(), StateError> {
        if amount.is_zero() || from == to {
            // Still enforce the precondition for an over-draining self-send.
            if self.balance(from) < amount {
                return Err(StateError::InsufficientBalance);
            }
            return Ok(());
        }
        let from_bal = self.balance(from);
        if from_bal < amount {
            return Err(StateError::InsufficientBalance);
        }
        let to_bal = self.balance(to);
        self.set_balance(from, from_bal - amount);
        self.set_balance(to, to_bal + amount);
        Ok(())
    }

    pub fn code_at(&self, addr: Address) -> Option<CodeId> {
        self.code_bindings.get(&addr).copied()
    }

    pub fn bind_code(&mut self, addr: Address, code: CodeId) {
        let prev = self.code_at(addr);
        if let Some(frame) = self.journal.last_mut() {
            frame.entries.push(JournalEntry::CodeBound { addr, prev });
        }
        self.code_bindings.insert(addr, code);
    }

    /// All non-zero storage entries in canonical (address, slot) order.
    pub fn storage_entries(&self) -> impl Iterator<Item = (&(Address, Word), &Word)> {
        self.storage.iter()
    }

    /// All non-zero balances in address order.
    pub fn balance_entries(&self) -> impl Iterator<Item = (&Address, &U256)> {
        self.balances.iter()
    }

    /// Keccak-256 over the canonical serialization: every non-zero storage
    /// entry as address(20) ‖ slot(32) ‖ value(32) in lexicographic entry
    /// order, then every non-zero balance as address(20) ‖ amount(32,
    /// big-endian) in address order. Code bindings do not contribute.
    pub fn state_digest(&self) -> Word {
        let mut parts: Vec<&[u8]> = Vec::with_capacity(self.storage.len() * 3 + self.balances.len() * 2);
        let mut amount_bufs: Vec<[u8; 32]> = Vec::with_capacity(self.balances.len());
        for ((addr, slot), value) in &self.storage {
            parts.push(&addr.0);
            parts.push(&slot.0);
            parts.push(&value.0);
        }
        for (_, amount) in &self.balances {
            let mut buf = [0u8; 32];
            amount.to_big_endian(&mut buf);
            amount_bufs.push(buf);
        }
        for ((addr, _), buf) in self.balances.iter().zip(&amount_bufs) {
            parts.push(&addr.0);
            parts.push(buf);
        }
        keccak256_concat(&parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(b: u8) -> Address {
        Address([b; 20])
    }

    fn w(v: u64) -> Word {
        Word::from_u64(v)
    }

    fn reference_keccak(data: &[u8]) -> [u8; 32] {
        use tiny_keccak::Hasher;
        let mut k = tiny_keccak::Keccak::v256();
        k.update(data);
        let mut out = [0u8; 32];
        k.finalize(&mut out);
        out
    }

    #[test]
    fn snapshot_ids_are_monotone() {
        let mut s = WorldState::new();
        let s1 = s.snapshot();
        let s2 = s.snapshot();
        assert!(s2 > s1);
    }

    #[test]
    fn revert_without_writes_is_identity() {
        let mut s = WorldState::new();
        s.sstore(addr(1), w(0), w(7));
        let before = s.state_digest();
        let id = s.snapshot();
        s.revert_to(id).unwrap();
        assert_eq!(s.state_digest(), before);
    }

    #[test]
    fn revert_restores_default() {
        let mut s = WorldState::new();
        let id = s.snapshot();
        s.sstore(addr(1), w(0), w(7));
        s.revert_to(id).unwrap();
        assert_eq!(s.sload(addr(1), w(0)), Word::ZERO);
    }

    #[test]
    fn nested_revert_keeps_outer_frame_writes() {
        let mut s = WorldState::new();
        let _s1 = s.snapshot();
        s.sstore(addr(1), w(0), w(1));
        let s2 = s.snapshot();
        s.sstore(addr(1), w(0), w(2));
        s.revert_to(s2).unwrap();
        assert_eq!(s.sload(addr(1), w(0)), w(1));
    }

    #[test]
    fn consumed_snapshot_is_rejected() {
        let mut s = WorldState::new();
        let id = s.snapshot();
        s.revert_to(id).unwrap();
        assert_eq!(s.revert_to(id), Err(StateError::NotTopOfStack));
    }

    #[test]
    fn deeper_snapshot_is_rejected() {
        let mut s = WorldState::new();
        let s1 = s.snapshot();
        let _s2 = s.snapshot();
        assert_eq!(s.revert_to(s1), Err(StateError::NotTopOfStack));
        assert_eq!(s.commit(s1), Err(StateError::NotTopOfStack));
    }

    #[test]
    fn revert_restores_balances() {
        let mut s = WorldState::new();
        s.set_balance(addr(1), U256::from(10));
        let id = s.snapshot();
        s.transfer_value(addr(1), addr(2), U256::from(5)).unwrap();
        s.revert_to(id).unwrap();
        assert_eq!(s.balance(addr(1)), U256::from(10));
        assert_eq!(s.balance(addr(2)), U256::zero());
    }

    #[test]
    fn commit_persists_writes() {
        let mut s = WorldState::new();
        let id = s.snapshot();
        s.sstore(addr(1), w(0), w(9));
        s.commit(id).unwrap();
        assert_eq!(s.sload(addr(1), w(0)), w(9));
    }

    #[test]
    fn parent_revert_undoes_committed_child() {
        let mut s = WorldState::new();
        let s1 = s.snapshot();
        s.sstore(addr(1), w(0), w(1));
        let s2 = s.snapshot();
        s.sstore(addr(1), w(1), w(2));
        s.commit(s2).unwrap();
        s.revert_to(s1).unwrap();
        assert_eq!(s.sload(addr(1), w(0)), Word::ZERO);
        assert_eq!(s.sload(addr(1), w(1)), Word::ZERO);
    }

    #[test]
    fn commit_with_no_writes_preserves_digest() {
        let mut s = WorldState::new();
        s.sstore(addr(3), w(1), w(4));
        let before = s.state_digest();
        let id = s.snapshot();
        s.commit(id).unwrap();
        assert_eq!(s.state_digest(), before);
    }

    #[test]
    fn storage_is_per_address() {
        let mut s = WorldState::new();
        s.sstore(addr(1), w(5), w(9));
        assert_eq!(s.sload(addr(2), w(5)), Word::ZERO);
    }

    #[test]
    fn transfer_moves_and_conserves() {
        let mut s = WorldState::new();
        s.set_balance(addr(1), U256::from(10));
        s.transfer_value(addr(1), addr(2), U256::from(4)).unwrap();
        assert_eq!(s.balance(addr(1)), U256::from(6));
        assert_eq!(s.balance(addr(2)), U256::from(4));
    }

    #[test]
    fn transfer_overdraft_fails_without_change() {
        let mut s = WorldState::new();
        s.set_balance(addr(1), U256::from(10));
        let before = s.state_digest();
        assert_eq!(
            s.transfer_value(addr(1), addr(2), U256::from(11)),
            Err(StateError::InsufficientBalance)
        );
        assert_eq!(s.state_digest(), before);
    }

    #[test]
    fn transfer_of_zero_is_noop() {
        let mut s = WorldState::new();
        let before = s.state_digest();
        s.transfer_value(addr(1), addr(2), U256::zero()).unwrap();
        assert_eq!(s.state_digest(), before);
    }

    #[test]
    fn empty_state_digest_is_keccak_of_empty() {
        let s = WorldState::new();
        assert_eq!(s.state_digest().0, reference_keccak(b""));
    }

    #[test]
    fn digest_matches_reference_serialization() {
        let mut s = WorldState::new();
        s.sstore(addr(2), w(1), w(0xbeef));
        s.sstore(addr(1), w(9), w(0xcafe));
        s.set_balance(addr(7), U256::from(42));

        let mut canon = Vec::new();
        // Entries in (address, slot) order regardless of write order.
        canon.extend_from_slice(&[1u8; 20]);
        canon.extend_from_slice(&w(9).0);
        canon.extend_from_slice(&w(0xcafe).0);
        canon.extend_from_slice(&[2u8; 20]);
        canon.extend_from_slice(&w(1).0);
        canon.extend_from_slice(&w(0xbeef).0);
        canon.extend_from_slice(&[7u8; 20]);
        canon.extend_from_slice(&w(42).0);
        assert_eq!(s.state_digest().0, reference_keccak(&canon));
    }

    #[test]
    fn zero_overwrite_equals_empty_state() {
        let mut s = WorldState::new();
        let empty = s.state_digest();
        s.sstore(addr(1), w(0), w(5));
        s.sstore(addr(1), w(0), Word::ZERO);
        assert_eq!(s.state_digest(), empty);
    }

    #[test]
    fn write_order_does_not_change_digest() {
        let mut a = WorldState::new();
        a.sstore(addr(1), w(0), w(1));
        a.sstore(addr(2), w(0), w(2));
        let mut b = WorldState::new();
        b.sstore(addr(2), w(0), w(2));
        b.sstore(addr(1), w(0), w(1));
        assert_eq!(a.state_digest(), b.state_digest());
    }

    #[test]
    fn code_binding_reverts() {
        let mut s = WorldState::new();
        let id = s.snapshot();
        s.bind_code(addr(9), CodeId(3));
        assert_eq!(s.code_at(addr(9)), Some(CodeId(3)));
        s.revert_to(id).unwrap();
        assert_eq!(s.code_at(addr(9)), None);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        #[derive(Clone, Debug)]
        enum Op {
            Store { addr: u8, slot: u8, value: u64 },
            Fund { addr: u8, amount: u64 },
            Transfer { from: u8, to: u8, amount: u64 },
        }

        fn op_strategy() -> impl Strategy<Value = Op> {
            prop_oneof![
                (0u8..4, 0u8..4, 0u64..5).prop_map(|(addr, slot, value)| Op::Store {
                    addr,
                    slot,
                    value
                }),
                (0u8..4, 0u64..50).prop_map(|(addr, amount)| Op::Fund { addr, amount }),
                (0u8..4, 0u8..4, 0u64..50).prop_map(|(from, to, amount)| Op::Transfer {
                    from,
                    to,
                    amount
                }),
            ]
        }

        fn apply(s: &mut WorldState, op: &Op) {
            match *op {
                Op::Store { addr: a, slot, value } => {
                    s.sstore(addr(a), w(slot as u64), w(value))
                }
                Op::Fund { addr: a, amount } => s.set_balance(addr(a), U256::from(amount)),
                Op::Transfer { from, to, amount } => {
                    let _ = s.transfer_value(addr(from), addr(to), U256::from(amount));
                }
            }
        }

        proptest! {
            #[test]
            fn rollback_is_exact(prefix in proptest::collection::vec(op_strategy(), 0..20),
                                 body in proptest::collection::vec(op_strategy(), 0..20)) {
                let mut s = WorldState::new();
                for op in &prefix { apply(&mut s, op); }
                let before = s.state_digest();
                let id = s.snapshot();
                for op in &body { apply(&mut s, op); }
                s.revert_to(id).unwrap();
                prop_assert_eq!(s.state_digest(), before);
            }

            #[test]
            fn commit_is_transparent(prefix in proptest::collection::vec(op_strategy(), 0..20),
                                     body in proptest::collection::vec(op_strategy(), 0..20)) {
                let mut framed = WorldState::new();
                for op in &prefix { apply(&mut framed, op); }
                let id = framed.snapshot();
                for op in &body { apply(&mut framed, op); }
                framed.commit(id).unwrap();

                let mut flat = WorldState::new();
                for op in prefix.iter().chain(&body) { apply(&mut flat, op); }
                prop_assert_eq!(framed.state_digest(), flat.state_digest());
            }

            #[test]
            fn zero_store_is_elided(slots in proptest::collection::vec((0u8..4, 0u8..4), 0..10)) {
                let mut wrote = WorldState::new();
                for &(a, slot) in &slots {
                    wrote.sstore(addr(a), w(slot as u64), Word::ZERO);
                }
                prop_assert_eq!(wrote.state_digest(), WorldState::new().state_digest());
            }

            #[test]
            fn balances_are_conserved(funds in proptest::collection::vec((0u8..4, 1u64..100), 1..4),
                                      moves in proptest::collection::vec((0u8..4, 0u8..4, 0u64..100), 0..30)) {
                let mut s = WorldState::new();
                for &(a, amount) in &funds {
                    s.set_balance(addr(a), U256::from(amount));
                }
                let total = |s: &WorldState| {
                    s.balance_entries().fold(U256::zero(), |acc, (_, v)| acc + *v)
                };
                let before = total(&s);
                for &(from, to, amount) in &moves {
                    let _ = s.transfer_value(addr(from), addr(to), U256::from(amount));
                }
                prop_assert_eq!(total(&s), before);
            }
        }
    }
}
