//! Fungible token ledger, variant pair.
//!
//! Interface (both variants):
//!
//! - `transfer(address to, uint256 amount) -> bool`
//! - `transferFrom(address from, address to, uint256 amount) -> bool`
//! - `approve(address spender, uint256 amount) -> bool`
//! - `balanceOf(address holder) -> uint256`
//! - `allowance(address owner, address spender) -> uint256`
//!
//! Init takes one raw word: the total supply, minted to the deployer.
//! Guard precedence is pinned: `transferFrom` reports a short allowance
//! before a short balance. The pair is intended to be exactly equivalent;
//! zero-amount moves succeed regardless of balances in both.

use alloc::vec::Vec;

use crate::engine::{Behavior, BehaviorResult, Host};
use crate::hash::selector;
use crate::primitives::{Address, Word, U256};

use super::layout::{self, TOKEN_SUPPLY};
use super::{
    abi, ERR_BAD_INIT_ARGS, ERR_INSUFFICIENT_ALLOWANCE, ERR_INSUFFICIENT_BALANCE,
    ERR_UNKNOWN_FUNCTION,
};

fn mint_to_deployer(host: &mut dyn Host) -> BehaviorResult {
    let calldata = host.env().calldata.clone();
    let deployer = host.env().sender;
    if calldata.len() < 32 {
        return Err(ERR_BAD_INIT_ARGS.to_vec());
    }
    let mut supply = [0u8; 32];
    supply.copy_from_slice(&calldata[..32]);
    let supply = Word(supply);
    let holder_slot = layout::balance_slot(host, deployer);
    host.sstore(holder_slot, supply);
    host.sstore(layout::slot(TOKEN_SUPPLY), supply);
    Ok(Vec::new())
}

pub struct TokenA {
    sel_transfer: [u8; 4],
    sel_transfer_from: [u8; 4],
    sel_approve: [u8; 4],
    sel_balance_of: [u8; 4],
    sel_allowance: [u8; 4],
}

impl TokenA {
    pub fn new() -> Self {
        TokenA {
            sel_transfer: selector("transfer(address,uint256)"),
            sel_transfer_from: selector("transferFrom(address,address,uint256)"),
            sel_approve: selector("approve(address,uint256)"),
            sel_balance_of: selector("balanceOf(address)"),
            sel_allowance: selector("allowance(address,address)"),
        }
    }

    fn debit_credit(
        &self,
        host: &mut dyn Host,
        from: Address,
        to: Address,
        amount: U256,
    ) -> BehaviorResult {
        let from_slot = layout::balance_slot(host, from);
        let balance = host.sload(from_slot).to_u256();
        if amount > balance {
            return Err(ERR_INSUFFICIENT_BALANCE.to_vec());
        }
        host.sstore(from_slot, Word::from_u256(balance - amount));
        // Credit re-reads after the debit write so self-transfers conserve.
        let to_slot = layout::balance_slot(host, to);
        let existing = host.sload(to_slot).to_u256();
        host.sstore(to_slot, Word::from_u256(existing + amount));
        Ok(Vec::new())
    }

    fn transfer(&self, host: &mut dyn Host) -> BehaviorResult {
        let sender = host.env().sender;
        let to = abi::arg_address(&host.env().calldata, 0)?;
        let amount = abi::arg_word(&host.env().calldata, 1)?.to_u256();
        self.debit_credit(host, sender, to, amount)?;
        Ok(abi::ret_bool(true))
    }

    fn transfer_from(&self, host: &mut dyn Host) -> BehaviorResult {
        let spender = host.env().sender;
        let from = abi::arg_address(&host.env().calldata, 0)?;
        let to = abi::arg_address(&host.env().calldata, 1)?;
        let amount = abi::arg_word(&host.env().calldata, 2)?.to_u256();
        let grant_slot = layout::allowance_slot(host, from, spender);
        let granted = host.sload(grant_slot).to_u256();
        if amount > granted {
            return Err(ERR_INSUFFICIENT_ALLOWANCE.to_vec());
        }
        host.sstore(grant_slot, Word::from_u256(granted - amount));
        self.debit_credit(host, from, to, amount)?;
        Ok(abi::ret_bool(true))
    }

    fn approve(&self, host: &mut dyn Host) -> BehaviorResult {
        let owner = host.env().sender;
        let spender = abi::arg_address(&host.env().calldata, 0)?;
        let amount = abi::arg_word(&host.env().calldata, 1)?;
        let grant_slot = layout::allowance_slot(host, owner, spender);
        host.sstore(grant_slot, amount);
        Ok(abi::ret_bool(true))
    }

    fn balance_of(&self, host: &mut dyn Host) -> BehaviorResult {
        let holder = abi::arg_address(&host.env().calldata, 0)?;
        let slot = layout::balance_slot(host, holder);
        Ok(abi::ret_word(host.sload(slot)))
    }

    fn allowance(&self, host: &mut dyn Host) -> BehaviorResult {
        let owner = abi::arg_address(&host.env().calldata, 0)?;
        let spender = abi::arg_address(&host.env().calldata, 1)?;
        let slot = layout::allowance_slot(host, owner, spender);
        Ok(abi::ret_word(host.sload(slot)))
    }
}

impl Default for TokenA {
    fn default() -> Self {
        Self::new()
    }
}

impl Behavior for TokenA {
    fn init(&self, host: &mut dyn Host) -> BehaviorResult {
        mint_to_deployer(host)
    }

    fn call(&self, host: &mut dyn Host) -> BehaviorResult {
        let mut sel = [0u8; 4];
        sel.copy_from_slice(&host.env().calldata[..4]);
        if sel == self.sel_transfer {
            self.transfer(host)
        } else if sel == self.sel_transfer_from {
            self.transfer_from(host)
        } else if sel == self.sel_approve {
            self.approve(host)
        } else if sel == self.sel_balance_of {
            self.balance_of(host)
        } else if sel == self.sel_allowance {
            self.allowance(host)
        } else {
            Err(ERR_UNKNOWN_FUNCTION.to_vec())
        }
    }
}

pub struct TokenB {
    sel_transfer: [u8; 4],
    sel_transfer_from: [u8; 4],
    sel_approve: [u8; 4],
    sel_balance_of: [u8; 4],
    sel_allowance: [u8; 4],
}

impl TokenB {
    pub fn new() -> Self {
        TokenB {
            sel_transfer: selector("transfer(address,uint256)"),
            sel_transfer_from: selector("transferFrom(address,address,uint256)"),
            sel_approve: selector("approve(address,uint256)"),
            sel_balance_of: selector("balanceOf(address)"),
            sel_allowance: selector("allowance(address,address)"),
        }
    }

    /// Ledger move with an early zero path. A zero move succeeds without
    /// touching storage, matching the always-passing guards of the full
    /// path.
    fn move_tokens(
        &self,
        host: &mut dyn Host,
        from: Address,
        to: Address,
        amount: U256,
    ) -> Result<(), Vec<u8>> {
        if amount.is_zero() {
            return Ok(());
        }
        let source = layout::balance_slot(host, from);
        let held = host.sload(source).to_u256();
        let remaining = match held.checked_sub(amount) {
            Some(r) => r,
            None => return Err(ERR_INSUFFICIENT_BALANCE.to_vec()),
        };
        host.sstore(source, Word::from_u256(remaining));
        let sink = layout::balance_slot(host, to);
        let pooled = host.sload(sink).to_u256();
        host.sstore(sink, Word::from_u256(pooled + amount));
        Ok(())
    }

    fn read_word(&self, host: &mut dyn Host, slot: Word) -> BehaviorResult {
        Ok(abi::ret_word(host.sload(slot)))
    }
}

impl Default for TokenB {
    fn default() -> Self {
        Self::new()
    }
}

impl Behavior for TokenB {
    fn init(&self, host: &mut dyn Host) -> BehaviorResult {
        mint_to_deployer(host)
    }

    fn call(&self, host: &mut dyn Host) -> BehaviorResult {
        let calldata = host.env().calldata.clone();
        let caller = host.env().sender;
        let mut sel = [0u8; 4];
        sel.copy_from_slice(&calldata[..4]);

        if sel == self.sel_balance_of {
            let holder = abi::arg_address(&calldata, 0)?;
            let slot = layout::balance_slot(host, holder);
            return self.read_word(host, slot);
        }
        if sel == self.sel_allowance {
            let owner = abi::arg_address(&calldata, 0)?;
            let spender = abi::arg_address(&calldata, 1)?;
            let slot = layout::allowance_slot(host, owner, spender);
            return self.read_word(host, slot);
        }
        if sel == self.sel_approve {
            let spender = abi::arg_address(&calldata, 0)?;
            let amount = abi::arg_word(&calldata, 1)?;
            let slot = layout::allowance_slot(host, caller, spender);
            host.sstore(slot, amount);
            return Ok(abi::ret_bool(true));
        }
        if sel == self.sel_transfer {
            let to = abi::arg_address(&calldata, 0)?;
            let amount = abi::arg_word(&calldata, 1)?.to_u256();
            self.move_tokens(host, caller, to, amount)?;
            return Ok(abi::ret_bool(true));
        }
        if sel == self.sel_transfer_from {
            let from = abi::arg_address(&calldata, 0)?;
            let to = abi::arg_address(&calldata, 1)?;
            let amount = abi::arg_word(&calldata, 2)?.to_u256();
            let pact = layout::allowance_slot(host, from, caller);
            let ceiling = host.sload(pact).to_u256();
            let rest = match ceiling.checked_sub(amount) {
                Some(r) => r,
                None => return Err(ERR_INSUFFICIENT_ALLOWANCE.to_vec()),
            };
            self.move_tokens(host, from, to, amount)?;
            host.sstore(pact, Word::from_u256(rest));
            return Ok(abi::ret_bool(true));
        }
        Err(ERR_UNKNOWN_FUNCTION.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::engine::{CallContext, Engine, Outcome};
    use crate::gas::GasSchedule;
    use crate::hash::keccak256;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    const SUPPLY: u64 = 1_000_000;

    struct TokenWorld {
        engine: Engine,
        token: Address,
        block: u64,
    }

    fn actor(i: usize) -> Address {
        let mut b = [0u8; 20];
        b[0] = 0xA0;
        b[19] = i as u8;
        Address(b)
    }

    impl TokenWorld {
        fn new(variant: &str) -> Self {
            let mut engine = Engine::new(GasSchedule::default());
            corpus::register_all(&mut engine);
            let token = engine
                .deploy(actor(0), variant, &Word::from_u64(SUPPLY).0)
                .unwrap();
            TokenWorld { engine, token, block: 0 }
        }

        fn send(&mut self, from: Address, data: Vec<u8>) -> Outcome {
            self.block += 1;
            let ctx = CallContext::transaction(
                from,
                self.token,
                U256::zero(),
                data,
                1_000,
                self.block,
                100_000_000,
            );
            self.engine.call(ctx).unwrap()
        }

        fn balance_of(&mut self, holder: Address) -> U256 {
            let data = abi::encode_call("balanceOf(address)", &[Word::from_address(holder)]);
            let out = self.send(actor(9), data);
            assert!(out.ok);
            let mut w = [0u8; 32];
            w.copy_from_slice(&out.ret_data);
            Word(w).to_u256()
        }
    }

    fn transfer(to: Address, amount: u64) -> Vec<u8> {
        abi::encode_call(
            "transfer(address,uint256)",
            &[Word::from_address(to), Word::from_u64(amount)],
        )
    }

    fn approve(spender: Address, amount: u64) -> Vec<u8> {
        abi::encode_call(
            "approve(address,uint256)",
            &[Word::from_address(spender), Word::from_u64(amount)],
        )
    }

    fn transfer_from(from: Address, to: Address, amount: u64) -> Vec<u8> {
        abi::encode_call(
            "transferFrom(address,address,uint256)",
            &[
                Word::from_address(from),
                Word::from_address(to),
                Word::from_u64(amount),
            ],
        )
    }

    #[test]
    fn transfer_moves_funds_and_returns_true() {
        for variant in ["token_a", "token_b"] {
            let mut w = TokenWorld::new(variant);
            let out = w.send(actor(0), transfer(actor(1), 300));
            assert!(out.ok, "{variant}");
            assert_eq!(out.ret_data, abi::ret_bool(true), "{variant}");
            assert_eq!(w.balance_of(actor(1)), U256::from(300u64), "{variant}");
            assert_eq!(
                w.balance_of(actor(0)),
                U256::from(SUPPLY - 300),
                "{variant}"
            );
        }
    }

    #[test]
    fn overdraft_reverts_with_pinned_message() {
        for variant in ["token_a", "token_b"] {
            let mut w = TokenWorld::new(variant);
            let out = w.send(actor(1), transfer(actor(2), 1));
            assert!(!out.ok, "{variant}");
            assert_eq!(out.ret_data, ERR_INSUFFICIENT_BALANCE, "{variant}");
        }
    }

    #[test]
    fn allowance_guard_precedes_balance_guard() {
        for variant in ["token_a", "token_b"] {
            let mut w = TokenWorld::new(variant);
            // actor 1 has neither balance nor allowance: allowance wins.
            let out = w.send(actor(2), transfer_from(actor(1), actor(3), 5));
            assert_eq!(out.ret_data, ERR_INSUFFICIENT_ALLOWANCE, "{variant}");
            // Granted but unfunded: now the balance guard fires.
            assert!(w.send(actor(1), approve(actor(2), 10)).ok);
            let out = w.send(actor(2), transfer_from(actor(1), actor(3), 5));
            assert_eq!(out.ret_data, ERR_INSUFFICIENT_BALANCE, "{variant}");
        }
    }

    #[test]
    fn transfer_from_decrements_allowance() {
        for variant in ["token_a", "token_b"] {
            let mut w = TokenWorld::new(variant);
            assert!(w.send(actor(0), approve(actor(1), 100)).ok);
            assert!(w.send(actor(1), transfer_from(actor(0), actor(2), 60)).ok);
            let data = abi::encode_call(
                "allowance(address,address)",
                &[Word::from_address(actor(0)), Word::from_address(actor(1))],
            );
            let out = w.send(actor(9), data);
            assert_eq!(out.ret_data, Word::from_u64(40).0.to_vec(), "{variant}");
            assert_eq!(w.balance_of(actor(2)), U256::from(60u64), "{variant}");
        }
    }

    #[test]
    fn self_transfer_conserves_balance() {
        for variant in ["token_a", "token_b"] {
            let mut w = TokenWorld::new(variant);
            assert!(w.send(actor(0), transfer(actor(0), 500)).ok);
            assert_eq!(w.balance_of(actor(0)), U256::from(SUPPLY), "{variant}");
        }
    }

    #[test]
    fn zero_transfer_succeeds_from_empty_account() {
        for variant in ["token_a", "token_b"] {
            let mut w = TokenWorld::new(variant);
            let out = w.send(actor(5), transfer(actor(6), 0));
            assert!(out.ok, "{variant}");
            assert_eq!(out.ret_data, abi::ret_bool(true), "{variant}");
        }
    }

    #[test]
    fn balances_live_at_the_pinned_mapping_slots() {
        let mut w = TokenWorld::new("token_a");
        assert!(w.send(actor(0), transfer(actor(1), 123)).ok);
        let mut preimage = [0u8; 64];
        preimage[..32].copy_from_slice(&Word::from_address(actor(1)).0);
        preimage[32..].copy_from_slice(&Word::from_u64(layout::TOKEN_BALANCES).0);
        let slot = keccak256(&preimage);
        assert_eq!(w.engine.state().sload(w.token, slot), Word::from_u64(123));
    }

    /// One step of the equivalence driver.
    #[derive(Clone, Debug)]
    enum Op {
        Transfer(usize, usize, u64),
        Approve(usize, usize, u64),
        TransferFrom(usize, usize, usize, u64),
    }

    fn op_strategy() -> impl Strategy<Value = Op> {
        let idx = 0..5usize;
        let amt = 0u64..2_000u64;
        prop_oneof![
            (idx.clone(), idx.clone(), amt.clone()).prop_map(|(a, b, v)| Op::Transfer(a, b, v)),
            (idx.clone(), idx.clone(), amt.clone()).prop_map(|(a, b, v)| Op::Approve(a, b, v)),
            (idx.clone(), idx.clone(), idx, amt).prop_map(|(a, b, c, v)| Op::TransferFrom(a, b, c, v)),
        ]
    }

    fn apply(w: &mut TokenWorld, op: &Op) -> Outcome {
        match op {
            Op::Transfer(from, to, amount) => w.send(actor(*from), transfer(actor(*to), *amount)),
            Op::Approve(owner, spender, amount) => {
                w.send(actor(*owner), approve(actor(*spender), *amount))
            }
            Op::TransferFrom(spender, from, to, amount) => w.send(
                actor(*spender),
                transfer_from(actor(*from), actor(*to), *amount),
            ),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// The variants are observably identical on arbitrary op
        /// sequences: same outcomes, same final storage digest.
        #[test]
        fn variants_are_observably_equivalent(ops in proptest::collection::vec(op_strategy(), 0..40)) {
            let mut a = TokenWorld::new("token_a");
            let mut b = TokenWorld::new("token_b");
            for op in &ops {
                let oa = apply(&mut a, op);
                let ob = apply(&mut b, op);
                prop_assert_eq!(oa.ok, ob.ok);
                prop_assert_eq!(&oa.ret_data, &ob.ret_data);
            }
            prop_assert_eq!(
                a.engine.state().state_digest(),
                b.engine.state().state_digest()
            );
        }

        /// Token balances always sum to the fixed supply.
        #[test]
        fn supply_is_conserved(ops in proptest::collection::vec(op_strategy(), 0..40)) {
            for variant in ["token_a", "token_b"] {
                let mut w = TokenWorld::new(variant);
                for op in &ops {
                    apply(&mut w, op);
                }
                let mut total = U256::zero();
                for i in 0..10 {
                    total = total + w.balance_of(actor(i));
                }
                prop_assert_eq!(total, U256::from(SUPPLY));
            }
        }
    }
}
