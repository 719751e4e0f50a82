//! Single-collection NFT registry, variant pair.
//!
//! Interface (both variants):
//!
//! - `ownerOf(uint256 id) -> address` (zero word for unminted ids)
//! - `approve(address to, uint256 id)`: current owner only
//! - `transferFrom(address from, address to, uint256 id)`: `from` must own
//!   the token and the caller must be `from` or the approved address;
//!   transfer clears the approval.
//!
//! Init takes two raw words: owner then token id, minting one token.
//! Guard precedence is pinned: ownership is checked before authorization.

use alloc::vec::Vec;

use crate::engine::{Behavior, BehaviorResult, Host};
use crate::hash::selector;
use crate::primitives::Word;

use super::layout;
use super::{abi, ERR_BAD_INIT_ARGS, ERR_NOT_AUTHORIZED, ERR_NOT_OWNER, ERR_UNKNOWN_FUNCTION};

fn mint_from_args(host: &mut dyn Host) -> BehaviorResult {
    let calldata = host.env().calldata.clone();
    if calldata.len() < 64 {
        return Err(ERR_BAD_INIT_ARGS.to_vec());
    }
    let mut owner = [0u8; 32];
    owner.copy_from_slice(&calldata[..32]);
    let mut id = [0u8; 32];
    id.copy_from_slice(&calldata[32..64]);
    let slot = layout::nft_owner_slot(host, Word(id));
    host.sstore(slot, Word(owner));
    Ok(Vec::new())
}

pub struct NftA {
    sel_owner_of: [u8; 4],
    sel_approve: [u8; 4],
    sel_transfer_from: [u8; 4],
}

impl NftA {
    pub fn new() -> Self {
        NftA {
            sel_owner_of: selector("ownerOf(uint256)"),
            sel_approve: selector("approve(address,uint256)"),
            sel_transfer_from: selector("transferFrom(address,address,uint256)"),
        }
    }

    fn owner_of(&self, host: &mut dyn Host) -> BehaviorResult {
        let id = abi::arg_word(&host.env().calldata, 0)?;
        let slot = layout::nft_owner_slot(host, id);
        Ok(abi::ret_word(host.sload(slot)))
    }

    fn approve(&self, host: &mut dyn Host) -> BehaviorResult {
        let sender = host.env().sender;
        let to = abi::arg_address(&host.env().calldata, 0)?;
        let id = abi::arg_word(&host.env().calldata, 1)?;
        let owner_slot = layout::nft_owner_slot(host, id);
        if host.sload(owner_slot) != Word::from_address(sender) {
            return Err(ERR_NOT_OWNER.to_vec());
        }
        let approval_slot = layout::nft_approval_slot(host, id);
        host.sstore(approval_slot, Word::from_address(to));
        Ok(Vec::new())
    }

    fn transfer_from(&self, host: &mut dyn Host) -> BehaviorResult {
        let sender = host.env().sender;
        let from = abi::arg_address(&host.env().calldata, 0)?;
        let to = abi::arg_address(&host.env().calldata, 1)?;
        let id = abi::arg_word(&host.env().calldata, 2)?;
        let owner_slot = layout::nft_owner_slot(host, id);
        if host.sload(owner_slot) != Word::from_address(from) {
            return Err(ERR_NOT_OWNER.to_vec());
        }
        let approval_slot = layout::nft_approval_slot(host, id);
        let approved = host.sload(approval_slot).to_address();
        if sender != from && sender != approved {
            return Err(ERR_NOT_AUTHORIZED.to_vec());
        }
        host.sstore(owner_slot, Word::from_address(to));
        host.sstore(approval_slot, Word::ZERO);
        Ok(Vec::new())
    }
}

impl Default for NftA {
    fn default() -> Self {
        Self::new()
    }
}

impl Behavior for NftA {
    fn init(&self, host: &mut dyn Host) -> BehaviorResult {
        mint_from_args(host)
    }

    fn call(&self, host: &mut dyn Host) -> BehaviorResult {
        let mut sel = [0u8; 4];
        sel.copy_from_slice(&host.env().calldata[..4]);
        if sel == self.sel_owner_of {
            self.owner_of(host)
        } else if sel == self.sel_approve {
            self.approve(host)
        } else if sel == self.sel_transfer_from {
            self.transfer_from(host)
        } else {
            Err(ERR_UNKNOWN_FUNCTION.to_vec())
        }
    }
}

pub struct NftB {
    sel_owner_of: [u8; 4],
    sel_approve: [u8; 4],
    sel_transfer_from: [u8; 4],
}

impl NftB {
    pub fn new() -> Self {
        NftB {
            sel_owner_of: selector("ownerOf(uint256)"),
            sel_approve: selector("approve(address,uint256)"),
            sel_transfer_from: selector("transferFrom(address,address,uint256)"),
        }
    }

    /// Both permission slots of one token, loaded together.
    fn record(&self, host: &mut dyn Host, id: Word) -> (Word, Word, Word, Word) {
        let owner_slot = layout::nft_owner_slot(host, id);
        let approval_slot = layout::nft_approval_slot(host, id);
        let owner = host.sload(owner_slot);
        let approved = host.sload(approval_slot);
        (owner_slot, approval_slot, owner, approved)
    }
}

impl Default for NftB {
    fn default() -> Self {
        Self::new()
    }
}

impl Behavior for NftB {
    fn init(&self, host: &mut dyn Host) -> BehaviorResult {
        mint_from_args(host)
    }

    fn call(&self, host: &mut dyn Host) -> BehaviorResult {
        let calldata = host.env().calldata.clone();
        let caller = host.env().sender;
        let mut sel = [0u8; 4];
        sel.copy_from_slice(&calldata[..4]);

        if sel == self.sel_transfer_from {
            let from = abi::arg_address(&calldata, 0)?;
            let to = abi::arg_address(&calldata, 1)?;
            let id = abi::arg_word(&calldata, 2)?;
            let (owner_slot, approval_slot, owner, approved) = self.record(host, id);
            if owner != Word::from_address(from) {
                return Err(ERR_NOT_OWNER.to_vec());
            }
            let permitted = caller == from || Word::from_address(caller) == approved;
            if !permitted {
                return Err(ERR_NOT_AUTHORIZED.to_vec());
            }
            host.sstore(owner_slot, Word::from_address(to));
            if !approved.is_zero() {
                host.sstore(approval_slot, Word::ZERO);
            }
            return Ok(Vec::new());
        }
        if sel == self.sel_approve {
            let delegate = abi::arg_address(&calldata, 0)?;
            let id = abi::arg_word(&calldata, 1)?;
            let (_, approval_slot, owner, _) = self.record(host, id);
            if owner != Word::from_address(caller) {
                return Err(ERR_NOT_OWNER.to_vec());
            }
            host.sstore(approval_slot, Word::from_address(delegate));
            return Ok(Vec::new());
        }
        if sel == self.sel_owner_of {
            let id = abi::arg_word(&calldata, 0)?;
            let slot = layout::nft_owner_slot(host, id);
            return Ok(abi::ret_word(host.sload(slot)));
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
    use crate::primitives::{Address, U256};
    use alloc::vec::Vec;
    use proptest::prelude::*;

    struct NftWorld {
        engine: Engine,
        nft: Address,
        block: u64,
    }

    fn actor(i: usize) -> Address {
        let mut b = [0u8; 20];
        b[0] = 0xB0;
        b[19] = i as u8;
        Address(b)
    }

    impl NftWorld {
        fn new(variant: &str) -> Self {
            let mut engine = Engine::new(GasSchedule::default());
            corpus::register_all(&mut engine);
            let mut init = Vec::new();
            init.extend_from_slice(&Word::from_address(actor(0)).0);
            init.extend_from_slice(&Word::from_u64(7).0);
            let nft = engine.deploy(actor(0), variant, &init).unwrap();
            NftWorld { engine, nft, block: 0 }
        }

        fn send(&mut self, from: Address, data: Vec<u8>) -> Outcome {
            self.block += 1;
            let ctx = CallContext::transaction(
                from,
                self.nft,
                U256::zero(),
                data,
                1_000,
                self.block,
                100_000_000,
            );
            self.engine.call(ctx).unwrap()
        }

        fn owner_of(&mut self, id: u64) -> Word {
            let data = abi::encode_call("ownerOf(uint256)", &[Word::from_u64(id)]);
            let out = self.send(actor(9), data);
            assert!(out.ok);
            let mut w = [0u8; 32];
            w.copy_from_slice(&out.ret_data);
            Word(w)
        }
    }

    fn approve(to: Address, id: u64) -> Vec<u8> {
        abi::encode_call(
            "approve(address,uint256)",
            &[Word::from_address(to), Word::from_u64(id)],
        )
    }

    fn transfer_from(from: Address, to: Address, id: u64) -> Vec<u8> {
        abi::encode_call(
            "transferFrom(address,address,uint256)",
            &[
                Word::from_address(from),
                Word::from_address(to),
                Word::from_u64(id),
            ],
        )
    }

    #[test]
    fn owner_transfers_directly() {
        for variant in ["nft_a", "nft_b"] {
            let mut w = NftWorld::new(variant);
            assert_eq!(w.owner_of(7), Word::from_address(actor(0)), "{variant}");
            assert!(w.send(actor(0), transfer_from(actor(0), actor(1), 7)).ok, "{variant}");
            assert_eq!(w.owner_of(7), Word::from_address(actor(1)), "{variant}");
        }
    }

    #[test]
    fn approval_allows_third_party_transfer_and_clears() {
        for variant in ["nft_a", "nft_b"] {
            let mut w = NftWorld::new(variant);
            assert!(w.send(actor(0), approve(actor(2), 7)).ok, "{variant}");
            assert!(w.send(actor(2), transfer_from(actor(0), actor(3), 7)).ok, "{variant}");
            assert_eq!(w.owner_of(7), Word::from_address(actor(3)), "{variant}");
            // The old approval must not follow the token.
            let out = w.send(actor(2), transfer_from(actor(3), actor(2), 7));
            assert!(!out.ok, "{variant}");
            assert_eq!(out.ret_data, ERR_NOT_AUTHORIZED, "{variant}");
        }
    }

    #[test]
    fn guard_precedence_is_owner_then_authorization() {
        for variant in ["nft_a", "nft_b"] {
            let mut w = NftWorld::new(variant);
            // Wrong from: ownership guard fires even for the real owner.
            let out = w.send(actor(0), transfer_from(actor(1), actor(2), 7));
            assert_eq!(out.ret_data, ERR_NOT_OWNER, "{variant}");
            // Right from, stranger caller: authorization guard fires.
            let out = w.send(actor(4), transfer_from(actor(0), actor(2), 7));
            assert_eq!(out.ret_data, ERR_NOT_AUTHORIZED, "{variant}");
            // Approving as non-owner fails with the ownership message.
            let out = w.send(actor(4), approve(actor(4), 7));
            assert_eq!(out.ret_data, ERR_NOT_OWNER, "{variant}");
        }
    }

    #[test]
    fn unminted_ids_read_as_zero() {
        for variant in ["nft_a", "nft_b"] {
            let mut w = NftWorld::new(variant);
            assert_eq!(w.owner_of(99), Word::ZERO, "{variant}");
        }
    }

    #[derive(Clone, Debug)]
    enum Op {
        Approve(usize, usize),
        TransferFrom(usize, usize, usize),
        OwnerOf,
    }

    fn op_strategy() -> impl Strategy<Value = Op> {
        let idx = 0..4usize;
        prop_oneof![
            (idx.clone(), idx.clone()).prop_map(|(a, b)| Op::Approve(a, b)),
            (idx.clone(), idx.clone(), idx).prop_map(|(a, b, c)| Op::TransferFrom(a, b, c)),
            Just(Op::OwnerOf),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// The variants are observably identical on arbitrary op
        /// sequences over the one minted token.
        #[test]
        fn variants_are_observably_equivalent(ops in proptest::collection::vec(op_strategy(), 0..30)) {
            let mut a = NftWorld::new("nft_a");
            let mut b = NftWorld::new("nft_b");
            for op in &ops {
                let (oa, ob) = match op {
                    Op::Approve(s, to) => (
                        a.send(actor(*s), approve(actor(*to), 7)),
                        b.send(actor(*s), approve(actor(*to), 7)),
                    ),
                    Op::TransferFrom(s, from, to) => (
                        a.send(actor(*s), transfer_from(actor(*from), actor(*to), 7)),
                        b.send(actor(*s), transfer_from(actor(*from), actor(*to), 7)),
                    ),
                    Op::OwnerOf => (Outcome { ok: true, ret_data: a.owner_of(7).0.to_vec(), gas_used: 0 },
                                    Outcome { ok: true, ret_data: b.owner_of(7).0.to_vec(), gas_used: 0 }),
                };
                prop_assert_eq!(oa.ok, ob.ok);
                prop_assert_eq!(&oa.ret_data, &ob.ret_data);
            }
            prop_assert_eq!(
                a.engine.state().state_digest(),
                b.engine.state().state_digest()
            );
        }
    }
}
