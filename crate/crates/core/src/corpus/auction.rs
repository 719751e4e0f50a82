//! English auction for one escrowed NFT, variant pair.
//!
//! Interface (both variants):
//!
//! - `start(address nft, uint256 id, uint256 end_time)`: seller only,
//!   once; escrows the token from the seller (requires prior approval).
//! - `bid()`: the transaction value is the bid; outbid funds refund the
//!   previous bidder immediately; value stays escrowed at the contract.
//! - `finalize()`: once `end_time` has passed; token to the winner and
//!   proceeds to the seller, or token back to the seller when nobody bid.
//!
//! Variant B deviates deliberately in two places (see module docs):
//! rebids tying the standing bid pass its acceptance test, and an unsold
//! lot is never returned at finalization.

use alloc::vec::Vec;

use crate::engine::{Behavior, BehaviorResult, Host};
use crate::hash::selector;
use crate::primitives::{Address, Word, U256};

use super::abi;
use super::layout::{
    self, AUCTION_END_TIME, AUCTION_FINALIZED, AUCTION_HIGHEST_BID, AUCTION_HIGHEST_BIDDER,
    AUCTION_NFT, AUCTION_NFT_ID, AUCTION_SELLER,
};
use super::{
    ERR_ALREADY_FINALIZED, ERR_ALREADY_STARTED, ERR_AUCTION_ENDED, ERR_BAD_END_TIME,
    ERR_BID_TOO_LOW, ERR_NOT_ENDED, ERR_NOT_SELLER, ERR_NOT_STARTED, ERR_PAYOUT_FAILED,
    ERR_REFUND_FAILED, ERR_UNKNOWN_FUNCTION,
};

fn nft_transfer_calldata(sel: [u8; 4], from: Address, to: Address, id: Word) -> Vec<u8> {
    let mut data = Vec::with_capacity(100);
    data.extend_from_slice(&sel);
    data.extend_from_slice(&Word::from_address(from).0);
    data.extend_from_slice(&Word::from_address(to).0);
    data.extend_from_slice(&id.0);
    data
}

pub struct AuctionA {
    sel_start: [u8; 4],
    sel_bid: [u8; 4],
    sel_finalize: [u8; 4],
    sel_nft_transfer: [u8; 4],
}

impl AuctionA {
    pub fn new() -> Self {
        AuctionA {
            sel_start: selector("start(address,uint256,uint256)"),
            sel_bid: selector("bid()"),
            sel_finalize: selector("finalize()"),
            sel_nft_transfer: selector("transferFrom(address,address,uint256)"),
        }
    }

    fn start(&self, host: &mut dyn Host) -> BehaviorResult {
        let env = host.env();
        let sender = env.sender;
        let me = env.self_address;
        let nft = abi::arg_address(&env.calldata, 0)?;
        let id = abi::arg_word(&env.calldata, 1)?;
        let end = abi::arg_word(&env.calldata, 2)?;
        if Word::from_address(sender) != host.sload(layout::slot(AUCTION_SELLER)) {
            return Err(ERR_NOT_SELLER.to_vec());
        }
        if !host.sload(layout::slot(AUCTION_END_TIME)).is_zero() {
            return Err(ERR_ALREADY_STARTED.to_vec());
        }
        if end.is_zero() {
            return Err(ERR_BAD_END_TIME.to_vec());
        }
        let escrow = nft_transfer_calldata(self.sel_nft_transfer, sender, me, id);
        let (ok, ret) = host.call(nft, U256::zero(), &escrow);
        if !ok {
            return Err(ret);
        }
        host.sstore(layout::slot(AUCTION_NFT), Word::from_address(nft));
        host.sstore(layout::slot(AUCTION_NFT_ID), id);
        host.sstore(layout::slot(AUCTION_END_TIME), end);
        Ok(Vec::new())
    }

    fn bid(&self, host: &mut dyn Host) -> BehaviorResult {
        let now = host.env().block_timestamp;
        let value = host.env().value;
        let sender = host.env().sender;
        let end = host.sload(layout::slot(AUCTION_END_TIME));
        if end.is_zero() {
            return Err(ERR_NOT_STARTED.to_vec());
        }
        if now >= end.to_u64() {
            return Err(ERR_AUCTION_ENDED.to_vec());
        }
        let highest = host.sload(layout::slot(AUCTION_HIGHEST_BID)).to_u256();
        // Strictly more than the standing bid; the zero standing bid
        // makes this the value > 0 gate for the first bid.
        if value <= highest {
            return Err(ERR_BID_TOO_LOW.to_vec());
        }
        let previous = host.sload(layout::slot(AUCTION_HIGHEST_BIDDER)).to_address();
        if !previous.is_zero() && !host.transfer_value(previous, highest) {
            return Err(ERR_REFUND_FAILED.to_vec());
        }
        host.sstore(layout::slot(AUCTION_HIGHEST_BID), Word::from_u256(value));
        host.sstore(layout::slot(AUCTION_HIGHEST_BIDDER), Word::from_address(sender));
        Ok(Vec::new())
    }

    fn finalize(&self, host: &mut dyn Host) -> BehaviorResult {
        let now = host.env().block_timestamp;
        let me = host.env().self_address;
        let end = host.sload(layout::slot(AUCTION_END_TIME));
        if end.is_zero() {
            return Err(ERR_NOT_STARTED.to_vec());
        }
        if now < end.to_u64() {
            return Err(ERR_NOT_ENDED.to_vec());
        }
        if !host.sload(layout::slot(AUCTION_FINALIZED)).is_zero() {
            return Err(ERR_ALREADY_FINALIZED.to_vec());
        }
        host.sstore(layout::slot(AUCTION_FINALIZED), Word::from_u64(1));
        let winner = host.sload(layout::slot(AUCTION_HIGHEST_BIDDER)).to_address();
        let nft = host.sload(layout::slot(AUCTION_NFT)).to_address();
        let id = host.sload(layout::slot(AUCTION_NFT_ID));
        let seller = host.sload(layout::slot(AUCTION_SELLER)).to_address();
        if winner.is_zero() {
            let back = nft_transfer_calldata(self.sel_nft_transfer, me, seller, id);
            let (ok, ret) = host.call(nft, U256::zero(), &back);
            if !ok {
                return Err(ret);
            }
        } else {
            let hand_over = nft_transfer_calldata(self.sel_nft_transfer, me, winner, id);
            let (ok, ret) = host.call(nft, U256::zero(), &hand_over);
            if !ok {
                return Err(ret);
            }
            let proceeds = host.sload(layout::slot(AUCTION_HIGHEST_BID)).to_u256();
            if !host.transfer_value(seller, proceeds) {
                return Err(ERR_PAYOUT_FAILED.to_vec());
            }
        }
        Ok(Vec::new())
    }
}

impl Default for AuctionA {
    fn default() -> Self {
        Self::new()
    }
}

impl Behavior for AuctionA {
    fn init(&self, host: &mut dyn Host) -> BehaviorResult {
        let seller = host.env().sender;
        host.sstore(layout::slot(AUCTION_SELLER), Word::from_address(seller));
        Ok(Vec::new())
    }

    fn call(&self, host: &mut dyn Host) -> BehaviorResult {
        let mut sel = [0u8; 4];
        sel.copy_from_slice(&host.env().calldata[..4]);
        if sel == self.sel_start {
            self.start(host)
        } else if sel == self.sel_bid {
            self.bid(host)
        } else if sel == self.sel_finalize {
            self.finalize(host)
        } else {
            Err(ERR_UNKNOWN_FUNCTION.to_vec())
        }
    }
}

/// Everything the B variant decides from, loaded in one pass.
struct Lot {
    end_time: u64,
    standing: U256,
    holder: Address,
    finalized: bool,
}

pub struct AuctionB {
    sel_start: [u8; 4],
    sel_bid: [u8; 4],
    sel_finalize: [u8; 4],
    sel_nft_transfer: [u8; 4],
}

impl AuctionB {
    pub fn new() -> Self {
        AuctionB {
            sel_start: selector("start(address,uint256,uint256)"),
            sel_bid: selector("bid()"),
            sel_finalize: selector("finalize()"),
            sel_nft_transfer: selector("transferFrom(address,address,uint256)"),
        }
    }

    fn load_lot(&self, host: &mut dyn Host) -> Lot {
        Lot {
            end_time: host.sload(layout::slot(AUCTION_END_TIME)).to_u64(),
            standing: host.sload(layout::slot(AUCTION_HIGHEST_BID)).to_u256(),
            holder: host.sload(layout::slot(AUCTION_HIGHEST_BIDDER)).to_address(),
            finalized: !host.sload(layout::slot(AUCTION_FINALIZED)).is_zero(),
        }
    }

    fn start(&self, host: &mut dyn Host) -> BehaviorResult {
        let env = host.env();
        let caller = env.sender;
        let me = env.self_address;
        let nft = abi::arg_address(&env.calldata, 0)?;
        let id = abi::arg_word(&env.calldata, 1)?;
        let closes = abi::arg_word(&env.calldata, 2)?;
        let registered_seller = host.sload(layout::slot(AUCTION_SELLER)).to_address();
        if caller != registered_seller {
            return Err(ERR_NOT_SELLER.to_vec());
        }
        if self.load_lot(host).end_time != 0 {
            return Err(ERR_ALREADY_STARTED.to_vec());
        }
        if closes.is_zero() {
            return Err(ERR_BAD_END_TIME.to_vec());
        }
        host.sstore(layout::slot(AUCTION_END_TIME), closes);
        host.sstore(layout::slot(AUCTION_NFT_ID), id);
        host.sstore(layout::slot(AUCTION_NFT), Word::from_address(nft));
        let escrow = nft_transfer_calldata(self.sel_nft_transfer, caller, me, id);
        let (ok, ret) = host.call(nft, U256::zero(), &escrow);
        if ok {
            Ok(Vec::new())
        } else {
            Err(ret)
        }
    }

    fn bid(&self, host: &mut dyn Host) -> BehaviorResult {
        let now = host.env().block_timestamp;
        let offer = host.env().value;
        let caller = host.env().sender;
        let lot = self.load_lot(host);
        if lot.end_time == 0 {
            return Err(ERR_NOT_STARTED.to_vec());
        }
        if now >= lot.end_time {
            return Err(ERR_AUCTION_ENDED.to_vec());
        }
        let fresh_lot = lot.holder.is_zero();
        // Deliberate deviation: a rebid tying the standing bid passes.
        let acceptable = if fresh_lot { !offer.is_zero() } else { offer >= lot.standing };
        if !acceptable {
            return Err(ERR_BID_TOO_LOW.to_vec());
        }
        host.sstore(layout::slot(AUCTION_HIGHEST_BIDDER), Word::from_address(caller));
        host.sstore(layout::slot(AUCTION_HIGHEST_BID), Word::from_u256(offer));
        if !fresh_lot && !host.transfer_value(lot.holder, lot.standing) {
            return Err(ERR_REFUND_FAILED.to_vec());
        }
        Ok(Vec::new())
    }

    fn finalize(&self, host: &mut dyn Host) -> BehaviorResult {
        let now = host.env().block_timestamp;
        let me = host.env().self_address;
        let lot = self.load_lot(host);
        if lot.end_time == 0 {
            return Err(ERR_NOT_STARTED.to_vec());
        }
        if now < lot.end_time {
            return Err(ERR_NOT_ENDED.to_vec());
        }
        if lot.finalized {
            return Err(ERR_ALREADY_FINALIZED.to_vec());
        }
        // Deliberate deviation: no unsold branch, so a lot nobody bid on
        // stays parked at the contract.
        if !lot.holder.is_zero() {
            let nft = host.sload(layout::slot(AUCTION_NFT)).to_address();
            let id = host.sload(layout::slot(AUCTION_NFT_ID));
            let seller = host.sload(layout::slot(AUCTION_SELLER)).to_address();
            let hand_over = nft_transfer_calldata(self.sel_nft_transfer, me, lot.holder, id);
            let (ok, ret) = host.call(nft, U256::zero(), &hand_over);
            if !ok {
                return Err(ret);
            }
            if !host.transfer_value(seller, lot.standing) {
                return Err(ERR_PAYOUT_FAILED.to_vec());
            }
        }
        host.sstore(layout::slot(AUCTION_FINALIZED), Word::from_u64(1));
        Ok(Vec::new())
    }
}

impl Default for AuctionB {
    fn default() -> Self {
        Self::new()
    }
}

impl Behavior for AuctionB {
    fn init(&self, host: &mut dyn Host) -> BehaviorResult {
        let seller = host.env().sender;
        host.sstore(layout::slot(AUCTION_SELLER), Word::from_address(seller));
        Ok(Vec::new())
    }

    fn call(&self, host: &mut dyn Host) -> BehaviorResult {
        let mut sel = [0u8; 4];
        sel.copy_from_slice(&host.env().calldata[..4]);
        if sel == self.sel_finalize {
            self.finalize(host)
        } else if sel == self.sel_bid {
            self.bid(host)
        } else if sel == self.sel_start {
            self.start(host)
        } else {
            Err(ERR_UNKNOWN_FUNCTION.to_vec())
        }
    }
}
