//! Minimal call encoding: 4-byte selector followed by 32-byte words.
//! Addresses are right-aligned in their word; booleans return as a full
//! word holding 0 or 1.

use alloc::vec::Vec;

use crate::hash::selector;
use crate::primitives::{Address, Word};

use super::ERR_BAD_CALLDATA;

/// Builds calldata for `signature` with word-encoded arguments.
pub fn encode_call(signature: &str, args: &[Word]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + args.len() * 32);
    out.extend_from_slice(&selector(signature));
    for arg in args {
        out.extend_from_slice(&arg.0);
    }
    out
}

/// The `index`-th argument word, or the pinned decode failure.
pub fn arg_word(calldata: &[u8], index: usize) -> Result<Word, Vec<u8>> {
    let start = 4 + index * 32;
    let end = start + 32;
    if calldata.len() < end {
        return Err(ERR_BAD_CALLDATA.to_vec());
    }
    let mut word = [0u8; 32];
    word.copy_from_slice(&calldata[start..end]);
    Ok(Word(word))
}

pub fn arg_address(calldata: &[u8], index: usize) -> Result<Address, Vec<u8>> {
    Ok(arg_word(calldata, index)?.to_address())
}

pub fn ret_word(word: Word) -> Vec<u8> {
    word.0.to_vec()
}

pub fn ret_bool(value: bool) -> Vec<u8> {
    Word::from_u64(value as u64).0.to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::U256;
    use alloc::vec;

    #[test]
    fn encode_call_uses_published_selectors() {
        let data = encode_call("balanceOf(address)", &[Word::from_u64(1)]);
        assert_eq!(&data[..4], &[0x70, 0xa0, 0x82, 0x31]);
        assert_eq!(data.len(), 36);
    }

    #[test]
    fn arg_extraction_round_trips() {
        let a = Word::from_address(Address([0x11; 20]));
        let b = Word::from_u256(U256::from(98765u64));
        let data = encode_call("transfer(address,uint256)", &[a, b]);
        assert_eq!(arg_word(&data, 0).unwrap(), a);
        assert_eq!(arg_address(&data, 0).unwrap(), Address([0x11; 20]));
        assert_eq!(arg_word(&data, 1).unwrap(), b);
    }

    #[test]
    fn short_calldata_yields_pinned_error() {
        let data = encode_call("transfer(address,uint256)", &[Word::ZERO]);
        assert_eq!(arg_word(&data, 1).unwrap_err(), ERR_BAD_CALLDATA.to_vec());
    }

    #[test]
    fn bool_returns_are_full_words() {
        assert_eq!(ret_bool(true), Word::from_u64(1).0.to_vec());
        assert_eq!(ret_bool(false), vec![0u8; 32]);
    }
}
