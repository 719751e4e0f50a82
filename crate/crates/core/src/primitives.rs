//! Fixed-width value types shared by every layer: 32-byte words, 20-byte
//! addresses, and 256-bit amounts.

use core::fmt;

pub use primitive_types::U256;

/// A 32-byte storage/argument cell. The default value is all-zero, and an
/// all-zero word is indistinguishable from an unwritten one.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub [u8; 32]);

/// A 20-byte account identity.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address(pub [u8; 20]);

impl Word {
    pub const ZERO: Word = Word([0u8; 32]);

    pub fn is_zero(&self) -> bool {
        self.0 == [0u8; 32]
    }

    /// u64 right-aligned in the word (big-endian).
    pub fn from_u64(v: u64) -> Word {
        let mut w = [0u8; 32];
        w[24..].copy_from_slice(&v.to_be_bytes());
        Word(w)
    }

    pub fn from_u256(v: U256) -> Word {
        let mut w = [0u8; 32];
        v.to_big_endian(&mut w);
        Word(w)
    }

    /// Address right-aligned in the word (12 zero bytes, then 20 bytes).
    pub fn from_address(a: Address) -> Word {
        let mut w = [0u8; 32];
        w[12..].copy_from_slice(&a.0);
        Word(w)
    }

    pub fn to_u256(&self) -> U256 {
        U256::from_big_endian(&self.0)
    }

    /// Interprets the low 8 bytes as a big-endian u64; higher bytes are
    /// ignored, matching how right-aligned u64 arguments are read back.
    pub fn to_u64(&self) -> u64 {
        let mut b = [0u8; 8];
        b.copy_from_slice(&self.0[24..]);
        u64::from_be_bytes(b)
    }

    /// The low 20 bytes as an address.
    pub fn to_address(&self) -> Address {
        let mut a = [0u8; 20];
        a.copy_from_slice(&self.0[12..]);
        Address(a)
    }
}

impl Address {
    pub const ZERO: Address = Address([0u8; 20]);

    pub fn is_zero(&self) -> bool {
        self.0 == [0u8; 20]
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }
}

impl From<[u8; 32]> for Word {
    fn from(b: [u8; 32]) -> Word {
        Word(b)
    }
}

impl From<[u8; 20]> for Address {
    fn from(b: [u8; 20]) -> Address {
        Address(b)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x")?;
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x")?;
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
