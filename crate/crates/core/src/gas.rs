//! Gas schedule and the per-transaction meter.
//!
//! The schedule is a fixed engine constant, not a chain-accurate price
//! list: absolute numbers only need to reproduce the qualitative cost
//! structure (storage allocation dominates updates, calls and transfers
//! are visible, hashing is cheap).

/// Per-event costs. Immutable for the lifetime of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GasSchedule {
    /// Charged once per transaction entry.
    pub tx_base: u64,
    /// Charged per byte of transaction call data.
    pub per_calldata_byte: u64,
    pub sload: u64,
    /// Storing a non-zero value into a previously zero slot.
    pub sstore_new: u64,
    /// Any other store.
    pub sstore_update: u64,
    /// Entering a nested call frame.
    pub call_base: u64,
    pub hash_base: u64,
    /// Per 32-byte word of hash input, rounded up.
    pub hash_per_word: u64,
    /// Moving native value into a transaction target.
    pub transfer: u64,
}

impl Default for GasSchedule {
    fn default() -> Self {
        GasSchedule {
            tx_base: 21_000,
            per_calldata_byte: 16,
            sload: 100,
            sstore_new: 2_000,
            sstore_update: 500,
            call_base: 700,
            hash_base: 30,
            hash_per_word: 6,
            transfer: 9_000,
        }
    }
}

impl GasSchedule {
    /// Cost of hashing `len` bytes of input.
    pub fn hash_cost(&self, len: usize) -> u64 {
        let words = (len as u64).div_ceil(32);
        self.hash_base + self.hash_per_word * words
    }
}

/// Meter for one transaction. Charges saturate at the limit and set a
/// sticky out-of-gas flag instead of returning errors; the engine checks
/// the flag at frame boundaries so behaviors never observe gas directly.
#[derive(Clone, Copy, Debug)]
pub struct GasMeter {
    limit: u64,
    used: u64,
    exhausted: bool,
}

impl GasMeter {
    pub fn new(limit: u64) -> Self {
        GasMeter { limit, used: 0, exhausted: false }
    }

    pub fn charge(&mut self, amount: u64) {
        let next = self.used.saturating_add(amount);
        if next > self.limit {
            self.used = self.limit;
            self.exhausted = true;
        } else {
            self.used = next;
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn exhausted(&self) -> bool {
        self.exhausted
    }
}
