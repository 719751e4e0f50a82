//! Per-operation cost accounting: proxied execution against the sum of
//! standalone executions.
//!
//! [`measure`] runs one auction scenario once through the proxy and once
//! per implementation standalone, then lines the runs up into a cost
//! table with one row per canonical operation. Rows are keyed by
//! operation, not transaction index, so the table survives scenarios
//! with rejected filler transactions.

use alloc::string::String;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use crate::difffuzz::{
    replay_standalone, run_scenario, RunReport, Scenario, SetupError, Setup, Step, Verdict,
};

/// Canonical auction operations, in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowLabel {
    Start,
    FirstBid,
    SubsequentBid,
    Finalize,
}

impl RowLabel {
    pub const ALL: [RowLabel; 4] =
        [RowLabel::Start, RowLabel::FirstBid, RowLabel::SubsequentBid, RowLabel::Finalize];
}

impl fmt::Display for RowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowLabel::Start => write!(f, "start"),
            RowLabel::FirstBid => write!(f, "first bid"),
            RowLabel::SubsequentBid => write!(f, "subsequent bid"),
            RowLabel::Finalize => write!(f, "finalize"),
        }
    }
}

/// One operation's cost across all runs.
#[derive(Clone, Debug)]
pub struct CostRow {
    pub label: RowLabel,
    pub proxied_gas: u64,
    /// Same operation in each implementation's standalone run, in
    /// implementation order.
    pub standalone_gas: Vec<u64>,
}

impl CostRow {
    pub fn standalone_total(&self) -> u64 {
        self.standalone_gas.iter().sum()
    }

    /// Gas the redundancy costs on top of running every implementation
    /// separately. Signed so a hypothetical saving would show as negative
    /// rather than vanish.
    pub fn overhead_gas(&self) -> i64 {
        self.proxied_gas as i64 - self.standalone_total() as i64
    }

    /// Overhead relative to the standalone total.
    pub fn overhead_fraction(&self) -> f64 {
        self.overhead_gas() as f64 / self.standalone_total() as f64
    }
}

#[derive(Clone, Debug)]
pub struct CostReport {
    pub implementations: Vec<String>,
    pub rows: Vec<CostRow>,
}

impl CostReport {
    pub fn row(&self, label: RowLabel) -> Option<&CostRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

/// Converts a gas amount to a currency figure given a gas price in
/// nano-units of the native token and the token's currency price.
pub fn gas_to_currency(gas: u64, gas_price_nano: f64, token_price: f64) -> f64 {
    gas as f64 * gas_price_nano * 1e-9 * token_price
}

#[derive(Debug)]
pub enum MeasureError {
    Setup(SetupError),
    /// The proxied run diverged; there is no meaningful cost table.
    Divergent { tx_index: usize },
    /// The scenario never exercised this operation successfully.
    MissingRow(RowLabel),
    /// Not an auction scenario, or its fixtures did not run.
    NotAnAuction,
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureError::Setup(e) => write!(f, "setup failed: {e}"),
            MeasureError::Divergent { tx_index } => {
                write!(f, "scenario diverged at transaction {tx_index}")
            }
            MeasureError::MissingRow(label) => {
                write!(f, "scenario has no successful {label} operation")
            }
            MeasureError::NotAnAuction => write!(f, "cost table requires an auction scenario"),
        }
    }
}

impl core::error::Error for MeasureError {}

impl From<SetupError> for MeasureError {
    fn from(e: SetupError) -> Self {
        MeasureError::Setup(e)
    }
}

/// Three actors; two competing bids, then settlement after close.
pub fn canonical_auction_scenario() -> Scenario {
    Scenario {
        seed: 0,
        actors: 3,
        setup: Setup::Auction { end_offset: 3_600 },
        start_time: 1_000,
        txs: alloc::vec![
            Step::Bid { actor: 1, value: 5 },
            Step::Bid { actor: 2, value: 7 },
            Step::AdvanceTime { seconds: 3_601 },
            Step::Finalize { actor: 1 },
        ],
    }
}

fn gas_at(report: &RunReport, step_index: usize) -> Option<u64> {
    report
        .records
        .iter()
        .find(|r| r.step_index == step_index)
        .map(|r| r.gas_used)
}

/// Builds the cost table for an auction `scenario` over `impls`.
pub fn measure(scenario: &Scenario, impls: &[&str]) -> Result<CostReport, MeasureError> {
    let proxied = run_scenario(scenario, impls)?;
    if let Verdict::Divergent { tx_index, .. } = proxied.verdict {
        return Err(MeasureError::Divergent { tx_index });
    }
    let mut standalones = Vec::with_capacity(impls.len());
    for index in 0..impls.len() {
        standalones.push(replay_standalone(scenario, impls, index)?);
    }

    // Fixture 0 approves the escrow, fixture 1 opens the auction.
    if !matches!(scenario.setup, Setup::Auction { .. }) || proxied.fixtures.len() < 2 {
        return Err(MeasureError::NotAnAuction);
    }
    let mut rows = Vec::new();
    rows.push(CostRow {
        label: RowLabel::Start,
        proxied_gas: proxied.fixtures[1].gas_used,
        standalone_gas: standalones.iter().map(|r| r.fixtures[1].gas_used).collect(),
    });

    let mut bid_steps = proxied.records.iter().filter_map(|r| {
        let is_bid = matches!(scenario.txs.get(r.step_index), Some(Step::Bid { .. }));
        (is_bid && r.ok).then_some(r.step_index)
    });
    let finalize_step = proxied.records.iter().find_map(|r| {
        let is_finalize = matches!(scenario.txs.get(r.step_index), Some(Step::Finalize { .. }));
        (is_finalize && r.ok).then_some(r.step_index)
    });
    let operations = [
        (RowLabel::FirstBid, bid_steps.next()),
        (RowLabel::SubsequentBid, bid_steps.next()),
        (RowLabel::Finalize, finalize_step),
    ];
    for (label, step_index) in operations {
        let step_index = step_index.ok_or(MeasureError::MissingRow(label))?;
        let proxied_gas = gas_at(&proxied, step_index).ok_or(MeasureError::MissingRow(label))?;
        let mut standalone_gas = Vec::with_capacity(standalones.len());
        for report in &standalones {
            standalone_gas
                .push(gas_at(report, step_index).ok_or(MeasureError::MissingRow(label))?);
        }
        rows.push(CostRow { label, proxied_gas, standalone_gas });
    }

    Ok(CostReport {
        implementations: impls.iter().map(|s| s.to_string()).collect(),
        rows,
    })
}
