//! Differential fuzzing of variant pairs behind the redundancy proxy.
//!
//! A [`Scenario`] is a fully deterministic world recipe: funded actors,
//! one subject contract (a proxy over the given implementations, or one
//! implementation standalone for replay), fixture transactions, and a
//! step list. Running a scenario proxied yields a [`Verdict`]: the run is
//! divergent exactly when some transaction reverts with one of the
//! proxy's fixed mismatch messages. Divergent scenarios shrink to a
//! minimal form that still reproduces the same mismatch kind.
//!
//! Worlds deploy in a pinned order (infrastructure, implementations,
//! subject last) so the proxied world and every standalone replay place
//! the subject at the same deterministic address; state digests are then
//! directly comparable across runs.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::checks::{AbstractArgument, EnvKind};
use crate::corpus::{self, abi};
use crate::engine::{CallContext, Engine, EngineError, Outcome};
use crate::gas::GasSchedule;
use crate::hash::selector;
use crate::primitives::{Address, Word, U256};
use crate::redundancy::{
    self, DelegateProbe, ProxyError, MSG_CHECKS_MISMATCH, MSG_DATA_MISMATCH, MSG_SUCCESS_MISMATCH,
};

const ACTOR_FUNDS: u64 = 10_000_000;
const SCENARIO_GAS_LIMIT: u64 = 100_000_000;
const AUCTION_NFT_ID: u64 = 1;

/// Deterministic externally-owned account for actor `i`.
pub fn actor_address(i: usize) -> Address {
    let mut bytes = [0u8; 20];
    bytes[0] = 0xAC;
    bytes[18..20].copy_from_slice(&(i as u16).to_be_bytes());
    Address(bytes)
}

/// Which contract family a scenario exercises and how it is seeded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Setup {
    /// NFT auction: actor 0 is the seller; an NFT is minted, approved,
    /// and the auction opened as fixtures before the steps run.
    Auction { end_offset: u64 },
    /// Fungible token with `supply` minted to actor 0 at deployment.
    Token { supply: u64 },
}

/// One scripted transaction (or clock move) against the subject.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Bid { actor: usize, value: u64 },
    Finalize { actor: usize },
    AdvanceTime { seconds: u64 },
    Transfer { actor: usize, to: usize, amount: u64 },
    Approve { actor: usize, spender: usize, amount: u64 },
    TransferFrom { actor: usize, from: usize, to: usize, amount: u64 },
}

impl Step {
    fn value_mut(&mut self) -> Option<&mut u64> {
        match self {
            Step::Bid { value, .. } => Some(value),
            Step::Transfer { amount, .. }
            | Step::Approve { amount, .. }
            | Step::TransferFrom { amount, .. } => Some(amount),
            Step::Finalize { .. } | Step::AdvanceTime { .. } => None,
        }
    }

    fn actor_slots_mut(&mut self) -> Vec<&mut usize> {
        match self {
            Step::Bid { actor, .. } | Step::Finalize { actor } => alloc::vec![actor],
            Step::AdvanceTime { .. } => Vec::new(),
            Step::Transfer { actor, to, .. } => alloc::vec![actor, to],
            Step::Approve { actor, spender, .. } => alloc::vec![actor, spender],
            Step::TransferFrom { actor, from, to, .. } => alloc::vec![actor, from, to],
        }
    }
}

/// A reproducible world recipe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub seed: u64,
    pub actors: usize,
    pub setup: Setup,
    pub start_time: u64,
    pub txs: Vec<Step>,
}

/// Scenario family for generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// Random bids, optionally closed by a time jump and one finalize.
    AuctionBids { finalize: bool },
    /// Random transfer/approve/transferFrom traffic.
    Token,
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub family: Family,
    pub min_actors: usize,
    pub max_actors: usize,
    pub max_txs: usize,
    pub max_value: u64,
}

impl GenConfig {
    pub fn auction_bids(finalize: bool) -> Self {
        GenConfig {
            family: Family::AuctionBids { finalize },
            min_actors: 2,
            max_actors: 4,
            max_txs: 8,
            max_value: 8,
        }
    }

    pub fn token() -> Self {
        GenConfig {
            family: Family::Token,
            min_actors: 3,
            max_actors: 5,
            max_txs: 10,
            max_value: 200,
        }
    }
}

fn pick(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    // Modulo bias is irrelevant at these tiny bounds.
    rng.next_u64() % bound
}

/// Derives the scenario for `seed` under `config`. Same inputs, same
/// scenario, always.
pub fn generate(seed: u64, config: &GenConfig) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = (config.max_actors - config.min_actors + 1) as u64;
    let actors = config.min_actors + pick(&mut rng, span) as usize;
    let start_time = 1_000;
    let mut txs = Vec::new();
    let setup = match config.family {
        Family::AuctionBids { finalize } => {
            let end_offset = 3_600;
            let bids = pick(&mut rng, config.max_txs as u64 + 1) as usize;
            for _ in 0..bids {
                txs.push(Step::Bid {
                    actor: pick(&mut rng, actors as u64) as usize,
                    value: pick(&mut rng, config.max_value + 1),
                });
            }
            if finalize {
                txs.push(Step::AdvanceTime { seconds: end_offset + 1 });
                txs.push(Step::Finalize { actor: pick(&mut rng, actors as u64) as usize });
            }
            Setup::Auction { end_offset }
        }
        Family::Token => {
            let supply = 1_000 + pick(&mut rng, 9_000);
            let count = pick(&mut rng, config.max_txs as u64 + 1) as usize;
            for _ in 0..count {
                let actor = pick(&mut rng, actors as u64) as usize;
                let other = pick(&mut rng, actors as u64) as usize;
                let amount = pick(&mut rng, config.max_value + 1);
                match pick(&mut rng, 3) {
                    0 => txs.push(Step::Transfer { actor, to: other, amount }),
                    1 => txs.push(Step::Approve { actor, spender: other, amount }),
                    _ => {
                        let third = pick(&mut rng, actors as u64) as usize;
                        txs.push(Step::TransferFrom { actor, from: other, to: third, amount });
                    }
                }
            }
            Setup::Token { supply }
        }
    };
    Scenario { seed, actors, setup, start_time, txs }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MismatchKind {
    Success,
    Data,
    Checks,
}

impl fmt::Display for MismatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MismatchKind::Success => write!(f, "success"),
            MismatchKind::Data => write!(f, "data"),
            MismatchKind::Checks => write!(f, "checks"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Divergent { tx_index: usize, kind: MismatchKind, message: Vec<u8> },
}

impl Verdict {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Verdict::Divergent { .. })
    }
}

/// One executed transaction of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxRecord {
    pub step_index: usize,
    pub ok: bool,
    pub ret_data: Vec<u8>,
    pub gas_used: u64,
    pub digest_before: Option<Word>,
    pub digest_after: Option<Word>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub verdict: Verdict,
    /// Setup transactions executed by the world builder, in order.
    pub fixtures: Vec<TxRecord>,
    /// Scenario transactions, in step order (time moves excluded).
    pub records: Vec<TxRecord>,
    pub final_digest: Word,
}

#[derive(Debug)]
pub enum SetupError {
    Deploy(EngineError),
    Proxy(ProxyError),
    /// A fixture transaction failed; carries its name and revert payload.
    Fixture(&'static str, Vec<u8>),
    Call(EngineError),
}

impl fmt::Display for SetupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetupError::Deploy(e) => write!(f, "deployment failed: {e}"),
            SetupError::Proxy(e) => write!(f, "proxy setup failed: {e}"),
            SetupError::Fixture(name, _) => write!(f, "fixture transaction {name:?} reverted"),
            SetupError::Call(e) => write!(f, "transaction rejected: {e}"),
        }
    }
}

impl core::error::Error for SetupError {}

/// Options for one run.
pub struct RunOptions {
    /// Record the state digest around every scenario transaction.
    pub record_digests: bool,
    /// Observer for per-implementation delegate frames.
    pub probe: Option<Box<dyn FnMut(&DelegateProbe)>>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { record_digests: false, probe: None }
    }
}

struct World {
    engine: Engine,
    subject: Address,
    clock: u64,
    block: u64,
    fixtures: Vec<TxRecord>,
}

impl World {
    fn transact(
        &mut self,
        sender: Address,
        target: Address,
        value: u64,
        data: Vec<u8>,
    ) -> Result<Outcome, EngineError> {
        self.block += 1;
        let ctx = CallContext::transaction(
            sender,
            target,
            U256::from(value),
            data,
            self.clock,
            self.block,
            SCENARIO_GAS_LIMIT,
        );
        self.engine.call(ctx)
    }

    fn fixture(
        &mut self,
        name: &'static str,
        sender: Address,
        target: Address,
        data: Vec<u8>,
    ) -> Result<(), SetupError> {
        let out = self.transact(sender, target, 0, data).map_err(SetupError::Call)?;
        if !out.ok {
            return Err(SetupError::Fixture(name, out.ret_data));
        }
        self.fixtures.push(TxRecord {
            step_index: self.fixtures.len(),
            ok: out.ok,
            ret_data: out.ret_data,
            gas_used: out.gas_used,
            digest_before: None,
            digest_after: None,
        });
        Ok(())
    }
}

/// Builds the world for `scenario`. `standalone` of `None` places a proxy
/// over all `impls` as the subject; `Some(i)` deploys `impls[i]` alone in
/// the proxy's deploy slot, giving a replay world whose subject address,
/// block numbering, and fixtures match the proxied world exactly.
fn build_world(
    scenario: &Scenario,
    impls: &[&str],
    standalone: Option<usize>,
) -> Result<World, SetupError> {
    let mut engine = Engine::new(GasSchedule::default());
    corpus::register_all(&mut engine);
    for i in 0..scenario.actors {
        engine
            .state_mut()
            .set_balance(actor_address(i), U256::from(ACTOR_FUNDS));
    }
    let deployer = actor_address(0);

    match scenario.setup {
        Setup::Auction { end_offset } => {
            let mut nft_init = Vec::with_capacity(64);
            nft_init.extend_from_slice(&Word::from_address(deployer).0);
            nft_init.extend_from_slice(&Word::from_u64(AUCTION_NFT_ID).0);
            let nft = engine
                .deploy(deployer, "nft_a", &nft_init)
                .map_err(SetupError::Deploy)?;
            let mut impl_addrs = Vec::with_capacity(impls.len());
            for name in impls {
                impl_addrs.push(engine.deploy(deployer, name, &[]).map_err(SetupError::Deploy)?);
            }
            let subject = match standalone {
                None => redundancy::deploy_proxy(&mut engine, deployer, impl_addrs, &[])
                    .map_err(SetupError::Proxy)?,
                Some(i) => engine.deploy(deployer, impls[i], &[]).map_err(SetupError::Deploy)?,
            };
            if standalone.is_none() {
                // After finalize, the escrowed token's owner must agree.
                let encoded = crate::checks::encode_abstract(
                    selector("ownerOf(uint256)"),
                    &[AbstractArgument::Static(Word::from_u64(AUCTION_NFT_ID).0.to_vec())],
                )
                .expect("static id fits the wire format");
                redundancy::register_check(&mut engine, subject, selector("finalize()"), nft, &encoded)
                    .map_err(SetupError::Proxy)?;
            }
            let mut world = World {
                engine,
                subject,
                clock: scenario.start_time,
                block: 0,
                fixtures: Vec::new(),
            };
            let approve = abi::encode_call(
                "approve(address,uint256)",
                &[Word::from_address(subject), Word::from_u64(AUCTION_NFT_ID)],
            );
            world.fixture("nft approve", deployer, nft, approve)?;
            let start = abi::encode_call(
                "start(address,uint256,uint256)",
                &[
                    Word::from_address(nft),
                    Word::from_u64(AUCTION_NFT_ID),
                    Word::from_u64(scenario.start_time + end_offset),
                ],
            );
            world.fixture("auction start", deployer, subject, start)?;
            Ok(world)
        }
        Setup::Token { supply } => {
            let init = Word::from_u64(supply).0;
            let mut impl_addrs = Vec::with_capacity(impls.len());
            for name in impls {
                impl_addrs.push(engine.deploy(deployer, name, &init).map_err(SetupError::Deploy)?);
            }
            let subject = match standalone {
                None => redundancy::deploy_proxy(&mut engine, deployer, impl_addrs, &init)
                    .map_err(SetupError::Proxy)?,
                Some(i) => engine.deploy(deployer, impls[i], &init).map_err(SetupError::Deploy)?,
            };
            if standalone.is_none() {
                for (for_sig, encoded) in standard_token_checks() {
                    redundancy::register_check(
                        &mut engine,
                        subject,
                        selector(for_sig),
                        subject,
                        &encoded,
                    )
                    .map_err(SetupError::Proxy)?;
                }
            }
            Ok(World {
                engine,
                subject,
                clock: scenario.start_time,
                block: 0,
                fixtures: Vec::new(),
            })
        }
    }
}

/// The canonical token check set: after `transferFrom`, both balances and
/// the remaining allowance must agree.
pub fn standard_token_checks() -> Vec<(&'static str, Vec<u8>)> {
    let tf = "transferFrom(address,address,uint256)";
    let balance_of = selector("balanceOf(address)");
    let allowance = selector("allowance(address,address)");
    let from_balance = crate::checks::encode_abstract(
        balance_of,
        &[AbstractArgument::CallData { offset: 4, length: 32 }],
    )
    .expect("fits the wire format");
    let to_balance = crate::checks::encode_abstract(
        balance_of,
        &[AbstractArgument::CallData { offset: 36, length: 32 }],
    )
    .expect("fits the wire format");
    let rest_allowance = crate::checks::encode_abstract(
        allowance,
        &[
            AbstractArgument::CallData { offset: 4, length: 32 },
            AbstractArgument::Env(EnvKind::Sender),
        ],
    )
    .expect("fits the wire format");
    alloc::vec![(tf, from_balance), (tf, to_balance), (tf, rest_allowance)]
}

fn materialize_step(subject: Address, step: &Step) -> (Address, Address, u64, Vec<u8>) {
    match *step {
        Step::Bid { actor, value } => {
            (actor_address(actor), subject, value, abi::encode_call("bid()", &[]))
        }
        Step::Finalize { actor } => {
            (actor_address(actor), subject, 0, abi::encode_call("finalize()", &[]))
        }
        Step::Transfer { actor, to, amount } => (
            actor_address(actor),
            subject,
            0,
            abi::encode_call(
                "transfer(address,uint256)",
                &[Word::from_address(actor_address(to)), Word::from_u64(amount)],
            ),
        ),
        Step::Approve { actor, spender, amount } => (
            actor_address(actor),
            subject,
            0,
            abi::encode_call(
                "approve(address,uint256)",
                &[Word::from_address(actor_address(spender)), Word::from_u64(amount)],
            ),
        ),
        Step::TransferFrom { actor, from, to, amount } => (
            actor_address(actor),
            subject,
            0,
            abi::encode_call(
                "transferFrom(address,address,uint256)",
                &[
                    Word::from_address(actor_address(from)),
                    Word::from_address(actor_address(to)),
                    Word::from_u64(amount),
                ],
            ),
        ),
        Step::AdvanceTime { .. } => unreachable!("time moves are not transactions"),
    }
}

fn mismatch_kind(outcome: &Outcome) -> Option<MismatchKind> {
    if outcome.ok {
        return None;
    }
    if outcome.ret_data == MSG_SUCCESS_MISMATCH {
        Some(MismatchKind::Success)
    } else if outcome.ret_data == MSG_DATA_MISMATCH {
        Some(MismatchKind::Data)
    } else if outcome.ret_data == MSG_CHECKS_MISMATCH {
        Some(MismatchKind::Checks)
    } else {
        None
    }
}

fn drive(
    scenario: &Scenario,
    impls: &[&str],
    standalone: Option<usize>,
    options: RunOptions,
) -> Result<RunReport, SetupError> {
    let mut world = build_world(scenario, impls, standalone)?;
    if let Some(probe) = options.probe {
        world.engine.set_delegate_probe(Some(probe));
    }
    let mut records = Vec::new();
    let mut verdict = Verdict::Consistent;
    for (index, step) in scenario.txs.iter().enumerate() {
        if let Step::AdvanceTime { seconds } = step {
            world.clock += seconds;
            continue;
        }
        let (sender, target, value, data) = materialize_step(world.subject, step);
        let digest_before = options
            .record_digests
            .then(|| world.engine.state().state_digest());
        let out = world
            .transact(sender, target, value, data)
            .map_err(SetupError::Call)?;
        let digest_after = options
            .record_digests
            .then(|| world.engine.state().state_digest());
        records.push(TxRecord {
            step_index: index,
            ok: out.ok,
            ret_data: out.ret_data.clone(),
            gas_used: out.gas_used,
            digest_before,
            digest_after,
        });
        if standalone.is_none() {
            if let Some(kind) = mismatch_kind(&out) {
                verdict = Verdict::Divergent { tx_index: index, kind, message: out.ret_data };
                break;
            }
        }
    }
    world.engine.set_delegate_probe(None);
    Ok(RunReport {
        verdict,
        fixtures: world.fixtures,
        records,
        final_digest: world.engine.state().state_digest(),
    })
}

/// Runs `scenario` with a proxy over `impls` as the subject.
pub fn run_scenario(scenario: &Scenario, impls: &[&str]) -> Result<RunReport, SetupError> {
    drive(scenario, impls, None, RunOptions::default())
}

pub fn run_scenario_with(
    scenario: &Scenario,
    impls: &[&str],
    options: RunOptions,
) -> Result<RunReport, SetupError> {
    drive(scenario, impls, None, options)
}

/// Replays `scenario` with `impls[index]` deployed standalone as the
/// subject. The report's verdict is always consistent; its records and
/// digest are the comparison oracle.
pub fn replay_standalone(
    scenario: &Scenario,
    impls: &[&str],
    index: usize,
) -> Result<RunReport, SetupError> {
    drive(scenario, impls, Some(index), RunOptions::default())
}

pub fn replay_standalone_with(
    scenario: &Scenario,
    impls: &[&str],
    index: usize,
    options: RunOptions,
) -> Result<RunReport, SetupError> {
    drive(scenario, impls, Some(index), options)
}

/// A divergent scenario with its shrunk witness.
#[derive(Clone, Debug)]
pub struct Finding {
    pub seed: u64,
    pub scenario: Scenario,
    pub verdict: Verdict,
    pub shrunk: Scenario,
    pub shrunk_verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct FuzzReport {
    pub cases: usize,
    pub findings: Vec<Finding>,
}

/// Fuzzes `cases` scenarios seeded `base_seed..base_seed+cases`; every
/// divergent case is shrunk and collected.
pub fn fuzz(
    impls: &[&str],
    cases: usize,
    base_seed: u64,
    config: &GenConfig,
) -> Result<FuzzReport, SetupError> {
    let mut findings = Vec::new();
    for i in 0..cases {
        let seed = base_seed.wrapping_add(i as u64);
        let scenario = generate(seed, config);
        let report = run_scenario(&scenario, impls)?;
        if report.verdict.is_divergent() {
            let shrunk = shrink(&scenario, impls, &report.verdict)?;
            let shrunk_report = run_scenario(&shrunk, impls)?;
            findings.push(Finding {
                seed,
                scenario,
                verdict: report.verdict,
                shrunk,
                shrunk_verdict: shrunk_report.verdict,
            });
        }
    }
    Ok(FuzzReport { cases, findings })
}

/// Greedy deterministic shrink: drop steps, collapse values, then pull
/// every value and every actor toward the minimum, accepting a candidate
/// only if it still diverges with the same mismatch kind. Runs to a
/// fixpoint.
pub fn shrink(
    scenario: &Scenario,
    impls: &[&str],
    original: &Verdict,
) -> Result<Scenario, SetupError> {
    let target_kind = match original {
        Verdict::Divergent { kind, .. } => *kind,
        Verdict::Consistent => return Ok(scenario.clone()),
    };
    let still_fails = |candidate: &Scenario| -> Result<bool, SetupError> {
        Ok(matches!(
            run_scenario(candidate, impls)?.verdict,
            Verdict::Divergent { kind, .. } if kind == target_kind
        ))
    };
    let mut best = scenario.clone();
    loop {
        let mut changed = false;

        // Step deletion, right to left so indexes stay valid.
        let mut i = best.txs.len();
        while i > 0 {
            i -= 1;
            let mut candidate = best.clone();
            candidate.txs.remove(i);
            if still_fails(&candidate)? {
                best = candidate;
                changed = true;
            }
        }

        // Joint collapse: every value-like field to at most 1.
        let mut candidate = best.clone();
        for step in &mut candidate.txs {
            if let Some(v) = step.value_mut() {
                *v = (*v).min(1);
            }
        }
        if candidate != best && still_fails(&candidate)? {
            best = candidate;
            changed = true;
        }

        // Pointwise value minimization: 0, then halving, then decrement.
        for idx in 0..best.txs.len() {
            loop {
                let current = match best.txs[idx].value_mut().map(|v| *v) {
                    Some(v) if v > 0 => v,
                    _ => break,
                };
                let mut accepted = false;
                for next in [0, current / 2, current - 1] {
                    if next >= current {
                        continue;
                    }
                    let mut candidate = best.clone();
                    *candidate.txs[idx].value_mut().expect("checked above") = next;
                    if still_fails(&candidate)? {
                        best = candidate;
                        changed = true;
                        accepted = true;
                        break;
                    }
                }
                if !accepted {
                    break;
                }
            }
        }

        // Actor canonicalization toward actor 0.
        for idx in 0..best.txs.len() {
            let slots = best.txs[idx].actor_slots_mut().len();
            for slot in 0..slots {
                let mut candidate = best.clone();
                *candidate.txs[idx].actor_slots_mut()[slot] = 0;
                if candidate != best && still_fails(&candidate)? {
                    best = candidate;
                    changed = true;
                }
            }
        }

        if !changed {
            return Ok(best);
        }
    }
}
