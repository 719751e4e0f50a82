//! Message-call execution over registered native behaviors.
//!
//! Contract logic is host-language code registered under a `code_id` and
//! bound to addresses at deployment. Behaviors interact with the world
//! exclusively through the [`Host`] interface; the engine wraps every call
//! in a snapshot frame so failed calls roll back exactly, routes calls
//! whose target is a redundancy proxy into the dispatcher, and meters gas
//! against a per-transaction budget.
//!
//! Gas model: a transaction entry costs `tx_base` plus `per_calldata_byte`
//! per byte (plus `transfer` when it carries value); nested frames cost
//! `call_base`; storage, hashing, and value movement are charged at the
//! host interface. Out-of-gas never panics and never surfaces to behaviors;
//! it poisons the meter and converts the whole transaction into a failed,
//! fully rolled-back outcome that consumed the entire budget.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::mem;

use crate::gas::{GasMeter, GasSchedule};
use crate::hash::keccak256_concat;
use crate::primitives::{Address, Word, U256};
use crate::redundancy::{self, DelegateProbe, ProxyConfig};
use crate::state::{CodeId, WorldState};

/// Nested frames beyond this fail deterministically instead of recursing.
const MAX_DEPTH: u32 = 64;

pub const REVERT_UNKNOWN_TARGET: &[u8] = b"unknown target";
pub const REVERT_MALFORMED_CALL: &[u8] = b"malformed call data";
pub const REVERT_INSUFFICIENT_BALANCE: &[u8] = b"insufficient balance";
pub const REVERT_READONLY_WRITE: &[u8] = b"state mutation in read-only frame";
pub const REVERT_DEPTH_EXCEEDED: &[u8] = b"call depth exceeded";

/// One message call: who calls what, with which funds, data, and block
/// environment. `storage_context` is the address whose storage slots the
/// executing code reads and writes; it equals `target` for plain calls and
/// stays the caller's context across delegate-calls.
#[derive(Clone, Debug)]
pub struct CallContext {
    pub sender: Address,
    pub target: Address,
    pub storage_context: Address,
    pub value: U256,
    pub calldata: Vec<u8>,
    pub block_timestamp: u64,
    pub block_number: u64,
    pub gas_limit: u64,
}

impl CallContext {
    /// A top-level transaction: storage context is the target.
    #[allow(clippy::too_many_arguments)]
    pub fn transaction(
        sender: Address,
        target: Address,
        value: U256,
        calldata: Vec<u8>,
        block_timestamp: u64,
        block_number: u64,
        gas_limit: u64,
    ) -> Self {
        CallContext {
            sender,
            target,
            storage_context: target,
            value,
            calldata,
            block_timestamp,
            block_number,
            gas_limit,
        }
    }
}

/// Result of one call. If `ok` is false no state change from the call
/// persists and `ret_data` carries the revert payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub ok: bool,
    pub ret_data: Vec<u8>,
    pub gas_used: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EngineError {
    /// `deploy` named a behavior that was never registered.
    UnknownCodeId(String),
    /// The call target is neither bound to code nor a proxy.
    UnknownTarget(Address),
    /// Transaction call data shorter than a function selector.
    MalformedCall,
    /// A transaction aimed the proxy's internal dispatch selector from
    /// outside.
    ReservedSelector,
    /// A behavior's init routine reverted during deployment.
    DeployFailed(Vec<u8>),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::UnknownCodeId(name) => write!(f, "unknown code id {name:?}"),
            EngineError::UnknownTarget(addr) => write!(f, "no code bound at {addr}"),
            EngineError::MalformedCall => write!(f, "call data shorter than a selector"),
            EngineError::ReservedSelector => {
                write!(f, "call data uses the reserved internal dispatch selector")
            }
            EngineError::DeployFailed(_) => write!(f, "init reverted during deployment"),
        }
    }
}

impl core::error::Error for EngineError {}

/// What a behavior sees of its own frame.
#[derive(Clone, Debug)]
pub struct CallEnv {
    pub sender: Address,
    /// The storage context; `address(this)` from the behavior's view.
    pub self_address: Address,
    /// Where the executing code is bound (differs from `self_address`
    /// inside delegate-calls).
    pub code_address: Address,
    pub value: U256,
    pub calldata: Vec<u8>,
    pub block_timestamp: u64,
    pub block_number: u64,
}

/// The only surface behaviors may touch. Every operation is metered and
/// journaled; writes from read-only frames poison the frame instead of
/// taking effect.
pub trait Host {
    fn env(&self) -> &CallEnv;
    /// Reads a slot of the current storage context.
    fn sload(&mut self, slot: Word) -> Word;
    /// Writes a slot of the current storage context.
    fn sstore(&mut self, slot: Word, value: Word);
    /// Metered Keccak-256 (mapping-slot derivation and the like).
    fn keccak(&mut self, data: &[u8]) -> Word;
    /// Plain call to another contract; value moves from the current
    /// storage context to the target.
    fn call(&mut self, target: Address, value: U256, data: &[u8]) -> (bool, Vec<u8>);
    /// Runs `code`'s behavior against the current storage context,
    /// preserving sender and value. No value moves.
    fn delegate_call(&mut self, code: Address, data: &[u8]) -> (bool, Vec<u8>);
    /// Sends native value from the current storage context. Returns false
    /// (with no state change) if the context cannot cover the amount.
    fn transfer_value(&mut self, to: Address, amount: U256) -> bool;
}

/// Outcome of behavior code: return payload or revert payload.
pub type BehaviorResult = Result<Vec<u8>, Vec<u8>>;

/// Native contract logic. `init` runs once at deployment with the
/// constructor arguments as calldata; `call` handles every message call.
pub trait Behavior {
    fn init(&self, _host: &mut dyn Host) -> BehaviorResult {
        Ok(Vec::new())
    }
    fn call(&self, host: &mut dyn Host) -> BehaviorResult;
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fault {
    OutOfGas,
    ReadOnlyWrite,
}

/// Deterministic single-threaded executor owning one [`WorldState`].
pub struct Engine {
    state: WorldState,
    schedule: GasSchedule,
    behaviors: Vec<Rc<dyn Behavior>>,
    names: BTreeMap<String, CodeId>,
    proxies: BTreeMap<Address, ProxyConfig>,
    meter: GasMeter,
    fault: Option<Fault>,
    depth: u32,
    readonly_depth: u32,
    deploy_seq: u64,
    delegate_probe: Option<Box<dyn FnMut(&DelegateProbe)>>,
}

impl Engine {
    pub fn new(schedule: GasSchedule) -> Self {
        Engine {
            state: WorldState::new(),
            schedule,
            behaviors: Vec::new(),
            names: BTreeMap::new(),
            proxies: BTreeMap::new(),
            meter: GasMeter::new(0),
            fault: None,
            depth: 0,
            readonly_depth: 0,
            deploy_seq: 0,
            delegate_probe: None,
        }
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    /// Direct state access for genesis setup (funding accounts). Mutating
    /// state mid-call from outside the host interface is not supported.
    pub fn state_mut(&mut self) -> &mut WorldState {
        &mut self.state
    }

    pub fn schedule(&self) -> &GasSchedule {
        &self.schedule
    }

    /// Registers contract logic under a name. Later registrations of the
    /// same name shadow earlier ones for future deployments only.
    pub fn register_behavior(&mut self, name: &str, behavior: impl Behavior + 'static) {
        let id = CodeId(self.behaviors.len() as u32);
        self.behaviors.push(Rc::new(behavior));
        self.names.insert(String::from(name), id);
    }

    pub fn code_id(&self, name: &str) -> Option<CodeId> {
        self.names.get(name).copied()
    }

    /// True if calls to `addr` can execute: code is bound or a proxy is
    /// configured there.
    pub fn is_callable(&self, addr: Address) -> bool {
        self.state.code_at(addr).is_some() || self.proxies.contains_key(&addr)
    }

    /// Installs an observer for per-implementation delegate frames (used
    /// to audit intermediate rollback). Digest probes are only computed
    /// while an observer is installed.
    pub fn set_delegate_probe(&mut self, probe: Option<Box<dyn FnMut(&DelegateProbe)>>) {
        self.delegate_probe = probe;
    }

    pub(crate) fn has_delegate_probe(&self) -> bool {
        self.delegate_probe.is_some()
    }

    pub(crate) fn emit_delegate_probe(&mut self, event: &DelegateProbe) {
        if let Some(mut probe) = self.delegate_probe.take() {
            probe(event);
            self.delegate_probe = Some(probe);
        }
    }

    pub(crate) fn charge(&mut self, amount: u64) {
        self.meter.charge(amount);
        if self.meter.exhausted() {
            self.fault = Some(Fault::OutOfGas);
        }
    }

    pub(crate) fn out_of_gas(&self) -> bool {
        matches!(self.fault, Some(Fault::OutOfGas))
    }

    pub(crate) fn proxy_config(&self, addr: Address) -> Option<&ProxyConfig> {
        self.proxies.get(&addr)
    }

    pub(crate) fn proxy_config_mut(&mut self, addr: Address) -> Option<&mut ProxyConfig> {
        self.proxies.get_mut(&addr)
    }

    pub(crate) fn insert_proxy(&mut self, addr: Address, config: ProxyConfig) {
        self.proxies.insert(addr, config);
    }

    /// Fresh deterministic address: Keccak-256(deployer ‖ sequence)
    /// truncated to 20 bytes. Consumes one sequence slot.
    pub(crate) fn next_address(&mut self, deployer: Address) -> Address {
        let seq = self.deploy_seq;
        self.deploy_seq += 1;
        let word = keccak256_concat(&[&deployer.0, &seq.to_be_bytes()]);
        word.to_address()
    }

    /// Deploys `code_id`: binds a fresh address and runs the behavior's
    /// init routine against it with `init_args` as calldata. Deployment is
    /// setup machinery and is not metered; a failed init unwinds the
    /// binding too.
    pub fn deploy(
        &mut self,
        deployer: Address,
        code_id: &str,
        init_args: &[u8],
    ) -> Result<Address, EngineError> {
        let code = self
            .code_id(code_id)
            .ok_or_else(|| EngineError::UnknownCodeId(String::from(code_id)))?;
        let addr = self.next_address(deployer);
        let snap = self.state.snapshot();
        self.state.bind_code(addr, code);
        let env = CallEnv {
            sender: deployer,
            self_address: addr,
            code_address: addr,
            value: U256::zero(),
            calldata: init_args.to_vec(),
            block_timestamp: 0,
            block_number: 0,
        };
        let (ok, ret) = self.run_init_frame(code, env);
        if ok {
            self.state.commit(snap).expect("deploy snapshot is top of stack");
            Ok(addr)
        } else {
            self.state.revert_to(snap).expect("deploy snapshot is top of stack");
            Err(EngineError::DeployFailed(ret))
        }
    }

    /// Runs a behavior's init in its own unmetered frame. Used by `deploy`
    /// and by proxy creation (which runs an implementation's init against
    /// the proxy's storage).
    pub(crate) fn run_init_frame(&mut self, code: CodeId, env: CallEnv) -> (bool, Vec<u8>) {
        let behavior = match self.behaviors.get(code.0 as usize) {
            Some(b) => Rc::clone(b),
            None => return (false, REVERT_UNKNOWN_TARGET.to_vec()),
        };
        let saved_meter = mem::replace(&mut self.meter, GasMeter::new(u64::MAX));
        let saved_fault = self.fault.take();
        let snap = self.state.snapshot();
        self.depth += 1;
        let result = {
            let mut host = HostFrame { engine: self, env };
            behavior.init(&mut host)
        };
        self.depth -= 1;
        let outcome = match (self.fault.take(), result) {
            (None, Ok(ret)) => {
                self.state.commit(snap).expect("frame snapshot is top of stack");
                (true, ret)
            }
            (None, Err(payload)) => {
                self.state.revert_to(snap).expect("frame snapshot is top of stack");
                (false, payload)
            }
            (Some(Fault::ReadOnlyWrite), _) => {
                self.state.revert_to(snap).expect("frame snapshot is top of stack");
                (false, REVERT_READONLY_WRITE.to_vec())
            }
            (Some(Fault::OutOfGas), _) => {
                // Unreachable with the scratch meter, handled for shape.
                self.state.revert_to(snap).expect("frame snapshot is top of stack");
                (false, Vec::new())
            }
        };
        self.meter = saved_meter;
        self.fault = saved_fault;
        outcome
    }

    /// Executes one transaction. Hard errors reject calls that could never
    /// dispatch (unknown target, truncated calldata); everything else is a
    /// regular `Outcome`, including out-of-gas and insufficient balance.
    pub fn call(&mut self, ctx: CallContext) -> Result<Outcome, EngineError> {
        if ctx.calldata.len() < 4 {
            return Err(EngineError::MalformedCall);
        }
        if !self.is_callable(ctx.target) {
            return Err(EngineError::UnknownTarget(ctx.target));
        }
        if self.proxies.contains_key(&ctx.target) && ctx.calldata[..4] == redundancy::CD_SELECTOR {
            return Err(EngineError::ReservedSelector);
        }
        let mut ctx = ctx;
        ctx.storage_context = ctx.target;

        self.meter = GasMeter::new(ctx.gas_limit);
        self.fault = None;
        let entry_cost = self
            .schedule
            .tx_base
            .saturating_add(self.schedule.per_calldata_byte * ctx.calldata.len() as u64);
        self.charge(entry_cost);
        if !ctx.value.is_zero() {
            self.charge(self.schedule.transfer);
        }

        let (ok, ret_data) = self.exec_frame(&ctx, true, false);
        let gas_used = self.meter.used();
        self.fault = None;
        Ok(Outcome { ok, ret_data, gas_used })
    }

    /// Runs `code_addr`'s behavior in the parent's storage context with
    /// sender and value inherited; atomic, no value movement. Used by the
    /// redundancy dispatcher; behaviors reach the same mechanism through
    /// [`Host::delegate_call`].
    pub fn delegate_call(
        &mut self,
        parent: &CallContext,
        code_addr: Address,
        data: &[u8],
    ) -> Result<Outcome, EngineError> {
        if !self.is_callable(code_addr) {
            return Err(EngineError::UnknownTarget(code_addr));
        }
        let before = self.meter.used();
        self.charge(self.schedule.call_base);
        let ctx = CallContext {
            sender: parent.sender,
            target: code_addr,
            storage_context: parent.storage_context,
            value: parent.value,
            calldata: data.to_vec(),
            block_timestamp: parent.block_timestamp,
            block_number: parent.block_number,
            gas_limit: parent.gas_limit,
        };
        let (ok, ret_data) = self.exec_frame(&ctx, false, false);
        Ok(Outcome { ok, ret_data, gas_used: self.meter.used().saturating_sub(before) })
    }

    /// Read-only plain call (checks machinery). Attempted writes poison
    /// the frame; value never moves.
    pub(crate) fn readonly_call(
        &mut self,
        sender: Address,
        target: Address,
        data: &[u8],
        outer: &CallContext,
    ) -> (bool, Vec<u8>) {
        self.charge(self.schedule.call_base);
        let ctx = CallContext {
            sender,
            target,
            storage_context: target,
            value: U256::zero(),
            calldata: data.to_vec(),
            block_timestamp: outer.block_timestamp,
            block_number: outer.block_number,
            gas_limit: outer.gas_limit,
        };
        self.exec_frame(&ctx, false, true)
    }

    /// Read-only delegate-execution of `code` against `storage_ctx` (a
    /// check routed to the currently active implementation).
    pub(crate) fn readonly_delegate(
        &mut self,
        sender: Address,
        storage_ctx: Address,
        code: Address,
        data: &[u8],
        outer: &CallContext,
    ) -> (bool, Vec<u8>) {
        self.charge(self.schedule.call_base);
        let ctx = CallContext {
            sender,
            target: code,
            storage_context: storage_ctx,
            value: U256::zero(),
            calldata: data.to_vec(),
            block_timestamp: outer.block_timestamp,
            block_number: outer.block_number,
            gas_limit: outer.gas_limit,
        };
        self.exec_frame(&ctx, false, true)
    }

    /// The frame core: snapshot, dispatch, and exactly one of commit or
    /// revert. Faults (out-of-gas, read-only violation) override the
    /// behavior's result at the boundary.
    fn exec_frame(&mut self, ctx: &CallContext, move_value: bool, readonly: bool) -> (bool, Vec<u8>) {
        if self.fault.is_some() {
            return (false, Vec::new());
        }
        if self.depth >= MAX_DEPTH {
            return (false, REVERT_DEPTH_EXCEEDED.to_vec());
        }
        self.depth += 1;
        if readonly {
            self.readonly_depth += 1;
        }
        let snap = self.state.snapshot();
        let result = self.frame_body(ctx, move_value);
        let outcome = match (self.fault, result) {
            (Some(Fault::OutOfGas), _) => {
                self.state.revert_to(snap).expect("frame snapshot is top of stack");
                // The fault stays set: every enclosing frame unwinds too.
                (false, Vec::new())
            }
            (Some(Fault::ReadOnlyWrite), _) => {
                self.fault = None;
                self.state.revert_to(snap).expect("frame snapshot is top of stack");
                (false, REVERT_READONLY_WRITE.to_vec())
            }
            (None, Ok(ret)) => {
                self.state.commit(snap).expect("frame snapshot is top of stack");
                (true, ret)
            }
            (None, Err(payload)) => {
                self.state.revert_to(snap).expect("frame snapshot is top of stack");
                (false, payload)
            }
        };
        if readonly {
            self.readonly_depth -= 1;
        }
        self.depth -= 1;
        outcome
    }

    fn frame_body(&mut self, ctx: &CallContext, move_value: bool) -> BehaviorResult {
        if move_value && !ctx.value.is_zero() {
            self.state
                .transfer_value(ctx.sender, ctx.target, ctx.value)
                .map_err(|_| REVERT_INSUFFICIENT_BALANCE.to_vec())?;
        }
        if ctx.calldata.len() < 4 {
            return Err(REVERT_MALFORMED_CALL.to_vec());
        }
        if self.proxies.contains_key(&ctx.target) {
            return redundancy::dispatch(self, ctx);
        }
        let code = self
            .state
            .code_at(ctx.target)
            .ok_or_else(|| REVERT_UNKNOWN_TARGET.to_vec())?;
        let behavior = match self.behaviors.get(code.0 as usize) {
            Some(b) => Rc::clone(b),
            None => return Err(REVERT_UNKNOWN_TARGET.to_vec()),
        };
        let env = CallEnv {
            sender: ctx.sender,
            self_address: ctx.storage_context,
            code_address: ctx.target,
            value: ctx.value,
            calldata: ctx.calldata.clone(),
            block_timestamp: ctx.block_timestamp,
            block_number: ctx.block_number,
        };
        let mut host = HostFrame { engine: self, env };
        behavior.call(&mut host)
    }
}

/// [`Host`] implementation for one live frame.
struct HostFrame<'a> {
    engine: &'a mut Engine,
    env: CallEnv,
}

impl Host for HostFrame<'_> {
    fn env(&self) -> &CallEnv {
        &self.env
    }

    fn sload(&mut self, slot: Word) -> Word {
        self.engine.charge(self.engine.schedule.sload);
        self.engine.state.sload(self.env.self_address, slot)
    }

    fn sstore(&mut self, slot: Word, value: Word) {
        if self.engine.readonly_depth > 0 {
            self.engine.fault = Some(Fault::ReadOnlyWrite);
            return;
        }
        let prev = self.engine.state.sload(self.env.self_address, slot);
        let cost = if prev.is_zero() && !value.is_zero() {
            self.engine.schedule.sstore_new
        } else {
            self.engine.schedule.sstore_update
        };
        self.engine.charge(cost);
        self.engine.state.sstore(self.env.self_address, slot, value);
    }

    fn keccak(&mut self, data: &[u8]) -> Word {
        self.engine.charge(self.engine.schedule.hash_cost(data.len()));
        crate::hash::keccak256(data)
    }

    fn call(&mut self, target: Address, value: U256, data: &[u8]) -> (bool, Vec<u8>) {
        if self.engine.readonly_depth > 0 && !value.is_zero() {
            self.engine.fault = Some(Fault::ReadOnlyWrite);
            return (false, Vec::new());
        }
        let mut cost = self.engine.schedule.call_base;
        if !value.is_zero() {
            cost = cost.saturating_add(self.engine.schedule.transfer);
        }
        self.engine.charge(cost);
        let ctx = CallContext {
            sender: self.env.self_address,
            target,
            storage_context: target,
            value,
            calldata: data.to_vec(),
            block_timestamp: self.env.block_timestamp,
            block_number: self.env.block_number,
            gas_limit: self.engine.meter.limit(),
        };
        self.engine.exec_frame(&ctx, true, false)
    }

    fn delegate_call(&mut self, code: Address, data: &[u8]) -> (bool, Vec<u8>) {
        self.engine.charge(self.engine.schedule.call_base);
        let ctx = CallContext {
            sender: self.env.sender,
            target: code,
            storage_context: self.env.self_address,
            value: self.env.value,
            calldata: data.to_vec(),
            block_timestamp: self.env.block_timestamp,
            block_number: self.env.block_number,
            gas_limit: self.engine.meter.limit(),
        };
        self.engine.exec_frame(&ctx, false, false)
    }

    fn transfer_value(&mut self, to: Address, amount: U256) -> bool {
        if self.engine.readonly_depth > 0 && !amount.is_zero() {
            self.engine.fault = Some(Fault::ReadOnlyWrite);
            return false;
        }
        self.engine.charge(self.engine.schedule.call_base);
        self.engine
            .state
            .transfer_value(self.env.self_address, to, amount)
            .is_ok()
    }
}
