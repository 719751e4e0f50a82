//! N-version redundancy proxy.
//!
//! A proxy address carries no logic of its own. A call to it is re-executed
//! once per configured implementation via self-delegation: the dispatcher
//! delegate-calls the proxy itself with an internal payload naming one
//! implementation, that frame delegate-calls the implementation against
//! the proxy's storage (sender and value preserved), runs the registered
//! checks, and smuggles the observation triple `(ok, ret_data,
//! checks_hash)` back in its return or revert payload. Non-final frames
//! always revert, so every implementation starts from the same pre-state;
//! only the final implementation's effects persist. After each frame the
//! triple is asserted against the first implementation's; any disagreement
//! reverts the whole call with a fixed message naming the mismatched
//! component.
//!
//! Internal delegate payload (integers big-endian):
//!
//! ```text
//! CD_SELECTOR(4) ‖ implementation(20) ‖ is_last(1) ‖ data_len(4) ‖ data
//!               ‖ check_count(2) ‖ check*
//! check := target(20) ‖ encoding_len(2) ‖ abstract_check_encoding
//! ```
//!
//! The triple wire format is `ok(1) ‖ checks_hash(32) ‖ ret_data`, with a
//! strict 0x00/0x01 ok byte.

use alloc::vec::Vec;
use core::fmt;

use crate::checks::{self, CheckError, CheckRegistry, CheckSpec};
use crate::engine::{CallContext, Engine, EngineError};
use crate::primitives::{Address, Word};

/// Reserved selector of the internal delegate entry point. Top-level calls
/// carrying it are rejected before dispatch; it only ever appears inside
/// the proxy's own self-delegation.
pub const CD_SELECTOR: [u8; 4] = [0xfd, 0xcd, 0x01, 0x00];

pub const MSG_SUCCESS_MISMATCH: &[u8] = b"all implementations must return the same success";
pub const MSG_DATA_MISMATCH: &[u8] = b"all implementations must return the same data";
pub const MSG_CHECKS_MISMATCH: &[u8] = b"all implementations must return the same checks";
pub const MSG_INTERNAL: &[u8] = b"proxy internal error";

/// Redundancy configuration of one proxy address.
#[derive(Clone, Debug)]
pub struct ProxyConfig {
    pub proxy_address: Address,
    pub implementations: Vec<Address>,
    pub registry: CheckRegistry,
}

/// The observation triple carried across the self-delegation boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelegateResult {
    pub ok: bool,
    pub checks_hash: Word,
    pub ret_data: Vec<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WireError {
    /// Fewer than the 33 fixed bytes.
    TooShort,
    /// The success byte was neither 0x00 nor 0x01.
    BadOkByte(u8),
}

impl fmt::Display for WireError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WireError::TooShort => write!(f, "delegate result shorter than 33 bytes"),
            WireError::BadOkByte(b) => write!(f, "delegate result ok byte {b:#04x}"),
        }
    }
}

impl core::error::Error for WireError {}

impl DelegateResult {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(33 + self.ret_data.len());
        out.push(self.ok as u8);
        out.extend_from_slice(&self.checks_hash.0);
        out.extend_from_slice(&self.ret_data);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        if bytes.len() < 33 {
            return Err(WireError::TooShort);
        }
        let ok = match bytes[0] {
            0x00 => false,
            0x01 => true,
            other => return Err(WireError::BadOkByte(other)),
        };
        let mut hash = [0u8; 32];
        hash.copy_from_slice(&bytes[1..33]);
        Ok(DelegateResult { ok, checks_hash: Word(hash), ret_data: bytes[33..].to_vec() })
    }
}

/// One per-implementation delegate frame, as seen by an installed probe.
/// For non-final frames `digest_before == digest_after` certifies exact
/// rollback.
#[derive(Clone, Debug)]
pub struct DelegateProbe {
    pub impl_index: usize,
    pub implementation: Address,
    pub is_last: bool,
    pub digest_before: Word,
    pub digest_after: Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProxyError {
    EmptyImplementationList,
    /// An implementation address with no code bound.
    UnknownImplementation(Address),
    UnknownProxy(Address),
    /// The first implementation's init reverted while seeding the proxy.
    InitFailed(Vec<u8>),
    Check(CheckError),
}

impl fmt::Display for ProxyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProxyError::EmptyImplementationList => write!(f, "implementation list is empty"),
            ProxyError::UnknownImplementation(a) => write!(f, "no code bound at implementation {a}"),
            ProxyError::UnknownProxy(a) => write!(f, "no proxy configured at {a}"),
            ProxyError::InitFailed(_) => write!(f, "implementation init reverted"),
            ProxyError::Check(e) => write!(f, "check registration: {e}"),
        }
    }
}

impl core::error::Error for ProxyError {}

impl From<CheckError> for ProxyError {
    fn from(e: CheckError) -> Self {
        ProxyError::Check(e)
    }
}

fn validate_impls(engine: &Engine, implementations: &[Address]) -> Result<(), ProxyError> {
    if implementations.is_empty() {
        return Err(ProxyError::EmptyImplementationList);
    }
    for addr in implementations {
        if engine.state().code_at(*addr).is_none() {
            return Err(ProxyError::UnknownImplementation(*addr));
        }
    }
    Ok(())
}

/// Creates a proxy over `implementations` at a fresh deterministic
/// address. The first implementation's init routine runs against the
/// proxy's storage with `init_args`, seeding it the way a standalone
/// deployment of that implementation would be seeded.
pub fn deploy_proxy(
    engine: &mut Engine,
    deployer: Address,
    implementations: Vec<Address>,
    init_args: &[u8],
) -> Result<Address, ProxyError> {
    validate_impls(engine, &implementations)?;
    let proxy = engine.next_address(deployer);
    let code = engine
        .state()
        .code_at(implementations[0])
        .expect("validated above");
    let env = crate::engine::CallEnv {
        sender: deployer,
        self_address: proxy,
        code_address: implementations[0],
        value: crate::primitives::U256::zero(),
        calldata: init_args.to_vec(),
        block_timestamp: 0,
        block_number: 0,
    };
    let (ok, ret) = engine.run_init_frame(code, env);
    if !ok {
        return Err(ProxyError::InitFailed(ret));
    }
    engine.insert_proxy(
        proxy,
        ProxyConfig { proxy_address: proxy, implementations, registry: CheckRegistry::new() },
    );
    Ok(proxy)
}

/// Replaces a proxy's implementation list.
pub fn set_implementations(
    engine: &mut Engine,
    proxy: Address,
    implementations: Vec<Address>,
) -> Result<(), ProxyError> {
    validate_impls(engine, &implementations)?;
    let config = engine
        .proxy_config_mut(proxy)
        .ok_or(ProxyError::UnknownProxy(proxy))?;
    config.implementations = implementations;
    Ok(())
}

pub fn implementations(engine: &Engine, proxy: Address) -> Option<Vec<Address>> {
    engine.proxy_config(proxy).map(|c| c.implementations.clone())
}

/// Registers a check from its wire encoding: after any call through
/// `proxy` dispatching on `for_selector`, read-only call `target` with the
/// decoded selector and materialized arguments.
pub fn register_check(
    engine: &mut Engine,
    proxy: Address,
    for_selector: [u8; 4],
    target: Address,
    encoded: &[u8],
) -> Result<(), ProxyError> {
    let (selector, args) = checks::decode_abstract(encoded)?;
    let config = engine
        .proxy_config_mut(proxy)
        .ok_or(ProxyError::UnknownProxy(proxy))?;
    config.registry.register(for_selector, CheckSpec { target, selector, args });
    Ok(())
}

pub fn registered_checks(engine: &Engine, proxy: Address, for_selector: [u8; 4]) -> Option<Vec<CheckSpec>> {
    engine.proxy_config(proxy).map(|c| c.registry.checks_for(for_selector))
}

/// Frame-body dispatch for calls targeting a proxy address.
pub(crate) fn dispatch(engine: &mut Engine, ctx: &CallContext) -> Result<Vec<u8>, Vec<u8>> {
    if ctx.calldata[..4] == CD_SELECTOR {
        call_delegate(engine, ctx)
    } else {
        redundant_call(engine, ctx)
    }
}

fn internal_error() -> Vec<u8> {
    MSG_INTERNAL.to_vec()
}

/// The dispatcher loop: one self-delegation per implementation, unanimity
/// asserted against the first implementation's triple after each frame.
fn redundant_call(engine: &mut Engine, ctx: &CallContext) -> Result<Vec<u8>, Vec<u8>> {
    let config = engine.proxy_config(ctx.target).ok_or_else(internal_error)?;
    let implementations = config.implementations.clone();
    let mut selector = [0u8; 4];
    selector.copy_from_slice(&ctx.calldata[..4]);
    let specs = config.registry.checks_for(selector);
    let schedule = *engine.schedule();
    let want_probe = engine.has_delegate_probe();

    let count = implementations.len();
    let mut first: Option<DelegateResult> = None;
    for (index, implementation) in implementations.into_iter().enumerate() {
        let is_last = index + 1 == count;
        let payload = encode_delegate_payload(implementation, is_last, &ctx.calldata, &specs);
        // Each self-delegation re-enters the engine as a fresh
        // transaction-grade dispatch and is priced like one.
        engine.charge(
            schedule
                .tx_base
                .saturating_add(schedule.per_calldata_byte * payload.len() as u64),
        );
        let digest_before = if want_probe { Some(engine.state().state_digest()) } else { None };
        let outcome = engine
            .delegate_call(ctx, ctx.target, &payload)
            .map_err(|_: EngineError| internal_error())?;
        if engine.out_of_gas() {
            return Err(Vec::new());
        }
        if let Some(digest_before) = digest_before {
            let digest_after = engine.state().state_digest();
            engine.emit_delegate_probe(&DelegateProbe {
                impl_index: index,
                implementation,
                is_last,
                digest_before,
                digest_after,
            });
        }
        let triple = DelegateResult::from_bytes(&outcome.ret_data).map_err(|_| internal_error())?;
        match &first {
            None => first = Some(triple),
            Some(reference) => {
                if triple.ok != reference.ok {
                    return Err(MSG_SUCCESS_MISMATCH.to_vec());
                }
                if triple.ret_data != reference.ret_data {
                    return Err(MSG_DATA_MISMATCH.to_vec());
                }
                if triple.checks_hash != reference.checks_hash {
                    return Err(MSG_CHECKS_MISMATCH.to_vec());
                }
            }
        }
    }
    let agreed = first.expect("implementation list is validated non-empty");
    if agreed.ok {
        Ok(agreed.ret_data)
    } else {
        Err(agreed.ret_data)
    }
}

/// The internal delegate entry: runs one implementation against the
/// proxy's storage, runs the checks, and returns the triple through the
/// frame boundary. Non-final frames revert (rolling back the
/// implementation's writes) with the triple as revert payload.
fn call_delegate(engine: &mut Engine, ctx: &CallContext) -> Result<Vec<u8>, Vec<u8>> {
    let (implementation, is_last, data, specs) =
        decode_delegate_payload(&ctx.calldata).map_err(|_| internal_error())?;
    let outcome = engine
        .delegate_call(ctx, implementation, &data)
        .map_err(|_: EngineError| internal_error())?;
    if engine.out_of_gas() {
        return Err(Vec::new());
    }
    // Checks run unconditionally, against the post-frame state: committed
    // effects for a successful implementation, the pre-state for a
    // reverted one.
    let check_ctx = CallContext { calldata: data, ..ctx.clone() };
    let proxy = ctx.storage_context;
    let results = checks::run_checks(engine, &specs, &check_ctx, proxy, implementation);
    if engine.out_of_gas() {
        return Err(Vec::new());
    }
    let hashed_len: usize = results.iter().map(|r| 4 + r.len()).sum();
    engine.charge(engine.schedule().hash_cost(hashed_len));
    let triple = DelegateResult {
        ok: outcome.ok,
        checks_hash: checks::hash_checks(&results),
        ret_data: outcome.ret_data,
    };
    let bytes = triple.to_bytes();
    if is_last {
        Ok(bytes)
    } else {
        Err(bytes)
    }
}

fn encode_delegate_payload(
    implementation: Address,
    is_last: bool,
    data: &[u8],
    specs: &[CheckSpec],
) -> Vec<u8> {
    let mut out = Vec::with_capacity(35 + data.len() + specs.len() * 32);
    out.extend_from_slice(&CD_SELECTOR);
    out.extend_from_slice(&implementation.0);
    out.push(is_last as u8);
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    out.extend_from_slice(data);
    out.extend_from_slice(&(specs.len() as u16).to_be_bytes());
    for spec in specs {
        let encoded = checks::encode_abstract(spec.selector, &spec.args)
            .expect("registered checks round-trip the wire format");
        out.extend_from_slice(&spec.target.0);
        out.extend_from_slice(&(encoded.len() as u16).to_be_bytes());
        out.extend_from_slice(&encoded);
    }
    out
}

type DelegatePayload = (Address, bool, Vec<u8>, Vec<CheckSpec>);

fn decode_delegate_payload(calldata: &[u8]) -> Result<DelegatePayload, ()> {
    let body = calldata.get(4..).ok_or(())?;
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<usize, ()> {
        let start = *pos;
        let end = start.checked_add(n).ok_or(())?;
        if end > body.len() {
            return Err(());
        }
        *pos = end;
        Ok(start)
    };
    let at = take(&mut pos, 20)?;
    let mut implementation = [0u8; 20];
    implementation.copy_from_slice(&body[at..at + 20]);
    let at = take(&mut pos, 1)?;
    let is_last = match body[at] {
        0x00 => false,
        0x01 => true,
        _ => return Err(()),
    };
    let at = take(&mut pos, 4)?;
    let data_len = u32::from_be_bytes(body[at..at + 4].try_into().unwrap()) as usize;
    let at = take(&mut pos, data_len)?;
    let data = body[at..at + data_len].to_vec();
    let at = take(&mut pos, 2)?;
    let check_count = u16::from_be_bytes(body[at..at + 2].try_into().unwrap()) as usize;
    let mut specs = Vec::with_capacity(check_count);
    for _ in 0..check_count {
        let at = take(&mut pos, 20)?;
        let mut target = [0u8; 20];
        target.copy_from_slice(&body[at..at + 20]);
        let at = take(&mut pos, 2)?;
        let enc_len = u16::from_be_bytes(body[at..at + 2].try_into().unwrap()) as usize;
        let at = take(&mut pos, enc_len)?;
        let (selector, args) = checks::decode_abstract(&body[at..at + enc_len]).map_err(|_| ())?;
        specs.push(CheckSpec { target: Address(target), selector, args });
    }
    if pos != body.len() {
        return Err(());
    }
    Ok((Address(implementation), is_last, data, specs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::{AbstractArgument, EnvKind};
    use crate::engine::{Behavior, BehaviorResult, Host, Outcome};
    use crate::gas::GasSchedule;
    use crate::primitives::U256;
    use alloc::boxed::Box;
    use alloc::rc::Rc;
    use alloc::vec;
    use core::cell::RefCell;

    const SEL_RUN: [u8; 4] = [0x10, 0x00, 0x00, 0x00];
    const SEL_GET: [u8; 4] = [0x20, 0x00, 0x00, 0x00];

    /// Writes `store` to slot 0 on run (when non-zero) and answers `ret`;
    /// exposes slot 0 through a getter.
    struct Scripted {
        store: u64,
        ret: BehaviorResult,
    }

    impl Behavior for Scripted {
        fn call(&self, host: &mut dyn Host) -> BehaviorResult {
            let selector = &host.env().calldata[..4];
            if selector == SEL_RUN {
                if self.store != 0 {
                    host.sstore(Word::ZERO, Word::from_u64(self.store));
                }
                self.ret.clone()
            } else if selector == SEL_GET {
                Ok(host.sload(Word::ZERO).0.to_vec())
            } else {
                Err(b"unknown function".to_vec())
            }
        }
    }

    fn actor(b: u8) -> Address {
        Address([b; 20])
    }

    fn setup(impls: Vec<Scripted>) -> (Engine, Address) {
        let mut engine = Engine::new(GasSchedule::default());
        let mut addrs = Vec::new();
        for (i, s) in impls.into_iter().enumerate() {
            let name = alloc::format!("impl{i}");
            engine.register_behavior(&name, s);
            addrs.push(engine.deploy(actor(1), &name, &[]).unwrap());
        }
        let proxy = deploy_proxy(&mut engine, actor(1), addrs, &[]).unwrap();
        (engine, proxy)
    }

    fn run(engine: &mut Engine, proxy: Address) -> Outcome {
        let ctx = CallContext::transaction(
            actor(2),
            proxy,
            U256::zero(),
            SEL_RUN.to_vec(),
            1_000,
            1,
            100_000_000,
        );
        engine.call(ctx).unwrap()
    }

    #[test]
    fn delegate_result_wire_round_trip() {
        let triple = DelegateResult {
            ok: true,
            checks_hash: Word::from_u64(9),
            ret_data: vec![1, 2, 3],
        };
        assert_eq!(DelegateResult::from_bytes(&triple.to_bytes()).unwrap(), triple);
        let empty = DelegateResult { ok: false, checks_hash: Word::ZERO, ret_data: vec![] };
        let bytes = empty.to_bytes();
        assert_eq!(bytes.len(), 33);
        assert_eq!(DelegateResult::from_bytes(&bytes).unwrap(), empty);
        assert_eq!(DelegateResult::from_bytes(&bytes[..32]).unwrap_err(), WireError::TooShort);
        let mut bad = bytes;
        bad[0] = 0x02;
        assert_eq!(DelegateResult::from_bytes(&bad).unwrap_err(), WireError::BadOkByte(0x02));
    }

    #[test]
    fn delegate_payload_round_trip() {
        let spec = CheckSpec {
            target: actor(9),
            selector: SEL_GET,
            args: vec![
                AbstractArgument::CallData { offset: 4, length: 32 },
                AbstractArgument::Env(EnvKind::Sender),
                AbstractArgument::Static(vec![7, 7]),
            ],
        };
        let data = vec![0xAA; 40];
        let payload = encode_delegate_payload(actor(3), true, &data, &[spec.clone()]);
        assert_eq!(payload[..4], CD_SELECTOR);
        let (implementation, is_last, dec_data, dec_specs) =
            decode_delegate_payload(&payload).unwrap();
        assert_eq!(implementation, actor(3));
        assert!(is_last);
        assert_eq!(dec_data, data);
        assert_eq!(dec_specs, vec![spec]);
    }

    #[test]
    fn delegate_payload_rejects_mutations() {
        let payload = encode_delegate_payload(actor(3), false, &[1, 2, 3, 4], &[]);
        for cut in 4..payload.len() {
            assert!(decode_delegate_payload(&payload[..cut]).is_err(), "cut {cut}");
        }
        let mut extended = payload;
        extended.push(0);
        assert!(decode_delegate_payload(&extended).is_err());
    }

    #[test]
    fn agreeing_implementations_pass_and_commit_last_writes() {
        let (mut engine, proxy) = setup(vec![
            Scripted { store: 5, ret: Ok(b"hi".to_vec()) },
            Scripted { store: 5, ret: Ok(b"hi".to_vec()) },
        ]);
        let out = run(&mut engine, proxy);
        assert!(out.ok);
        assert_eq!(out.ret_data, b"hi");
        assert_eq!(engine.state().sload(proxy, Word::ZERO), Word::from_u64(5));
    }

    #[test]
    fn single_implementation_is_a_plain_pass_through() {
        let (mut engine, proxy) = setup(vec![Scripted { store: 3, ret: Ok(b"solo".to_vec()) }]);
        let out = run(&mut engine, proxy);
        assert!(out.ok);
        assert_eq!(out.ret_data, b"solo");
        assert_eq!(engine.state().sload(proxy, Word::ZERO), Word::from_u64(3));
    }

    #[test]
    fn success_mismatch_reverts_with_fixed_message() {
        let (mut engine, proxy) = setup(vec![
            Scripted { store: 0, ret: Ok(b"x".to_vec()) },
            Scripted { store: 0, ret: Err(b"x".to_vec()) },
        ]);
        let before = engine.state().state_digest();
        let out = run(&mut engine, proxy);
        assert!(!out.ok);
        assert_eq!(out.ret_data, MSG_SUCCESS_MISMATCH);
        assert_eq!(engine.state().state_digest(), before);
    }

    #[test]
    fn data_mismatch_reverts_with_fixed_message() {
        let (mut engine, proxy) = setup(vec![
            Scripted { store: 1, ret: Ok(b"x".to_vec()) },
            Scripted { store: 1, ret: Ok(b"y".to_vec()) },
        ]);
        let before = engine.state().state_digest();
        let out = run(&mut engine, proxy);
        assert!(!out.ok);
        assert_eq!(out.ret_data, MSG_DATA_MISMATCH);
        assert_eq!(engine.state().state_digest(), before);
    }

    #[test]
    fn storage_divergence_alone_is_invisible_without_checks() {
        // The triple captures ret_data and check results, not raw storage:
        // divergent writes with agreeing returns pass, and the last
        // implementation's write wins. Registering a check is what makes
        // such divergence observable.
        let (mut engine, proxy) = setup(vec![
            Scripted { store: 1, ret: Ok(vec![]) },
            Scripted { store: 2, ret: Ok(vec![]) },
        ]);
        let out = run(&mut engine, proxy);
        assert!(out.ok);
        assert_eq!(engine.state().sload(proxy, Word::ZERO), Word::from_u64(2));
    }

    #[test]
    fn checks_mismatch_reverts_with_fixed_message() {
        let (mut engine, proxy) = setup(vec![
            Scripted { store: 1, ret: Ok(vec![]) },
            Scripted { store: 2, ret: Ok(vec![]) },
        ]);
        // Proxy-targeted check: read slot 0 through the active
        // implementation after each frame.
        let encoded = checks::encode_abstract(SEL_GET, &[]).unwrap();
        register_check(&mut engine, proxy, SEL_RUN, proxy, &encoded).unwrap();
        let before = engine.state().state_digest();
        let out = run(&mut engine, proxy);
        assert!(!out.ok);
        assert_eq!(out.ret_data, MSG_CHECKS_MISMATCH);
        assert_eq!(engine.state().state_digest(), before);
    }

    #[test]
    fn agreed_failure_propagates_the_common_revert() {
        let (mut engine, proxy) = setup(vec![
            Scripted { store: 0, ret: Err(b"nope".to_vec()) },
            Scripted { store: 0, ret: Err(b"nope".to_vec()) },
        ]);
        let before = engine.state().state_digest();
        let out = run(&mut engine, proxy);
        assert!(!out.ok);
        assert_eq!(out.ret_data, b"nope");
        assert_eq!(engine.state().state_digest(), before);
    }

    #[test]
    fn non_final_frames_roll_back_exactly() {
        let (mut engine, proxy) = setup(vec![
            Scripted { store: 7, ret: Ok(vec![]) },
            Scripted { store: 7, ret: Ok(vec![]) },
            Scripted { store: 7, ret: Ok(vec![]) },
        ]);
        let events: Rc<RefCell<Vec<DelegateProbe>>> = Rc::default();
        let sink = Rc::clone(&events);
        engine.set_delegate_probe(Some(Box::new(move |e| sink.borrow_mut().push(e.clone()))));
        let out = run(&mut engine, proxy);
        assert!(out.ok);
        let events = events.borrow();
        assert_eq!(events.len(), 3);
        for event in events.iter() {
            if event.is_last {
                assert_ne!(event.digest_before, event.digest_after);
            } else {
                assert_eq!(event.digest_before, event.digest_after);
            }
        }
        assert_eq!(events[0].impl_index, 0);
        assert!(events[2].is_last);
    }

    #[test]
    fn empty_implementation_list_is_rejected() {
        let mut engine = Engine::new(GasSchedule::default());
        assert_eq!(
            deploy_proxy(&mut engine, actor(1), vec![], &[]).unwrap_err(),
            ProxyError::EmptyImplementationList
        );
    }

    #[test]
    fn unknown_implementation_is_rejected() {
        let mut engine = Engine::new(GasSchedule::default());
        assert_eq!(
            deploy_proxy(&mut engine, actor(1), vec![actor(9)], &[]).unwrap_err(),
            ProxyError::UnknownImplementation(actor(9))
        );
    }

    #[test]
    fn set_implementations_validates_and_replaces() {
        let (mut engine, proxy) = setup(vec![
            Scripted { store: 0, ret: Ok(b"a".to_vec()) },
            Scripted { store: 0, ret: Ok(b"b".to_vec()) },
        ]);
        // Disagreeing pair: currently diverges.
        assert!(!run(&mut engine, proxy).ok);
        let impls = implementations(&engine, proxy).unwrap();
        assert_eq!(
            set_implementations(&mut engine, proxy, vec![]).unwrap_err(),
            ProxyError::EmptyImplementationList
        );
        // Restrict to the first implementation alone: consistent again.
        set_implementations(&mut engine, proxy, vec![impls[0]]).unwrap();
        let out = run(&mut engine, proxy);
        assert!(out.ok);
        assert_eq!(out.ret_data, b"a");
    }

    #[test]
    fn register_check_requires_known_proxy() {
        let mut engine = Engine::new(GasSchedule::default());
        let encoded = checks::encode_abstract(SEL_GET, &[]).unwrap();
        assert_eq!(
            register_check(&mut engine, actor(5), SEL_RUN, actor(5), &encoded).unwrap_err(),
            ProxyError::UnknownProxy(actor(5))
        );
    }
}
