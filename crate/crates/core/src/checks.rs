//! Registered invariant checks and their abstract-argument encoding.
//!
//! A check is a read-only call executed after every implementation's
//! delegate frame. Its arguments are stored in abstract form and
//! materialized against the original call at execution time, so one
//! registration covers every future transaction through the proxy.
//!
//! Wire format of a registered check (all integers big-endian):
//!
//! ```text
//! selector(4) ‖ count(1) ‖ argument*
//! argument := 0x00 ‖ len(1)    ‖ bytes      static value
//!           | 0x01 ‖ offset(1) ‖ length(1)  slice of the original calldata
//!           | 0x02 ‖ kind(1)                environment value
//! ```
//!
//! Environment kinds: 0x00 sender, 0x01 value, 0x02 timestamp,
//! 0x03 block number. Decoding is strict: unknown tags, truncation, and
//! trailing bytes are all rejected.

use alloc::vec::Vec;
use core::fmt;

use crate::engine::{CallContext, Engine};
use crate::hash::keccak256_concat;
use crate::primitives::{Address, Word};

/// Marker byte prefixed to the payload of a check whose call failed, so a
/// reverting check still contributes deterministically to the fold.
pub const CHECK_FAILURE_MARKER: u8 = 0xFE;

const TAG_STATIC: u8 = 0x00;
const TAG_CALLDATA: u8 = 0x01;
const TAG_ENV: u8 = 0x02;

/// Environment values a check argument can reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvKind {
    Sender,
    Value,
    Timestamp,
    BlockNumber,
}

impl EnvKind {
    pub fn code(self) -> u8 {
        match self {
            EnvKind::Sender => 0x00,
            EnvKind::Value => 0x01,
            EnvKind::Timestamp => 0x02,
            EnvKind::BlockNumber => 0x03,
        }
    }

    pub fn from_code(code: u8) -> Result<Self, CheckError> {
        match code {
            0x00 => Ok(EnvKind::Sender),
            0x01 => Ok(EnvKind::Value),
            0x02 => Ok(EnvKind::Timestamp),
            0x03 => Ok(EnvKind::BlockNumber),
            other => Err(CheckError::UnknownEnvKind(other)),
        }
    }
}

/// One argument of a registered check, in abstract (pre-materialization)
/// form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbstractArgument {
    /// Fixed bytes copied verbatim.
    Static(Vec<u8>),
    /// `length` bytes of the original calldata starting at `offset`.
    CallData { offset: u8, length: u8 },
    /// A 32-byte word derived from the original call's environment.
    Env(EnvKind),
}

/// A registered check: read-only call of `selector` on `target` with
/// materialized `args`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckSpec {
    pub target: Address,
    pub selector: [u8; 4],
    pub args: Vec<AbstractArgument>,
}

/// Per-selector check lists for one proxy.
#[derive(Clone, Debug, Default)]
pub struct CheckRegistry {
    entries: Vec<([u8; 4], CheckSpec)>,
}

impl CheckRegistry {
    pub fn new() -> Self {
        CheckRegistry { entries: Vec::new() }
    }

    /// Appends a check to run after calls dispatching on `for_selector`.
    /// Order of registration is the order of execution.
    pub fn register(&mut self, for_selector: [u8; 4], spec: CheckSpec) {
        self.entries.push((for_selector, spec));
    }

    pub fn checks_for(&self, selector: [u8; 4]) -> Vec<CheckSpec> {
        self.entries
            .iter()
            .filter(|(sel, _)| *sel == selector)
            .map(|(_, spec)| spec.clone())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckError {
    /// A static value or calldata reference does not fit the one-byte
    /// fields of the wire format.
    ArgumentTooLarge,
    /// Input ended inside an argument.
    TruncatedEncoding,
    UnknownArgumentType(u8),
    UnknownEnvKind(u8),
    /// Bytes remained after the last declared argument.
    TrailingBytes,
    /// A calldata reference reaches past the original call's data.
    CallDataOutOfRange,
}

impl fmt::Display for CheckError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckError::ArgumentTooLarge => write!(f, "argument exceeds one-byte wire fields"),
            CheckError::TruncatedEncoding => write!(f, "encoding ends inside an argument"),
            CheckError::UnknownArgumentType(t) => write!(f, "unknown argument type tag {t:#04x}"),
            CheckError::UnknownEnvKind(k) => write!(f, "unknown environment kind {k:#04x}"),
            CheckError::TrailingBytes => write!(f, "trailing bytes after last argument"),
            CheckError::CallDataOutOfRange => write!(f, "calldata reference out of range"),
        }
    }
}

impl core::error::Error for CheckError {}

/// Encodes `selector` and `args` into the registration wire format.
pub fn encode_abstract(selector: [u8; 4], args: &[AbstractArgument]) -> Result<Vec<u8>, CheckError> {
    if args.len() > u8::MAX as usize {
        return Err(CheckError::ArgumentTooLarge);
    }
    let mut out = Vec::with_capacity(8 + args.len() * 4);
    out.extend_from_slice(&selector);
    out.push(args.len() as u8);
    for arg in args {
        match arg {
            AbstractArgument::Static(bytes) => {
                if bytes.len() > u8::MAX as usize {
                    return Err(CheckError::ArgumentTooLarge);
                }
                out.push(TAG_STATIC);
                out.push(bytes.len() as u8);
                out.extend_from_slice(bytes);
            }
            AbstractArgument::CallData { offset, length } => {
                out.push(TAG_CALLDATA);
                out.push(*offset);
                out.push(*length);
            }
            AbstractArgument::Env(kind) => {
                out.push(TAG_ENV);
                out.push(kind.code());
            }
        }
    }
    Ok(out)
}

/// Strict inverse of [`encode_abstract`].
pub fn decode_abstract(bytes: &[u8]) -> Result<([u8; 4], Vec<AbstractArgument>), CheckError> {
    if bytes.len() < 5 {
        return Err(CheckError::TruncatedEncoding);
    }
    let mut selector = [0u8; 4];
    selector.copy_from_slice(&bytes[..4]);
    let count = bytes[4] as usize;
    let mut pos = 5;
    let mut args = Vec::with_capacity(count);
    let take = |pos: &mut usize, n: usize| -> Result<usize, CheckError> {
        let start = *pos;
        let end = start.checked_add(n).ok_or(CheckError::TruncatedEncoding)?;
        if end > bytes.len() {
            return Err(CheckError::TruncatedEncoding);
        }
        *pos = end;
        Ok(start)
    };
    for _ in 0..count {
        let tag_at = take(&mut pos, 1)?;
        match bytes[tag_at] {
            TAG_STATIC => {
                let len_at = take(&mut pos, 1)?;
                let len = bytes[len_at] as usize;
                let content_at = take(&mut pos, len)?;
                args.push(AbstractArgument::Static(bytes[content_at..content_at + len].to_vec()));
            }
            TAG_CALLDATA => {
                let at = take(&mut pos, 2)?;
                args.push(AbstractArgument::CallData { offset: bytes[at], length: bytes[at + 1] });
            }
            TAG_ENV => {
                let at = take(&mut pos, 1)?;
                args.push(AbstractArgument::Env(EnvKind::from_code(bytes[at])?));
            }
            other => return Err(CheckError::UnknownArgumentType(other)),
        }
    }
    if pos != bytes.len() {
        return Err(CheckError::TrailingBytes);
    }
    Ok((selector, args))
}

/// Resolves a check's abstract arguments against the original call,
/// producing concrete calldata for the check call.
pub fn materialize(spec: &CheckSpec, ctx: &CallContext) -> Result<Vec<u8>, CheckError> {
    let mut out = Vec::with_capacity(4 + spec.args.len() * 32);
    out.extend_from_slice(&spec.selector);
    for arg in &spec.args {
        match arg {
            AbstractArgument::Static(bytes) => out.extend_from_slice(bytes),
            AbstractArgument::CallData { offset, length } => {
                let start = *offset as usize;
                let end = start + *length as usize;
                if end > ctx.calldata.len() {
                    return Err(CheckError::CallDataOutOfRange);
                }
                out.extend_from_slice(&ctx.calldata[start..end]);
            }
            AbstractArgument::Env(kind) => {
                let word = match kind {
                    EnvKind::Sender => Word::from_address(ctx.sender),
                    EnvKind::Value => Word::from_u256(ctx.value),
                    EnvKind::Timestamp => Word::from_u64(ctx.block_timestamp),
                    EnvKind::BlockNumber => Word::from_u64(ctx.block_number),
                };
                out.extend_from_slice(&word.0);
            }
        }
    }
    Ok(out)
}

/// Runs `specs` in order as read-only calls and returns one result payload
/// per check. A failed or unmaterializable check contributes
/// `0xFE ‖ payload` instead of aborting, so implementations that disagree
/// only in check behavior still produce comparable hashes.
///
/// Checks that target the proxy itself are routed to the currently active
/// implementation's code against the proxy's storage; the proxy has no
/// callable logic of its own for them to hit.
pub(crate) fn run_checks(
    engine: &mut Engine,
    specs: &[CheckSpec],
    ctx: &CallContext,
    proxy: Address,
    active_impl: Address,
) -> Vec<Vec<u8>> {
    let mut results = Vec::with_capacity(specs.len());
    for spec in specs {
        let data = match materialize(spec, ctx) {
            Ok(data) => data,
            Err(_) => {
                let mut payload = Vec::with_capacity(32);
                payload.push(CHECK_FAILURE_MARKER);
                payload.extend_from_slice(b"check argument out of range");
                results.push(payload);
                continue;
            }
        };
        let (ok, ret) = if spec.target == proxy {
            engine.readonly_delegate(proxy, proxy, active_impl, &data, ctx)
        } else {
            engine.readonly_call(proxy, spec.target, &data, ctx)
        };
        if ok {
            results.push(ret);
        } else {
            let mut payload = Vec::with_capacity(1 + ret.len());
            payload.push(CHECK_FAILURE_MARKER);
            payload.extend_from_slice(&ret);
            results.push(payload);
        }
    }
    results
}

/// Folds check results into one word: Keccak-256 over the concatenation of
/// `len(result) (4 bytes BE) ‖ result` per check, in execution order. No
/// results hashes to Keccak-256 of the empty string.
pub fn hash_checks(results: &[Vec<u8>]) -> Word {
    let mut parts: Vec<Vec<u8>> = Vec::with_capacity(results.len() * 2);
    for result in results {
        parts.push((result.len() as u32).to_be_bytes().to_vec());
        parts.push(result.clone());
    }
    let refs: Vec<&[u8]> = parts.iter().map(|p| p.as_slice()).collect();
    keccak256_concat(&refs)
}
