//! Crate-wide error type.

use crate::model::{Addr, AllocationScheme, ArrayId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{kind} payload {payload:#x} is out of encodable range")]
    EncodingOutOfRange { kind: &'static str, payload: u64 },

    #[error("address {addr} is outside capacity {capacity}")]
    AddressOutOfRange { addr: Addr, capacity: u64 },

    #[error("array {array} is absent under the {scheme} scheme")]
    ArrayAbsent {
        array: ArrayId,
        scheme: AllocationScheme,
    },

    #[error("two-cue query names array {array} twice")]
    SameArrayQuery { array: ArrayId },

    #[error("cursor is stale: the fabric was written after it was created")]
    StaleCursor,

    #[error("row {0} is not allocated")]
    NotAllocated(Addr),

    #[error("row {0} is not a headnode")]
    NotHeadnode(Addr),

    #[error("invalid target for {field}: {detail}")]
    BadTarget { field: &'static str, detail: String },

    #[error("out of memory: {required} rows required, capacity is {capacity}")]
    OutOfMemory { required: u64, capacity: u64 },

    #[error("corrupt structure at {at}: {reason}")]
    CorruptStructure { at: Addr, reason: &'static str },

    #[error("database fails its structural invariants ({count} violations)")]
    InvariantViolations { count: usize },

    #[error("{field} value {value} is outside its representable range")]
    BadUniversal { field: &'static str, value: f64 },

    #[error("invalid slipnet description: {0}")]
    InvalidSpec(String),

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: u32, col: u32, msg: String },

    #[error("bad image magic (expected VIEWSDB1)")]
    BadMagic,

    #[error("truncated or oversized image: expected {expected} bytes, got {got}")]
    ImageSize { expected: usize, got: usize },

    #[error("malformed image: {0}")]
    ImageFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
