//! Entropy coding, grammar serialization and the compressed container.

pub mod container;
pub mod grammar_io;
pub mod range;
pub mod unary;
mod varint;

use thiserror::Error;

use crate::fibonacci::FibError;
use crate::grammar::GrammarError;
use crate::repair::RepairError;

pub use container::{
    compress, decompress, decompress_bytes, CompressedArtifact, Header, Method, Scheme,
};
pub use grammar_io::{deserialize_grammar, serialize_grammar};
pub use range::{rc_decode, rc_encode, FrequencyModel};
pub use unary::{doubling_slp, unary_pcfg_compress};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodingError {
    #[error("symbol {symbol} at position {position} is outside the alphabet of {alphabet}")]
    SymbolOutOfRange {
        position: usize,
        symbol: u32,
        alphabet: usize,
    },
    #[error("invalid frequency model: {0}")]
    InvalidModel(String),
    #[error("range-coded stream ended early")]
    TruncatedStream,
    #[error("range-coded stream is corrupt")]
    CorruptStream,
    #[error("malformed input: {0}")]
    MalformedBytes(String),
    #[error("unsupported grammar shape: {0}")]
    UnsupportedShape(String),
    #[error("method mismatch: {0}")]
    MethodMismatch(String),
    #[error(transparent)]
    Fib(#[from] FibError),
    #[error(transparent)]
    Repair(#[from] RepairError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

impl CodingError {
    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        CodingError::MalformedBytes(msg.into())
    }
}
