//! Lossless text compression with probabilistic context-free grammars.
//!
//! A text is stored as a grammar that derives it (not necessarily uniquely)
//! together with the range-coded choices its left-most derivation makes at
//! ambiguous nonterminals. Plain straight-line grammars are the special case
//! with no choices at all.
//!
//! - [`grammar`]: grammars with a start sequence, PCFGs, left-most expansion.
//! - [`fibonacci`]: Fibonacci strings, substitution noise, `G_0` / `G_k`.
//! - [`repair`]: classic Re-Pair and the major/minor PCFG variant.
//! - [`coding`]: range coder, grammar format, container, `a^n` construction.
//! - [`bench`]: sweep harness producing compression-ratio CSVs.

pub mod bench;
pub mod coding;
pub mod fibonacci;
pub mod grammar;
pub mod repair;

pub use coding::{compress, decompress, CodingError, CompressedArtifact, Method, Scheme};
pub use grammar::{ChoiceSequence, Grammar, Pcfg, RuleRef, Symbol};
