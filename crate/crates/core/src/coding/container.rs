//! Self-describing compressed container and the compress/decompress entry
//! points for every method.
//!
//! ```text
//! "PCFG1" · method byte · method-specific header and body
//!   Repair      grammar
//!   PcfgRepair  grammar · varint flag-count · varint payload-len · payload
//!   FibG0/FibGk varint m · varint k · varint payload-len · payload
//!   Unary       varint n · varint payload-len · payload
//! ```

use std::fmt;
use std::str::FromStr;

use crate::fibonacci::{self, fib_len, NoiseKind};
use crate::repair;

use super::grammar_io::{deserialize_pairs_prefix, serialize_pairs};
use super::range::{rc_decode, rc_encode, FrequencyModel};
use super::unary;
use super::{varint, CodingError};

pub const MAGIC: &[u8; 5] = b"PCFG1";

/// Largest Fibonacci index a container may declare (`|Fib_40|` is about
/// 165 MB).
pub const MAX_FIB_INDEX: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Repair = 0,
    PcfgRepair = 1,
    FibG0 = 2,
    FibGk = 3,
    Unary = 4,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Repair,
        Method::PcfgRepair,
        Method::FibG0,
        Method::FibGk,
        Method::Unary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Repair => "repair",
            Method::PcfgRepair => "pcfg-repair",
            Method::FibG0 => "fib-g0",
            Method::FibGk => "fib-gk",
            Method::Unary => "unary",
        }
    }

    fn from_byte(b: u8) -> Option<Self> {
        Method::ALL.get(b as usize).copied()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = CodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| CodingError::MethodMismatch(format!("unknown method {s:?}")))
    }
}

/// A method together with the parameters it needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Repair,
    PcfgRepair,
    FibG0 { m: u32 },
    FibGk { m: u32, k: u8 },
    Unary,
}

impl Scheme {
    pub fn method(self) -> Method {
        match self {
            Scheme::Repair => Method::Repair,
            Scheme::PcfgRepair => Method::PcfgRepair,
            Scheme::FibG0 { .. } => Method::FibG0,
            Scheme::FibGk { .. } => Method::FibGk,
            Scheme::Unary => Method::Unary,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Header {
    Repair,
    PcfgRepair { flag_count: u64 },
    Fib { m: u32, k: u32 },
    Unary { n: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedArtifact {
    pub method: Method,
    pub header: Header,
    /// Serialized grammar; empty when the grammar is implied by the header.
    pub grammar_bytes: Vec<u8>,
    /// Range-coded choices; empty for plain Re-Pair.
    pub payload: Vec<u8>,
}

impl CompressedArtifact {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.grammar_bytes.len() + self.payload.len());
        out.extend_from_slice(MAGIC);
        out.push(self.method as u8);
        match self.header {
            Header::Repair => out.extend_from_slice(&self.grammar_bytes),
            Header::PcfgRepair { flag_count } => {
                out.extend_from_slice(&self.grammar_bytes);
                varint::put(&mut out, flag_count);
                self.put_payload(&mut out);
            }
            Header::Fib { m, k } => {
                varint::put(&mut out, m.into());
                varint::put(&mut out, k.into());
                self.put_payload(&mut out);
            }
            Header::Unary { n } => {
                varint::put(&mut out, n);
                self.put_payload(&mut out);
            }
        }
        out
    }

    fn put_payload(&self, out: &mut Vec<u8>) {
        varint::put(out, self.payload.len() as u64);
        out.extend_from_slice(&self.payload);
    }

    /// Size of the encoded container in bytes.
    pub fn total_size(&self) -> usize {
        self.to_bytes().len()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodingError> {
        let mut cur = bytes;
        if varint::take(&mut cur, MAGIC.len(), "magic")? != MAGIC {
            return Err(CodingError::malformed("bad magic"));
        }
        let b = varint::take(&mut cur, 1, "method byte")?[0];
        let method = Method::from_byte(b)
            .ok_or_else(|| CodingError::malformed(format!("unknown method byte {b}")))?;
        let mut grammar_bytes = Vec::new();
        let header = match method {
            Method::Repair | Method::PcfgRepair => {
                let (_, used) = deserialize_pairs_prefix(cur)?;
                grammar_bytes = varint::take(&mut cur, used, "grammar")?.to_vec();
                if method == Method::Repair {
                    Header::Repair
                } else {
                    Header::PcfgRepair {
                        flag_count: varint::get(&mut cur, "flag count")?,
                    }
                }
            }
            Method::FibG0 | Method::FibGk => {
                let m = varint::get(&mut cur, "m")?;
                let k = varint::get(&mut cur, "k")?;
                if m > u64::from(MAX_FIB_INDEX) {
                    return Err(CodingError::malformed(format!(
                        "Fibonacci index {m} too large"
                    )));
                }
                let k_ok = match method {
                    Method::FibG0 => k == 1,
                    _ => (1..=u64::from(fibonacci::MAX_K)).contains(&k),
                };
                if !k_ok {
                    return Err(CodingError::malformed(format!(
                        "k={k} invalid for {method}"
                    )));
                }
                Header::Fib {
                    m: m as u32,
                    k: k as u32,
                }
            }
            Method::Unary => Header::Unary {
                n: varint::get(&mut cur, "n")?,
            },
        };
        let payload = if method == Method::Repair {
            Vec::new()
        } else {
            let len = varint::get_usize(&mut cur, "payload length")?;
            varint::take(&mut cur, len, "payload")?.to_vec()
        };
        if !cur.is_empty() {
            return Err(CodingError::malformed("trailing bytes after container"));
        }
        Ok(CompressedArtifact {
            method,
            header,
            grammar_bytes,
            payload,
        })
    }
}

/// Compresses `text` with `scheme`.
pub fn compress(text: &[u8], scheme: Scheme) -> Result<CompressedArtifact, CodingError> {
    match scheme {
        Scheme::Repair | Scheme::PcfgRepair => {
            let minor = scheme == Scheme::PcfgRepair;
            let out = repair::run(text, minor)?;
            let grammar_bytes = serialize_pairs(&out.grammar);
            if !minor {
                return Ok(CompressedArtifact {
                    method: Method::Repair,
                    header: Header::Repair,
                    grammar_bytes,
                    payload: Vec::new(),
                });
            }
            let payload = rc_encode(&out.flags, &FrequencyModel::adaptive(2))?;
            Ok(CompressedArtifact {
                method: Method::PcfgRepair,
                header: Header::PcfgRepair {
                    flag_count: out.flags.len() as u64,
                },
                grammar_bytes,
                payload,
            })
        }
        Scheme::FibG0 { m } => fib_artifact(text, m, NoiseKind::Type0),
        Scheme::FibGk { m, k } => fib_artifact(text, m, NoiseKind::TypeK(k)),
        Scheme::Unary => {
            if text.is_empty() || text.iter().any(|&c| c != b'a') {
                return Err(CodingError::MethodMismatch(
                    "unary compression takes a non-empty run of 'a'".into(),
                ));
            }
            Ok(unary::unary_pcfg_compress(text.len() as u64))
        }
    }
}

fn fib_artifact(text: &[u8], m: u32, kind: NoiseKind) -> Result<CompressedArtifact, CodingError> {
    if m > MAX_FIB_INDEX {
        return Err(CodingError::MethodMismatch(format!(
            "Fibonacci index {m} exceeds {MAX_FIB_INDEX}"
        )));
    }
    let choices = fibonacci::choices_for_text(m, kind, text)?;
    let k = kind.alternatives();
    let payload = rc_encode(
        choices.as_slice(),
        &FrequencyModel::adaptive(k as usize + 1),
    )?;
    let method = match kind {
        NoiseKind::Type0 => Method::FibG0,
        NoiseKind::TypeK(_) => Method::FibGk,
    };
    Ok(CompressedArtifact {
        method,
        header: Header::Fib { m, k },
        grammar_bytes: Vec::new(),
        payload,
    })
}

/// Recovers the original text.
pub fn decompress(a: &CompressedArtifact) -> Result<Vec<u8>, CodingError> {
    match (a.method, &a.header) {
        (Method::Repair, Header::Repair) | (Method::PcfgRepair, Header::PcfgRepair { .. }) => {
            let (pairs, used) = deserialize_pairs_prefix(&a.grammar_bytes)?;
            if used != a.grammar_bytes.len() {
                return Err(CodingError::malformed("trailing bytes after grammar"));
            }
            let flag_count = match a.header {
                Header::PcfgRepair { flag_count } => usize::try_from(flag_count)
                    .map_err(|_| CodingError::malformed("flag count too large"))?,
                _ if pairs.minor_count() > 0 => {
                    return Err(CodingError::malformed(
                        "plain Re-Pair container holds minor rules",
                    ))
                }
                _ => 0,
            };
            let flags = rc_decode(&a.payload, &FrequencyModel::adaptive(2), flag_count)?;
            let (text, used) = pairs.to_grammar().expand_prefix(&flags)?;
            if used != flags.len() {
                return Err(CodingError::malformed(
                    "flag sequence longer than the derivation needs",
                ));
            }
            Ok(text)
        }
        (Method::FibG0 | Method::FibGk, &Header::Fib { m, k }) => {
            if m > MAX_FIB_INDEX {
                return Err(CodingError::malformed(format!(
                    "Fibonacci index {m} too large"
                )));
            }
            let kind = match a.method {
                Method::FibG0 if k == 1 => NoiseKind::Type0,
                Method::FibGk if (1..=u32::from(fibonacci::MAX_K)).contains(&k) => {
                    NoiseKind::TypeK(k as u8)
                }
                _ => {
                    return Err(CodingError::malformed(format!(
                        "k={k} invalid for {}",
                        a.method
                    )))
                }
            };
            let choices = rc_decode(
                &a.payload,
                &FrequencyModel::adaptive(k as usize + 1),
                fib_len(m),
            )?;
            let grammar = fibonacci::build_for(m, kind)?.grammar;
            Ok(grammar.expand(&choices)?)
        }
        (Method::Unary, &Header::Unary { n }) => unary::unary_pcfg_decompress(n, &a.payload),
        (method, header) => Err(CodingError::MethodMismatch(format!(
            "header {header:?} does not belong to method {method}"
        ))),
    }
}

pub fn decompress_bytes(bytes: &[u8]) -> Result<Vec<u8>, CodingError> {
    decompress(&CompressedArtifact::from_bytes(bytes)?)
}
