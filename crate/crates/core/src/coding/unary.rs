//! `a^n` as a two-rule PCFG: `r_0: S -> a S`, `r_1: S -> a`, with the
//! derivation `r_0^{n-1} r_1` range-coded under `π(r_0) = 1 - 1/n`,
//! `π(r_1) = 1/n`. The container spends `O(log n)` bits, against
//! `Θ(log n · log log n)` for the doubling SLP.

use crate::grammar::{Grammar, Pcfg, Symbol};

use super::container::{CompressedArtifact, Header, Method};
use super::range::{rc_decode, rc_encode, FrequencyModel};
use super::CodingError;

/// Rule probabilities `(π(r_0), π(r_1))` for `a^n`. A single `a` uses
/// `r_1` alone; it is coded with an even split since `π(r_0) = 0` has no
/// code space.
pub fn unary_probabilities(n: u64) -> (f64, f64) {
    if n <= 1 {
        (0.5, 0.5)
    } else {
        let p = 1.0 / n as f64;
        (1.0 - p, p)
    }
}

pub fn unary_grammar() -> Grammar {
    Grammar::new(
        b"a".to_vec(),
        vec![vec![
            vec![Symbol::Terminal(0), Symbol::Nonterminal(0)],
            vec![Symbol::Terminal(0)],
        ]],
        vec![Symbol::Nonterminal(0)],
    )
}

/// The unary grammar with the probabilities used for `a^n`.
pub fn unary_pcfg(n: u64) -> Pcfg {
    let (p0, p1) = if n <= 1 {
        (0.0, 1.0)
    } else {
        unary_probabilities(n)
    };
    Pcfg::explicit(unary_grammar(), vec![vec![p0, p1]])
}

/// `v_0 -> a`, `v_{i+1} -> v_i v_i`, start `[v_m]`: the smallest SLP for
/// `a^{2^m}`.
pub fn doubling_slp(m: u32) -> Grammar {
    let mut bodies = vec![vec![vec![Symbol::Terminal(0)]]];
    for i in 0..m {
        bodies.push(vec![vec![Symbol::Nonterminal(i), Symbol::Nonterminal(i)]]);
    }
    Grammar::new(b"a".to_vec(), bodies, vec![Symbol::Nonterminal(m)])
}

fn model(n: u64) -> FrequencyModel {
    let (p0, p1) = unary_probabilities(n);
    FrequencyModel::fixed(vec![p0, p1])
}

/// Encodes `a^n`, `n >= 1`.
pub fn unary_pcfg_compress(n: u64) -> CompressedArtifact {
    assert!(n >= 1, "a^0 has no derivation");
    let mut choices = vec![0u32; (n - 1) as usize];
    choices.push(1);
    let payload = rc_encode(&choices, &model(n)).expect("static binary model is valid");
    CompressedArtifact {
        method: Method::Unary,
        header: Header::Unary { n },
        grammar_bytes: Vec::new(),
        payload,
    }
}

pub(crate) fn unary_pcfg_decompress(n: u64, payload: &[u8]) -> Result<Vec<u8>, CodingError> {
    if n == 0 {
        return Err(CodingError::malformed("unary length must be positive"));
    }
    let count = usize::try_from(n).map_err(|_| CodingError::malformed("unary length too large"))?;
    let choices = rc_decode(payload, &model(n), count)?;
    let (text, used) = unary_grammar().expand_prefix(&choices)?;
    if used != choices.len() {
        return Err(CodingError::CorruptStream);
    }
    Ok(text)
}
