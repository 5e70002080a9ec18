//! Byte format for grammars in Re-Pair shape.
//!
//! ```text
//! varint |Σ|  ·  |Σ| terminal bytes  ·  varint P
//! P × ( varint left · varint right · flag byte [· varint left' · varint right'] )
//! varint start-length  ·  start ids
//! ```
//!
//! Ids `0..|Σ|` name the terminal-lifting nonterminals, `|Σ|..|Σ|+P` the
//! pair nonterminals in creation order. Pair bodies may only refer to
//! earlier ids, which keeps every decoded grammar acyclic.

use crate::grammar::Grammar;
use crate::repair::{PairGrammar, PairRule};

use super::varint;
use super::CodingError;

pub fn serialize_pairs(g: &PairGrammar) -> Vec<u8> {
    let mut out = Vec::new();
    varint::put(&mut out, g.terminals.len() as u64);
    out.extend_from_slice(&g.terminals);
    varint::put(&mut out, g.pairs.len() as u64);
    for p in &g.pairs {
        varint::put(&mut out, p.major.0.into());
        varint::put(&mut out, p.major.1.into());
        match p.minor {
            None => out.push(0),
            Some((x, y)) => {
                out.push(1);
                varint::put(&mut out, x.into());
                varint::put(&mut out, y.into());
            }
        }
    }
    varint::put(&mut out, g.start.len() as u64);
    for &s in &g.start {
        varint::put(&mut out, s.into());
    }
    out
}

/// Serializes a grammar whose rules are unit-terminal lifting rules followed
/// by binary pair rules.
pub fn serialize_grammar(g: &Grammar) -> Result<Vec<u8>, CodingError> {
    let pairs =
        PairGrammar::from_grammar(g).map_err(|e| CodingError::UnsupportedShape(e.to_string()))?;
    Ok(serialize_pairs(&pairs))
}

/// Parses a grammar from the front of `bytes`, returning it with the number
/// of bytes consumed.
pub fn deserialize_pairs_prefix(bytes: &[u8]) -> Result<(PairGrammar, usize), CodingError> {
    let mut cur = bytes;
    let sigma = varint::get_usize(&mut cur, "terminal count")?;
    if sigma > 256 {
        return Err(CodingError::malformed("more than 256 terminals"));
    }
    let terminals = varint::take(&mut cur, sigma, "terminal bytes")?.to_vec();
    let p = varint::get_usize(&mut cur, "pair-rule count")?;
    if p > cur.len() {
        return Err(CodingError::malformed("pair-rule count exceeds input"));
    }
    let mut pairs = Vec::with_capacity(p);
    for i in 0..p {
        let limit = (sigma + i) as u64;
        let id = |cur: &mut &[u8]| -> Result<u32, CodingError> {
            let v = varint::get(cur, "pair body")?;
            if v >= limit {
                return Err(CodingError::malformed("pair body refers to a later symbol"));
            }
            Ok(v as u32)
        };
        let major = (id(&mut cur)?, id(&mut cur)?);
        let flag = *varint::take(&mut cur, 1, "minor flag")?
            .first()
            .expect("one byte");
        let minor = match flag {
            0 => None,
            1 => Some((id(&mut cur)?, id(&mut cur)?)),
            _ => return Err(CodingError::malformed("minor flag must be 0 or 1")),
        };
        pairs.push(PairRule { major, minor });
    }
    let len = varint::get_usize(&mut cur, "start length")?;
    if len == 0 {
        return Err(CodingError::malformed("empty start sequence"));
    }
    if len > cur.len() {
        return Err(CodingError::malformed("start length exceeds input"));
    }
    let total = (sigma + p) as u64;
    let start = (0..len)
        .map(|_| {
            let v = varint::get(&mut cur, "start symbol")?;
            if v >= total {
                return Err(CodingError::malformed("start symbol out of range"));
            }
            Ok(v as u32)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let consumed = bytes.len() - cur.len();
    Ok((
        PairGrammar {
            terminals,
            pairs,
            start,
        },
        consumed,
    ))
}

/// Inverse of [`serialize_grammar`]; the whole input must be consumed.
pub fn deserialize_grammar(bytes: &[u8]) -> Result<Grammar, CodingError> {
    let (g, used) = deserialize_pairs_prefix(bytes)?;
    if used != bytes.len() {
        return Err(CodingError::malformed("trailing bytes after grammar"));
    }
    Ok(g.to_grammar())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibonacci::{fib_string, fibonacci_slp};
    use crate::grammar::Symbol;
    use crate::repair::repair_classic;

    #[test]
    fn abab_round_trip() {
        let g = repair_classic(b"abab").unwrap();
        let bytes = serialize_grammar(&g).unwrap();
        // |Σ|=2 'a' 'b' P=1 (0,1,major) len=2 [2,2]
        assert_eq!(bytes, vec![2, b'a', b'b', 1, 0, 1, 0, 2, 2, 2]);
        assert_eq!(deserialize_grammar(&bytes).unwrap(), g);
    }

    #[test]
    fn fibonacci_slp_is_small() {
        let g = fibonacci_slp(20);
        let bytes = serialize_grammar(&g).unwrap();
        assert!(bytes.len() <= 128, "{} bytes", bytes.len());
        let back = deserialize_grammar(&bytes).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.expand(&[]).unwrap(), fib_string(20));
    }

    #[test]
    fn empty_start_is_rejected() {
        let g = Grammar::new(b"a".to_vec(), vec![vec![vec![Symbol::Terminal(0)]]], vec![]);
        assert!(matches!(
            serialize_grammar(&g),
            Err(CodingError::UnsupportedShape(_))
        ));
        assert!(matches!(
            deserialize_grammar(&[1, b'a', 0, 0]),
            Err(CodingError::MalformedBytes(_))
        ));
    }

    #[test]
    fn malformed_inputs() {
        let cases: [&[u8]; 6] = [
            &[],
            &[2, b'a'],
            &[1, b'a', 1, 0, 1, 0, 1, 0], // body refers to itself
            &[1, b'a', 1, 0, 0, 2, 1, 1], // bad flag byte
            &[1, b'a', 0, 1, 1],          // start id out of range
            &[1, b'a', 0, 1, 0, 9],       // trailing byte
        ];
        for c in cases {
            assert!(
                matches!(deserialize_grammar(c), Err(CodingError::MalformedBytes(_))),
                "{c:?}"
            );
        }
    }
}
