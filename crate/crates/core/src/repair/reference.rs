//! Straightforward Re-Pair used as a differential oracle for [`super::run`].
//!
//! Every iteration recounts every distinct bigram by simulating the
//! left-to-right replacement scan, and derivation subtrees are plain boxed
//! trees. Quadratic and then some; meant for tests and benchmarks only.

use super::{Bigram, PairGrammar, PairRule, RepairError, RepairOutput, SymId};

enum Tree {
    Leaf,
    Node {
        sym: SymId,
        minor: bool,
        kids: Box<(Tree, Tree)>,
    },
}

fn scan_count(tokens: &[(SymId, Tree)], b: Bigram) -> usize {
    let (mut i, mut n) = (0, 0);
    while i + 1 < tokens.len() {
        if (tokens[i].0, tokens[i + 1].0) == b {
            n += 1;
            i += 2;
        } else {
            i += 1;
        }
    }
    n
}

fn max_bigram(tokens: &[(SymId, Tree)]) -> Option<Bigram> {
    let mut best: Option<(usize, Bigram)> = None;
    let mut seen = std::collections::BTreeSet::new();
    for w in tokens.windows(2) {
        seen.insert((w[0].0, w[1].0));
    }
    // BTreeSet iterates in ascending pair order, so strict `>` keeps the
    // smallest pair among equal counts.
    for b in seen {
        let c = scan_count(tokens, b);
        if c >= 2 && best.is_none_or(|(bc, _)| c > bc) {
            best = Some((c, b));
        }
    }
    best.map(|(_, b)| b)
}

fn rewrite(tokens: Vec<(SymId, Tree)>, b: Bigram, v: SymId, minor: bool) -> Vec<(SymId, Tree)> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut it = tokens.into_iter().peekable();
    while let Some((s, t)) = it.next() {
        if it.peek().is_some_and(|(n, _)| (s, *n) == b) {
            let (_, right) = it.next().expect("peeked");
            out.push((
                v,
                Tree::Node {
                    sym: v,
                    minor,
                    kids: Box::new((t, right)),
                },
            ));
        } else {
            out.push((s, t));
        }
    }
    out
}

fn context_of(tokens: &[(SymId, Tree)], v: SymId) -> Option<SymId> {
    let mut counts = std::collections::BTreeMap::new();
    for w in tokens.windows(2) {
        if w[1].0 == v {
            *counts.entry(w[0].0).or_insert(0usize) += 1;
        }
    }
    let best = counts.values().copied().max()?;
    counts.into_iter().find(|&(_, c)| c == best).map(|(s, _)| s)
}

fn minor_bigram(
    tokens: &[(SymId, Tree)],
    c: SymId,
    (x, y): Bigram,
    sigma: SymId,
    v: SymId,
) -> Option<Bigram> {
    let mut counts = std::collections::BTreeMap::new();
    for w in tokens.windows(3) {
        if w[0].0 != c {
            continue;
        }
        let (a, b) = (w[1].0, w[2].0);
        let one_off = (a == x && b != y && b < sigma) || (b == y && a != x && a < sigma);
        if one_off && a != v && b != v {
            *counts.entry((a, b)).or_insert(0usize) += 1;
        }
    }
    let least = counts.values().copied().min()?;
    counts
        .into_iter()
        .find(|&(_, n)| n == least)
        .map(|(b, _)| b)
}

fn emit_flags(t: &Tree, has_minor: &dyn Fn(SymId) -> bool, out: &mut Vec<u32>) {
    if let Tree::Node { sym, minor, kids } = t {
        if has_minor(*sym) {
            out.push(u32::from(*minor));
        }
        emit_flags(&kids.0, has_minor, out);
        emit_flags(&kids.1, has_minor, out);
    }
}

/// Same contract as [`super::run`].
pub fn run(text: &[u8], minor_rules: bool) -> Result<RepairOutput, RepairError> {
    if text.is_empty() {
        return Err(RepairError::EmptyInput);
    }
    let mut terminals: Vec<u8> = Vec::new();
    let mut tokens: Vec<(SymId, Tree)> = Vec::new();
    for &c in text {
        let id = match terminals.iter().position(|&t| t == c) {
            Some(i) => i,
            None => {
                terminals.push(c);
                terminals.len() - 1
            }
        };
        tokens.push((id as SymId, Tree::Leaf));
    }
    let sigma = terminals.len() as SymId;
    let mut pairs = Vec::new();
    while let Some(b) = max_bigram(&tokens) {
        let v = sigma + pairs.len() as SymId;
        tokens = rewrite(tokens, b, v, false);
        let mut rule = PairRule {
            major: b,
            minor: None,
        };
        if minor_rules {
            if let Some(b2) =
                context_of(&tokens, v).and_then(|c| minor_bigram(&tokens, c, b, sigma, v))
            {
                tokens = rewrite(tokens, b2, v, true);
                rule.minor = Some(b2);
            }
        }
        pairs.push(rule);
    }
    let has_minor = |s: SymId| s >= sigma && pairs[(s - sigma) as usize].minor.is_some();
    let mut flags = Vec::new();
    for (_, t) in &tokens {
        emit_flags(t, &has_minor, &mut flags);
    }
    Ok(RepairOutput {
        grammar: PairGrammar {
            terminals,
            pairs,
            start: tokens.iter().map(|(s, _)| *s).collect(),
        },
        flags,
    })
}
