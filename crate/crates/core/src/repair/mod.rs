//! Re-Pair and its PCFG variant with major/minor rule pairs.
//!
//! Symbols in a working sequence are dense ids: `0..|Σ|` are the
//! terminal-lifting nonterminals `v_a` in first-use order, and pair
//! nonterminals follow in creation order. Every tie between candidates is
//! broken toward the smallest id (or id pair).
//!
//! Each iteration costs time linear in the current sequence length, which
//! is fine for the benchmark-scale inputs this crate targets.
// TODO: per-bigram occurrence lists over a linked sequence would make an
// iteration proportional to the number of rewritten occurrences instead.

mod ops;
pub mod reference;
mod table;

use thiserror::Error;

use crate::grammar::{Grammar, Symbol};

pub use ops::{
    bigram_counts, find_max_bigram, find_max_context, find_min_bigram, replace, MinorCandidates,
};
use table::FrequencyTable;

pub type SymId = u32;
pub type Bigram = (SymId, SymId);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepairError {
    #[error("input text is empty")]
    EmptyInput,
    #[error("no rule {head} -> {body:?} exists for the requested flag")]
    RuleMissing { head: SymId, body: Bigram },
    #[error("grammar is not in Re-Pair shape: {0}")]
    UnsupportedShape(String),
}

/// Which rule of a pair nonterminal produced a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flag {
    Major,
    Minor,
}

impl Flag {
    pub fn bit(self) -> u32 {
        match self {
            Flag::Major => 0,
            Flag::Minor => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PairRule {
    pub major: Bigram,
    pub minor: Option<Bigram>,
}

impl PairRule {
    fn body(&self, flag: Flag) -> Option<Bigram> {
        match flag {
            Flag::Major => Some(self.major),
            Flag::Minor => self.minor,
        }
    }
}

/// A grammar in Re-Pair shape: `v_i -> terminals[i]` for `i < |Σ|`, then
/// pair rules with one or two binary bodies.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PairGrammar {
    pub terminals: Vec<u8>,
    pub pairs: Vec<PairRule>,
    pub start: Vec<SymId>,
}

impl PairGrammar {
    pub fn sigma(&self) -> SymId {
        self.terminals.len() as SymId
    }

    pub fn symbol_count(&self) -> usize {
        self.terminals.len() + self.pairs.len()
    }

    pub fn minor_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.minor.is_some()).count()
    }

    pub fn to_grammar(&self) -> Grammar {
        let n = Symbol::Nonterminal;
        let lifting = (0..self.terminals.len() as u32).map(|t| vec![vec![Symbol::Terminal(t)]]);
        let pairs = self.pairs.iter().map(|p| {
            std::iter::once(p.major)
                .chain(p.minor)
                .map(|(x, y)| vec![n(x), n(y)])
                .collect()
        });
        Grammar::new(
            self.terminals.clone(),
            lifting.chain(pairs).collect(),
            self.start.iter().map(|&s| n(s)).collect(),
        )
    }

    /// Recognizes the Re-Pair shape: the first `|Σ|` nonterminals each have
    /// the single rule `v_i -> t_i`, every later nonterminal has one or two
    /// bodies of two nonterminals created before it, and the start sequence
    /// holds nonterminals only.
    pub fn from_grammar(g: &Grammar) -> Result<Self, RepairError> {
        let shape = |msg: String| Err(RepairError::UnsupportedShape(msg));
        let sigma = g.terminals().len();
        if g.nonterminal_count() < sigma {
            return shape("fewer nonterminals than terminals".into());
        }
        for v in 0..sigma {
            match g.rules_of(v as u32) {
                [r] if r.body == [Symbol::Terminal(v as u32)] => {}
                _ => return shape(format!("v{v} is not the lifting rule of terminal {v}")),
            }
        }
        let mut pairs = Vec::with_capacity(g.nonterminal_count() - sigma);
        for v in sigma..g.nonterminal_count() {
            let mut bodies = g
                .rules_of(v as u32)
                .iter()
                .map(|r| match r.body.as_slice() {
                    [Symbol::Nonterminal(x), Symbol::Nonterminal(y)]
                        if (*x as usize) < v && (*y as usize) < v =>
                    {
                        Ok((*x, *y))
                    }
                    _ => Err(RepairError::UnsupportedShape(format!(
                        "rule {},{} is not a pair of earlier nonterminals",
                        v, r.choice_index
                    ))),
                });
            let major = match bodies.next() {
                Some(b) => b?,
                None => return shape(format!("v{v} has no rules")),
            };
            let minor = bodies.next().transpose()?;
            if bodies.next().is_some() {
                return shape(format!("v{v} has more than two rules"));
            }
            pairs.push(PairRule { major, minor });
        }
        let start = g
            .start()
            .iter()
            .map(|s| match *s {
                Symbol::Nonterminal(v) => Ok(v),
                Symbol::Terminal(_) => Err(RepairError::UnsupportedShape(
                    "terminal in start sequence".into(),
                )),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if start.is_empty() {
            return shape("empty start sequence".into());
        }
        Ok(PairGrammar {
            terminals: g.terminals().to_vec(),
            pairs,
            start,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Node {
    sym: SymId,
    flag: Flag,
    /// `u32::MAX` for leaves.
    left: u32,
    right: u32,
}

const LEAF: u32 = u32::MAX;

/// Working text of the construction: a token sequence where every token
/// remembers the derivation subtree it abbreviates.
#[derive(Clone, Debug)]
pub struct WorkingSequence {
    tokens: Vec<SymId>,
    roots: Vec<u32>,
    arena: Vec<Node>,
    terminals: Vec<u8>,
}

impl WorkingSequence {
    /// Replaces each byte `a` by its lifting nonterminal `v_a`.
    pub fn lift(text: &[u8]) -> Self {
        let mut ids = [u32::MAX; 256];
        let mut terminals = Vec::new();
        let mut tokens = Vec::with_capacity(text.len());
        let mut arena = Vec::with_capacity(text.len() * 2);
        for &c in text {
            if ids[c as usize] == u32::MAX {
                ids[c as usize] = terminals.len() as u32;
                terminals.push(c);
            }
            let sym = ids[c as usize];
            tokens.push(sym);
            arena.push(Node {
                sym,
                flag: Flag::Major,
                left: LEAF,
                right: LEAF,
            });
        }
        let roots = (0..text.len() as u32).collect();
        WorkingSequence {
            tokens,
            roots,
            arena,
            terminals,
        }
    }

    pub fn tokens(&self) -> &[SymId] {
        &self.tokens
    }

    pub fn terminals(&self) -> &[u8] {
        &self.terminals
    }

    pub fn sigma(&self) -> SymId {
        self.terminals.len() as SymId
    }

    /// Left-to-right, non-overlapping replacement of `b` by `v`, annotating
    /// every new token with `flag`. Returns the number of rewrites.
    pub fn replace(&mut self, b: Bigram, v: SymId, flag: Flag) -> usize {
        let n = self.tokens.len();
        let mut tokens = Vec::with_capacity(n);
        let mut roots = Vec::with_capacity(n);
        let mut rewrites = 0;
        let mut i = 0;
        while i < n {
            if i + 1 < n && (self.tokens[i], self.tokens[i + 1]) == b {
                self.arena.push(Node {
                    sym: v,
                    flag,
                    left: self.roots[i],
                    right: self.roots[i + 1],
                });
                tokens.push(v);
                roots.push(self.arena.len() as u32 - 1);
                rewrites += 1;
                i += 2;
            } else {
                tokens.push(self.tokens[i]);
                roots.push(self.roots[i]);
                i += 1;
            }
        }
        self.tokens = tokens;
        self.roots = roots;
        rewrites
    }

    /// Concatenation of the texts abbreviated by all tokens.
    pub fn flatten(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for &root in self.roots.iter().rev() {
            stack.push(root);
        }
        while let Some(id) = stack.pop() {
            let node = self.arena[id as usize];
            if node.left == LEAF {
                out.push(self.terminals[node.sym as usize]);
            } else {
                stack.push(node.right);
                stack.push(node.left);
            }
        }
        out
    }

    /// Flags of every node whose head satisfies `has_minor`, in pre-order
    /// over the forest rooted at the tokens.
    fn flags(&self, has_minor: impl Fn(SymId) -> bool) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack: Vec<u32> = self.roots.iter().rev().copied().collect();
        while let Some(id) = stack.pop() {
            let node = self.arena[id as usize];
            if node.left == LEAF {
                continue;
            }
            if has_minor(node.sym) {
                out.push(node.flag.bit());
            }
            stack.push(node.right);
            stack.push(node.left);
        }
        out
    }
}

/// Output of a Re-Pair run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairOutput {
    pub grammar: PairGrammar,
    /// Major (0) / minor (1) choice at every node whose head owns a minor
    /// rule, in left-most order. Empty for classic Re-Pair.
    pub flags: Vec<u32>,
}

/// Runs the construction loop. With `minor_rules` off this is classic
/// Re-Pair; with it on, every iteration may add one minor rule.
pub fn run(text: &[u8], minor_rules: bool) -> Result<RepairOutput, RepairError> {
    if text.is_empty() {
        return Err(RepairError::EmptyInput);
    }
    let mut ws = WorkingSequence::lift(text);
    let sigma = ws.sigma();
    let mut pairs: Vec<PairRule> = Vec::new();
    let mut table = FrequencyTable::build(ws.tokens());

    while let Some((major, _)) = table.max() {
        let v = sigma + pairs.len() as SymId;
        pairs.push(PairRule { major, minor: None });

        let touched = [major.0, major.1, v];
        table.forget_touching(ws.tokens(), &touched);
        ws.replace(major, v, Flag::Major);
        table.recount_touching(ws.tokens(), &touched);

        if minor_rules {
            let filter = MinorCandidates { sigma, exclude: v };
            let minor = find_max_context(ws.tokens(), v)
                .and_then(|c| find_min_bigram(ws.tokens(), c, major, filter));
            if let Some(minor) = minor {
                pairs.last_mut().expect("just pushed").minor = Some(minor);
                let touched = [minor.0, minor.1, v];
                table.forget_touching(ws.tokens(), &touched);
                ws.replace(minor, v, Flag::Minor);
                table.recount_touching(ws.tokens(), &touched);
            }
        }

        debug_assert_eq!(ws.flatten(), text, "working sequence lost text");
    }

    let flags = ws.flags(|s| s >= sigma && pairs[(s - sigma) as usize].minor.is_some());
    Ok(RepairOutput {
        grammar: PairGrammar {
            terminals: ws.terminals().to_vec(),
            pairs,
            start: ws.tokens().to_vec(),
        },
        flags,
    })
}

/// Classic Re-Pair: an SLG whose start sequence is the final working text.
pub fn repair_classic(text: &[u8]) -> Result<Grammar, RepairError> {
    run(text, false).map(|out| out.grammar.to_grammar())
}

/// Re-Pair with major/minor rule pairs, plus the flag sequence that selects
/// the original text.
pub fn repair_pcfg(text: &[u8]) -> Result<(Grammar, Vec<u32>), RepairError> {
    run(text, true).map(|out| (out.grammar.to_grammar(), out.flags))
}

/// Checks that `v` can legally stand for `b` under `flag`.
pub fn check_rule(g: &PairGrammar, v: SymId, b: Bigram, flag: Flag) -> Result<(), RepairError> {
    let missing = RepairError::RuleMissing { head: v, body: b };
    let idx = v.checked_sub(g.sigma()).ok_or(missing.clone())? as usize;
    match g.pairs.get(idx).and_then(|p| p.body(flag)) {
        Some(body) if body == b => Ok(()),
        _ => Err(missing),
    }
}

impl WorkingSequence {
    /// [`WorkingSequence::replace`] guarded by the grammar under
    /// construction: `v` must own a rule with body `b` for `flag`.
    pub fn replace_checked(
        &mut self,
        g: &PairGrammar,
        b: Bigram,
        v: SymId,
        flag: Flag,
    ) -> Result<usize, RepairError> {
        check_rule(g, v, b, flag)?;
        Ok(self.replace(b, v, flag))
    }
}
