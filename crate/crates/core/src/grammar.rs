//! Context-free grammars with a start *sequence*, their probabilistic
//! extension, and left-most expansion driven by a choice sequence.
//!
//! A classic start symbol is the length-1 start sequence. Left-most order is
//! pre-order, left-to-right traversal of the derivation forest rooted at the
//! start sequence; every routine in this module walks that order with an
//! explicit stack so that deep (e.g. right-recursive) derivations do not
//! overflow the call stack.

use std::fmt;

use thiserror::Error;

/// A terminal or nonterminal, identified by its index in the owning grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Terminal(u32),
    Nonterminal(u32),
}

impl Symbol {
    pub fn t(id: u32) -> Self {
        Symbol::Terminal(id)
    }

    pub fn n(id: u32) -> Self {
        Symbol::Nonterminal(id)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Terminal(id) => write!(f, "t{id}"),
            Symbol::Nonterminal(id) => write!(f, "v{id}"),
        }
    }
}

/// Identifies rule `choice` of nonterminal `head`, i.e. `r_{head,choice}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleRef {
    pub head: u32,
    pub choice: u32,
}

impl RuleRef {
    pub fn new(head: u32, choice: u32) -> Self {
        RuleRef { head, choice }
    }
}

impl fmt::Display for RuleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{},{}", self.head, self.choice)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: u32,
    pub body: Vec<Symbol>,
    /// Ordinal of this rule among the rules sharing its head.
    pub choice_index: u32,
}

/// Rule-choice indices taken at ambiguous heads (those with more than one
/// rule), in left-most order. Unambiguous expansions carry no information
/// and are not recorded.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ChoiceSequence(pub Vec<u32>);

impl ChoiceSequence {
    pub fn new(choices: Vec<u32>) -> Self {
        ChoiceSequence(choices)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for ChoiceSequence {
    fn from(v: Vec<u32>) -> Self {
        ChoiceSequence(v)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("choice sequence exhausted after {consumed} entries while expanding v{head}")]
    ChoiceUnderflow { head: u32, consumed: usize },
    #[error("choice {choice} at position {position} is out of range for v{head} ({rules} rules)")]
    ChoiceOutOfRange {
        head: u32,
        choice: u32,
        rules: usize,
        position: usize,
    },
    #[error("nonterminal v{head} has no rules")]
    EmptyDerivation { head: u32 },
    #[error("symbol {0} is out of bounds")]
    SymbolOutOfBounds(Symbol),
    #[error("unknown rule {0}")]
    UnknownRule(RuleRef),
    #[error("probability table does not match the grammar's rule layout")]
    ProbabilityShape,
}

/// One way in which a grammar (or its probability table) breaks the data
/// model's invariants.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    SymbolOutOfBounds {
        rule: Option<RuleRef>,
        symbol: Symbol,
    },
    NoRules {
        head: u32,
    },
    EmptyBody {
        rule: RuleRef,
    },
    EmptyStart,
    /// The nonterminal cannot derive any terminal string.
    Unproductive {
        head: u32,
    },
    ProbSumViolation {
        head: u32,
        sum: f64,
    },
    ProbOutOfRange {
        rule: RuleRef,
        prob: f64,
    },
    ProbShape {
        head: u32,
    },
}

/// `G = (Σ, V, R, S)` with `S` generalized to a start sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grammar {
    terminals: Vec<u8>,
    rules: Vec<Vec<Rule>>,
    start: Vec<Symbol>,
}

impl Grammar {
    /// Builds a grammar from per-nonterminal rule bodies; `bodies[v][j]` is
    /// the body of `r_{v,j}`. No validation happens here, see [`validate`].
    pub fn new(terminals: Vec<u8>, bodies: Vec<Vec<Vec<Symbol>>>, start: Vec<Symbol>) -> Self {
        let rules = bodies
            .into_iter()
            .enumerate()
            .map(|(head, alts)| {
                alts.into_iter()
                    .enumerate()
                    .map(|(choice, body)| Rule {
                        head: head as u32,
                        body,
                        choice_index: choice as u32,
                    })
                    .collect()
            })
            .collect();
        Grammar {
            terminals,
            rules,
            start,
        }
    }

    pub fn terminals(&self) -> &[u8] {
        &self.terminals
    }

    pub fn nonterminal_count(&self) -> usize {
        self.rules.len()
    }

    pub fn rules_of(&self, head: u32) -> &[Rule] {
        self.rules.get(head as usize).map_or(&[], |r| r.as_slice())
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().flatten()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.iter().map(Vec::len).sum()
    }

    pub fn rule(&self, r: RuleRef) -> Option<&Rule> {
        self.rules.get(r.head as usize)?.get(r.choice as usize)
    }

    pub fn start(&self) -> &[Symbol] {
        &self.start
    }

    /// Every nonterminal has exactly one rule.
    pub fn is_slg(&self) -> bool {
        self.rules.iter().all(|r| r.len() == 1)
    }

    /// Chomsky normal form relative to a start sequence: every body is a
    /// single terminal or exactly two nonterminals.
    pub fn is_cnf(&self) -> bool {
        self.rules().all(|r| {
            matches!(
                r.body.as_slice(),
                [Symbol::Terminal(_)] | [Symbol::Nonterminal(_), Symbol::Nonterminal(_)]
            )
        })
    }

    fn in_bounds(&self, s: Symbol) -> bool {
        match s {
            Symbol::Terminal(id) => (id as usize) < self.terminals.len(),
            Symbol::Nonterminal(id) => (id as usize) < self.rules.len(),
        }
    }

    /// Lists every invariant violation; an empty list means the grammar is
    /// well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.start.is_empty() {
            out.push(Violation::EmptyStart);
        }
        for &s in &self.start {
            if !self.in_bounds(s) {
                out.push(Violation::SymbolOutOfBounds {
                    rule: None,
                    symbol: s,
                });
            }
        }
        for (head, alts) in self.rules.iter().enumerate() {
            if alts.is_empty() {
                out.push(Violation::NoRules { head: head as u32 });
            }
            for r in alts {
                let rr = RuleRef::new(r.head, r.choice_index);
                if r.body.is_empty() {
                    out.push(Violation::EmptyBody { rule: rr });
                }
                for &s in &r.body {
                    if !self.in_bounds(s) {
                        out.push(Violation::SymbolOutOfBounds {
                            rule: Some(rr),
                            symbol: s,
                        });
                    }
                }
            }
        }
        if out.is_empty() {
            out.extend(
                self.unproductive()
                    .into_iter()
                    .map(|head| Violation::Unproductive { head }),
            );
        }
        out
    }

    /// Nonterminals that cannot derive a terminal string (least fixed point).
    fn unproductive(&self) -> Vec<u32> {
        let n = self.rules.len();
        let mut productive = vec![false; n];
        let mut changed = true;
        while changed {
            changed = false;
            for (head, alts) in self.rules.iter().enumerate() {
                if productive[head] {
                    continue;
                }
                let ok = alts.iter().any(|r| {
                    r.body.iter().all(|s| match *s {
                        Symbol::Terminal(_) => true,
                        Symbol::Nonterminal(v) => productive[v as usize],
                    })
                });
                if ok {
                    productive[head] = true;
                    changed = true;
                }
            }
        }
        (0..n as u32).filter(|&v| !productive[v as usize]).collect()
    }

    /// Terminal string of the left-most derivation selected by `choices`.
    /// Trailing unused choices are ignored; use [`Grammar::expand_prefix`] to
    /// learn how many were consumed.
    pub fn expand(&self, choices: &[u32]) -> Result<Vec<u8>, GrammarError> {
        self.expand_prefix(choices).map(|(text, _)| text)
    }

    /// Like [`Grammar::expand`], also returning the number of choices consumed.
    pub fn expand_prefix(&self, choices: &[u32]) -> Result<(Vec<u8>, usize), GrammarError> {
        let mut text = Vec::new();
        let consumed = self.walk(choices, |_, _| {}, |t| text.push(t))?;
        Ok((text, consumed))
    }

    /// The complete left-most derivation (ambiguous and unambiguous rule
    /// applications) selected by `choices`.
    pub fn full_derivation(&self, choices: &[u32]) -> Result<Vec<RuleRef>, GrammarError> {
        let mut rho = Vec::new();
        self.walk(choices, |r, _| rho.push(r), |_| {})?;
        Ok(rho)
    }

    /// Applies `rho` by left-most rewriting from the start sequence and
    /// returns the derived terminal string. Errors if a rule's head is not
    /// the left-most nonterminal at that step, or if nonterminals remain.
    pub fn apply_leftmost(&self, rho: &[RuleRef]) -> Result<Vec<u8>, GrammarError> {
        let mut text = Vec::new();
        let mut stack: Vec<Symbol> = self.start.iter().rev().copied().collect();
        let mut steps = rho.iter();
        while let Some(sym) = stack.pop() {
            match sym {
                Symbol::Terminal(t) => text.push(self.terminal_byte(t)?),
                Symbol::Nonterminal(v) => {
                    let r = *steps.next().ok_or(GrammarError::ChoiceUnderflow {
                        head: v,
                        consumed: rho.len(),
                    })?;
                    if r.head != v {
                        return Err(GrammarError::UnknownRule(r));
                    }
                    let rule = self.rule(r).ok_or(GrammarError::UnknownRule(r))?;
                    stack.extend(rule.body.iter().rev());
                }
            }
        }
        match steps.next() {
            Some(&extra) => Err(GrammarError::UnknownRule(extra)),
            None => Ok(text),
        }
    }

    /// Projects a full derivation onto its ambiguous steps.
    pub fn extract_choices(&self, rho: &[RuleRef]) -> ChoiceSequence {
        rho.iter()
            .filter(|r| self.rules_of(r.head).len() > 1)
            .map(|r| r.choice)
            .collect::<Vec<_>>()
            .into()
    }

    fn terminal_byte(&self, t: u32) -> Result<u8, GrammarError> {
        self.terminals
            .get(t as usize)
            .copied()
            .ok_or(GrammarError::SymbolOutOfBounds(Symbol::Terminal(t)))
    }

    /// Pre-order walk of the derivation forest; calls `on_rule` for every
    /// rule application and `on_terminal` for every emitted byte. Returns
    /// the number of choices consumed.
    fn walk(
        &self,
        choices: &[u32],
        mut on_rule: impl FnMut(RuleRef, &Rule),
        mut on_terminal: impl FnMut(u8),
    ) -> Result<usize, GrammarError> {
        let mut stack: Vec<Symbol> = self.start.iter().rev().copied().collect();
        let mut next = 0usize;
        while let Some(sym) = stack.pop() {
            match sym {
                Symbol::Terminal(t) => on_terminal(self.terminal_byte(t)?),
                Symbol::Nonterminal(v) => {
                    let alts = self
                        .rules
                        .get(v as usize)
                        .ok_or(GrammarError::SymbolOutOfBounds(sym))?;
                    let rule = match alts.len() {
                        0 => return Err(GrammarError::EmptyDerivation { head: v }),
                        1 => &alts[0],
                        n => {
                            let &c = choices.get(next).ok_or(GrammarError::ChoiceUnderflow {
                                head: v,
                                consumed: next,
                            })?;
                            let rule =
                                alts.get(c as usize).ok_or(GrammarError::ChoiceOutOfRange {
                                    head: v,
                                    choice: c,
                                    rules: n,
                                    position: next,
                                })?;
                            next += 1;
                            rule
                        }
                    };
                    on_rule(RuleRef::new(v, rule.choice_index), rule);
                    stack.extend(rule.body.iter().rev());
                }
            }
        }
        Ok(next)
    }
}

/// Rule probabilities, either an explicit table or learned online by the
/// entropy coder.
#[derive(Clone, Debug, PartialEq)]
pub enum RuleProbabilities {
    /// Natural-log probabilities, laid out like the grammar's rule lists.
    Explicit(Vec<Vec<f64>>),
    Adaptive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pcfg {
    pub grammar: Grammar,
    pub probs: RuleProbabilities,
}

/// Tolerance on `Σ_{r ∈ R_v} π(r) = 1`.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

impl Pcfg {
    /// `probs[v][j]` is the linear probability of `r_{v,j}`; stored in
    /// log-space.
    pub fn explicit(grammar: Grammar, probs: Vec<Vec<f64>>) -> Self {
        let logs = probs
            .into_iter()
            .map(|row| row.into_iter().map(f64::ln).collect())
            .collect();
        Pcfg {
            grammar,
            probs: RuleProbabilities::Explicit(logs),
        }
    }

    pub fn adaptive(grammar: Grammar) -> Self {
        Pcfg {
            grammar,
            probs: RuleProbabilities::Adaptive,
        }
    }

    pub fn log_prob(&self, r: RuleRef) -> Result<f64, GrammarError> {
        let RuleProbabilities::Explicit(table) = &self.probs else {
            return Err(GrammarError::ProbabilityShape);
        };
        self.grammar.rule(r).ok_or(GrammarError::UnknownRule(r))?;
        table
            .get(r.head as usize)
            .and_then(|row| row.get(r.choice as usize))
            .copied()
            .ok_or(GrammarError::ProbabilityShape)
    }

    /// Natural log of `π(r_1 … r_m)`.
    pub fn derivation_log_probability(&self, rho: &[RuleRef]) -> Result<f64, GrammarError> {
        rho.iter()
            .try_fold(0.0, |acc, &r| Ok(acc + self.log_prob(r)?))
    }

    /// `π(r_1 … r_m) = π(r_1) ⋯ π(r_m)`.
    pub fn derivation_probability(&self, rho: &[RuleRef]) -> Result<f64, GrammarError> {
        self.derivation_log_probability(rho).map(f64::exp)
    }

    /// Grammar violations plus probability-table violations.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.grammar.validate();
        let RuleProbabilities::Explicit(table) = &self.probs else {
            return out;
        };
        for head in 0..self.grammar.nonterminal_count() {
            let alts = self.grammar.rules_of(head as u32);
            let Some(row) = table.get(head).filter(|row| row.len() == alts.len()) else {
                out.push(Violation::ProbShape { head: head as u32 });
                continue;
            };
            let mut sum = 0.0;
            for (j, &lp) in row.iter().enumerate() {
                let p = lp.exp();
                if !(0.0..=1.0).contains(&p) || lp.is_nan() {
                    out.push(Violation::ProbOutOfRange {
                        rule: RuleRef::new(head as u32, j as u32),
                        prob: p,
                    });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
                out.push(Violation::ProbSumViolation {
                    head: head as u32,
                    sum,
                });
            }
        }
        if table.len() > self.grammar.nonterminal_count() {
            out.push(Violation::ProbShape {
                head: self.grammar.nonterminal_count() as u32,
            });
        }
        out
    }
}
