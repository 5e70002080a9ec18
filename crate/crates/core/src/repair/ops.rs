//! Sequence-level primitives shared by the Re-Pair engines.
//!
//! Bigram occurrences are counted left to right without overlap, which is
//! exactly how many tokens [`replace`] would rewrite: a run of `L` equal
//! symbols holds `L / 2` occurrences of `(s, s)`.

use std::collections::HashMap;

use super::{Bigram, SymId};

/// Calls `f(bigram, count)` once per run boundary and once per run of
/// length >= 2. Counts for the same bigram must be summed by the caller.
pub(crate) fn for_each_bigram(seq: &[SymId], mut f: impl FnMut(Bigram, usize)) {
    let mut i = 0;
    while i < seq.len() {
        let s = seq[i];
        let mut j = i + 1;
        while j < seq.len() && seq[j] == s {
            j += 1;
        }
        if j - i >= 2 {
            f((s, s), (j - i) / 2);
        }
        if j < seq.len() {
            f((s, seq[j]), 1);
        }
        i = j;
    }
}

/// Non-overlapping occurrence counts of every bigram in `seq`.
pub fn bigram_counts(seq: &[SymId]) -> HashMap<Bigram, usize> {
    let mut counts = HashMap::new();
    for_each_bigram(seq, |b, c| *counts.entry(b).or_insert(0) += c);
    counts
}

/// The most frequent bigram occurring at least twice, with its count. Ties
/// go to the smallest `(first, second)` pair.
pub fn find_max_bigram(seq: &[SymId]) -> Option<(Bigram, usize)> {
    bigram_counts(seq)
        .into_iter()
        .filter(|&(_, c)| c >= 2)
        .min_by_key(|&(b, c)| (std::cmp::Reverse(c), b))
}

/// Rewrites every occurrence of `b`, scanning left to right, as `v`;
/// `replace(aaaaa, aa, v) = vva`.
pub fn replace(seq: &[SymId], b: Bigram, v: SymId) -> Vec<SymId> {
    let mut out = Vec::with_capacity(seq.len());
    let mut i = 0;
    while i < seq.len() {
        if i + 1 < seq.len() && (seq[i], seq[i + 1]) == b {
            out.push(v);
            i += 2;
        } else {
            out.push(seq[i]);
            i += 1;
        }
    }
    out
}

/// The symbol most often found immediately before an occurrence of `v`.
/// Ties go to the smallest id.
pub fn find_max_context(seq: &[SymId], v: SymId) -> Option<SymId> {
    let mut counts: HashMap<SymId, usize> = HashMap::new();
    for w in seq.windows(2) {
        if w[1] == v {
            *counts.entry(w[0]).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .min_by_key(|&(s, c)| (std::cmp::Reverse(c), s))
        .map(|(s, _)| s)
}

/// Candidate filter of `find_min_bigram`.
#[derive(Clone, Copy, Debug)]
pub struct MinorCandidates {
    /// Ids below this are the terminal-lifting nonterminals `V_Σ`.
    pub sigma: SymId,
    /// Candidates containing this symbol are rejected.
    pub exclude: SymId,
}

impl MinorCandidates {
    fn accepts(&self, major: Bigram, cand: Bigram) -> bool {
        let (x, y) = major;
        let (cx, cy) = cand;
        if cand == major || cx == self.exclude || cy == self.exclude {
            return false;
        }
        (cx == x && cy < self.sigma) || (cy == y && cx < self.sigma)
    }
}

/// Among bigrams found immediately after an occurrence of `context` that
/// differ from `major` in exactly one position, where the differing symbol is
/// in `V_Σ`, the least frequent one. Ties go to the smallest pair.
pub fn find_min_bigram(
    seq: &[SymId],
    context: SymId,
    major: Bigram,
    filter: MinorCandidates,
) -> Option<Bigram> {
    let mut counts: HashMap<Bigram, usize> = HashMap::new();
    for w in seq.windows(3) {
        if w[0] == context {
            let cand = (w[1], w[2]);
            if filter.accepts(major, cand) {
                *counts.entry(cand).or_insert(0) += 1;
            }
        }
    }
    counts
        .into_iter()
        .min_by_key(|&(b, c)| (c, b))
        .map(|(b, _)| b)
}
