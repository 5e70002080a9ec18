use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap};

use super::ops::for_each_bigram;
use super::{Bigram, SymId};

/// Bigram frequencies kept in sync with a working sequence across
/// replacements.
///
/// Replacing `(x, y)` by `z` only changes counts of bigrams that contain
/// `x`, `y` or `z`: runs of any other symbol keep their length, and no
/// other adjacency is created or destroyed. So before a replacement every
/// bigram touching those symbols is dropped, and afterwards exactly those
/// bigrams are recounted.
#[derive(Debug, Default)]
pub(crate) struct FrequencyTable {
    counts: HashMap<Bigram, usize>,
    /// `(count desc, pair asc)`, so the first entry is the next major bigram.
    order: BTreeSet<(Reverse<usize>, Bigram)>,
}

impl FrequencyTable {
    pub(crate) fn build(seq: &[SymId]) -> Self {
        let mut t = FrequencyTable::default();
        for_each_bigram(seq, |b, c| t.add(b, c));
        t
    }

    pub(crate) fn max(&self) -> Option<(Bigram, usize)> {
        self.order
            .first()
            .filter(|(Reverse(c), _)| *c >= 2)
            .map(|&(Reverse(c), b)| (b, c))
    }

    #[cfg(test)]
    pub(crate) fn counts(&self) -> &HashMap<Bigram, usize> {
        &self.counts
    }

    fn add(&mut self, b: Bigram, c: usize) {
        let entry = self.counts.entry(b).or_insert(0);
        if *entry > 0 {
            self.order.remove(&(Reverse(*entry), b));
        }
        *entry += c;
        self.order.insert((Reverse(*entry), b));
    }

    fn drop_bigram(&mut self, b: Bigram) {
        if let Some(c) = self.counts.remove(&b) {
            self.order.remove(&(Reverse(c), b));
        }
    }

    /// Call on the sequence right before a replacement touching `touched`.
    pub(crate) fn forget_touching(&mut self, seq: &[SymId], touched: &[SymId]) {
        for w in seq.windows(2) {
            if touched.contains(&w[0]) || touched.contains(&w[1]) {
                self.drop_bigram((w[0], w[1]));
            }
        }
    }

    /// Call on the sequence right after a replacement touching `touched`.
    pub(crate) fn recount_touching(&mut self, seq: &[SymId], touched: &[SymId]) {
        let mut fresh: HashMap<Bigram, usize> = HashMap::new();
        for_each_bigram(seq, |b, c| {
            if touched.contains(&b.0) || touched.contains(&b.1) {
                *fresh.entry(b).or_insert(0) += c;
            }
        });
        for (b, c) in fresh {
            self.add(b, c);
        }
    }
}
