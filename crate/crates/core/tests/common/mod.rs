#![allow(dead_code)]

use pcfg_compress::grammar::{Grammar, Pcfg, RuleRef, Symbol};

/// Terminals a b c d z (ids 0..5); nonterminals v1..v9 are ids 0..9 and the
/// start head S is id 9.
pub fn example_grammar() -> Grammar {
    let (t, n) = (Symbol::t, |i: u32| Symbol::n(i - 1));
    let bodies = vec![
        vec![vec![t(0)]],                         // v1 -> a
        vec![vec![t(1)]],                         // v2 -> b
        vec![vec![t(2)]],                         // v3 -> c
        vec![vec![t(3)]],                         // v4 -> d
        vec![vec![t(4)]],                         // v5 -> z
        vec![vec![n(1), n(2)], vec![n(5), n(2)]], // v6 -> v1 v2 | v5 v2
        vec![vec![n(3), n(4)]],                   // v7 -> v3 v4
        vec![vec![n(6), n(7)]],                   // v8 -> v6 v7
        vec![vec![n(8), n(9)], vec![t(4)]],       // v9 -> v8 v9 | z
        vec![vec![n(9)]],                         // S -> v9
    ];
    Grammar::new(b"abcdz".to_vec(), bodies, vec![Symbol::n(9)])
}

pub fn example_pcfg() -> Pcfg {
    let mut probs = vec![vec![1.0]; 10];
    probs[5] = vec![0.5, 0.5];
    probs[8] = vec![0.7, 0.3];
    Pcfg::explicit(example_grammar(), probs)
}

/// Choices at v9, v6, v9, v6, v9 along the left-most derivation of
/// `abcdzbcdz`.
pub const EXAMPLE_CHOICES: [u32; 5] = [0, 0, 0, 1, 1];

/// The 18-rule left-most derivation of `abcdzbcdz`, written with the
/// 1-based `v` indices used above (`S` = 10).
pub fn example_rho() -> Vec<RuleRef> {
    let seq: [(u32, u32); 18] = [
        (10, 0),
        (9, 0),
        (8, 0),
        (6, 0),
        (1, 0),
        (2, 0),
        (7, 0),
        (3, 0),
        (4, 0),
        (9, 0),
        (8, 0),
        (6, 1),
        (5, 0),
        (2, 0),
        (7, 0),
        (3, 0),
        (4, 0),
        (9, 1),
    ];
    seq.iter().map(|&(v, c)| RuleRef::new(v - 1, c)).collect()
}
