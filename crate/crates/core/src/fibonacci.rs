//! Fibonacci strings, substitution noise, and the grammars built around the
//! Fibonacci SLP.
//!
//! Terminal layout shared by every grammar here: `t0 = 'b'`, `t1 = 'a'`,
//! then the noise letters `c_1..c_k` as `t2..t(k+1)`. Nonterminal `v_i`
//! derives `Fib_i`, so `v_0 -> b`, `v_1 -> a`, `v_i -> v_{i-1} v_{i-2}`.
//!
//! Noise is drawn from a ChaCha8 stream (`rand_chacha::ChaCha8Rng`) seeded
//! with `seed_from_u64`; positions come from `rand::seq::index::sample`
//! and each Type-k letter from `random_range(1..=k)` in increasing position
//! order. The stream is therefore replayable from `(m, NoiseSpec)` alone.

use rand::{seq::index, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grammar::{ChoiceSequence, Grammar, Pcfg, Symbol};

/// Byte used for noise letter `c_1`; `c_j` is `NOISE_BASE + j - 1`.
pub const NOISE_BASE: u8 = b'c';
/// Largest `k` whose letters still fit in a byte.
pub const MAX_K: u8 = u8::MAX - NOISE_BASE + 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FibError {
    #[error("noise ratio {0} is outside [0, 1]")]
    RatioOutOfRange(f64),
    #[error("noise letter count k={0} must be in 1..={MAX_K}")]
    InvalidK(u32),
    #[error("text has length {got}, Fib_{m} has length {expected}")]
    LengthMismatch { m: u32, expected: usize, got: usize },
    #[error(
        "byte {byte:#04x} at position {position} is neither the clean letter nor a noise letter"
    )]
    IllegalLetter { position: usize, byte: u8 },
    #[error("choice {choice} at position {position} exceeds the {alternatives} alternatives")]
    ChoiceOutOfRange {
        position: usize,
        choice: u32,
        alternatives: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    /// Swap `a` and `b`.
    Type0,
    /// Replace with one of `c_1..c_k`.
    TypeK(u8),
}

impl NoiseKind {
    /// Number of alternative leaf rules per ambiguous head (`k` of `G_k`,
    /// 1 for `G_0`).
    pub fn alternatives(self) -> u32 {
        match self {
            NoiseKind::Type0 => 1,
            NoiseKind::TypeK(k) => u32::from(k),
        }
    }

    fn check(self) -> Result<(), FibError> {
        match self {
            NoiseKind::TypeK(k) if k == 0 || k > MAX_K => Err(FibError::InvalidK(k.into())),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub ratio: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyFibText {
    pub m: u32,
    pub text: Vec<u8>,
    pub noise: NoiseSpec,
    /// Sorted, distinct.
    pub altered_positions: Vec<usize>,
}

/// The byte written for noise letter `c_j` (1-based).
pub fn noise_letter(j: u32) -> u8 {
    debug_assert!(j >= 1 && j <= u32::from(MAX_K));
    NOISE_BASE + (j - 1) as u8
}

/// `|Fib_m|`.
pub fn fib_len(m: u32) -> usize {
    let (mut prev, mut cur) = (1usize, 1usize);
    for _ in 1..m {
        (prev, cur) = (cur, prev + cur);
    }
    cur
}

/// `Fib_0 = b`, `Fib_1 = a`, `Fib_m = Fib_{m-1} Fib_{m-2}`.
pub fn fib_string(m: u32) -> Vec<u8> {
    match m {
        0 => return b"b".to_vec(),
        1 => return b"a".to_vec(),
        _ => {}
    }
    // For i >= 3, Fib_{i-2} is a prefix of Fib_{i-1}.
    let mut s = Vec::with_capacity(fib_len(m));
    s.extend_from_slice(b"ab");
    let mut prev_len = 1;
    for _ in 3..=m {
        let cur_len = s.len();
        s.extend_from_within(..prev_len);
        prev_len = cur_len;
    }
    s
}

fn slp_bodies(m: u32, extra_leaves: impl Fn(u32) -> Vec<Vec<Symbol>>) -> Vec<Vec<Vec<Symbol>>> {
    let mut bodies = Vec::with_capacity(m as usize + 1);
    bodies.push(
        std::iter::once(vec![Symbol::t(0)])
            .chain(extra_leaves(0))
            .collect(),
    );
    if m >= 1 {
        bodies.push(
            std::iter::once(vec![Symbol::t(1)])
                .chain(extra_leaves(1))
                .collect(),
        );
    }
    for i in 2..=m {
        bodies.push(vec![vec![Symbol::n(i - 1), Symbol::n(i - 2)]]);
    }
    bodies
}

fn terminals(k: u32) -> Vec<u8> {
    let mut t = vec![b'b', b'a'];
    t.extend((1..=k).map(noise_letter));
    t
}

/// The Fibonacci SLP with start sequence `[v_m]`.
pub fn fibonacci_slp(m: u32) -> Grammar {
    Grammar::new(
        terminals(0),
        slp_bodies(m, |_| Vec::new()),
        vec![Symbol::n(m)],
    )
}

/// `G_0`: the Fibonacci SLP plus `v_0 -> a` and `v_1 -> b`.
pub fn build_g0(m: u32) -> Pcfg {
    let g = Grammar::new(
        terminals(0),
        slp_bodies(m, |leaf| vec![vec![Symbol::t(1 - leaf)]]),
        vec![Symbol::n(m)],
    );
    Pcfg::adaptive(g)
}

/// `G_k`: the Fibonacci SLP plus `v_0 -> c_j` and `v_1 -> c_j` for
/// `j = 1..k`.
pub fn build_gk(m: u32, k: u8) -> Result<Pcfg, FibError> {
    NoiseKind::TypeK(k).check()?;
    let k = u32::from(k);
    let g = Grammar::new(
        terminals(k),
        slp_bodies(m, |_| (1..=k).map(|j| vec![Symbol::t(j + 1)]).collect()),
        vec![Symbol::n(m)],
    );
    Ok(Pcfg::adaptive(g))
}

/// `G_0` for [`NoiseKind::Type0`], `G_k` otherwise.
pub fn build_for(m: u32, kind: NoiseKind) -> Result<Pcfg, FibError> {
    match kind {
        NoiseKind::Type0 => Ok(build_g0(m)),
        NoiseKind::TypeK(k) => build_gk(m, k),
    }
}

/// Applies seeded substitution noise to `Fib_m`.
pub fn add_noise(m: u32, noise: NoiseSpec) -> Result<NoisyFibText, FibError> {
    if !(0.0..=1.0).contains(&noise.ratio) {
        return Err(FibError::RatioOutOfRange(noise.ratio));
    }
    noise.kind.check()?;
    let mut text = fib_string(m);
    let count = ((noise.ratio * text.len() as f64).round() as usize).min(text.len());
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut positions = index::sample(&mut rng, text.len(), count).into_vec();
    positions.sort_unstable();
    for &p in &positions {
        text[p] = match noise.kind {
            NoiseKind::Type0 => flip(text[p]),
            NoiseKind::TypeK(k) => noise_letter(rng.random_range(1..=u32::from(k))),
        };
    }
    Ok(NoisyFibText {
        m,
        text,
        noise,
        altered_positions: positions,
    })
}

fn flip(c: u8) -> u8 {
    if c == b'a' {
        b'b'
    } else {
        b'a'
    }
}

/// Choice sequence of `t` under `G_0`/`G_k`.
pub fn extract_choices(t: &NoisyFibText) -> Result<ChoiceSequence, FibError> {
    choices_for_text(t.m, t.noise.kind, &t.text)
}

/// Position-wise comparison with the clean `Fib_m`. The ambiguity of
/// `G_0`/`G_k` sits only at the leaves and leaves are expanded in text
/// order, so this is exactly the left-most derivation's choice sequence.
pub fn choices_for_text(m: u32, kind: NoiseKind, text: &[u8]) -> Result<ChoiceSequence, FibError> {
    kind.check()?;
    let clean = fib_string(m);
    if clean.len() != text.len() {
        return Err(FibError::LengthMismatch {
            m,
            expected: clean.len(),
            got: text.len(),
        });
    }
    let k = kind.alternatives();
    clean
        .iter()
        .zip(text)
        .enumerate()
        .map(|(position, (&c, &t))| {
            if c == t {
                return Ok(0);
            }
            let illegal = FibError::IllegalLetter { position, byte: t };
            match kind {
                NoiseKind::Type0 if t == flip(c) => Ok(1),
                NoiseKind::Type0 => Err(illegal),
                NoiseKind::TypeK(_) => {
                    let j = u32::from(t.wrapping_sub(NOISE_BASE)) + 1;
                    if t >= NOISE_BASE && j <= k {
                        Ok(j)
                    } else {
                        Err(illegal)
                    }
                }
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(ChoiceSequence)
}

/// Inverse of [`choices_for_text`].
pub fn reconstruct(m: u32, kind: NoiseKind, choices: &[u32]) -> Result<Vec<u8>, FibError> {
    kind.check()?;
    let mut text = fib_string(m);
    if choices.len() != text.len() {
        return Err(FibError::LengthMismatch {
            m,
            expected: text.len(),
            got: choices.len(),
        });
    }
    let k = kind.alternatives();
    for (position, (byte, &choice)) in text.iter_mut().zip(choices).enumerate() {
        if choice > k {
            return Err(FibError::ChoiceOutOfRange {
                position,
                choice,
                alternatives: k,
            });
        }
        if choice > 0 {
            *byte = match kind {
                NoiseKind::Type0 => flip(*byte),
                NoiseKind::TypeK(_) => noise_letter(choice),
            };
        }
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: NoiseKind, ratio: f64, seed: u64) -> NoiseSpec {
        NoiseSpec { kind, ratio, seed }
    }

    #[test]
    fn small_fibonacci_strings() {
        let expected: [&[u8]; 6] = [b"b", b"a", b"ab", b"aba", b"abaab", b"abaababa"];
        for (m, e) in expected.iter().enumerate() {
            assert_eq!(fib_string(m as u32), *e, "m={m}");
        }
        assert_eq!(fib_string(20).len(), 10946);
    }

    #[test]
    fn lengths_follow_the_recurrence() {
        for m in 2..30 {
            assert_eq!(fib_len(m), fib_len(m - 1) + fib_len(m - 2));
            if m < 25 {
                assert_eq!(fib_string(m).len(), fib_len(m));
            }
        }
    }

    #[test]
    fn slp_expands_to_fibonacci() {
        for m in 0..=16 {
            let g = fibonacci_slp(m);
            assert!(g.is_slg());
            assert!(g.validate().is_empty());
            assert_eq!(g.rule_count(), m as usize + 1);
            assert_eq!(g.expand(&[]).unwrap(), fib_string(m));
        }
    }

    #[test]
    fn augmented_grammars_have_expected_alternatives() {
        let g0 = build_g0(9).grammar;
        assert_eq!(g0.rule_count(), fibonacci_slp(9).rule_count() + 2);
        assert_eq!(g0.rules_of(0).len(), 2);
        assert_eq!(g0.rules_of(1).len(), 2);
        assert!((2..=9).all(|v| g0.rules_of(v).len() == 1));
        let g3 = build_gk(9, 3).unwrap().grammar;
        assert_eq!(g3.rules_of(0).len(), 4);
        assert_eq!(g3.rules_of(1).len(), 4);
        assert!(matches!(build_gk(9, 0), Err(FibError::InvalidK(0))));
    }

    #[test]
    fn zero_ratio_is_clean() {
        let t = add_noise(12, spec(NoiseKind::TypeK(4), 0.0, 7)).unwrap();
        assert_eq!(t.text, fib_string(12));
        assert!(t.altered_positions.is_empty());
    }

    #[test]
    fn noise_count_and_determinism() {
        let s = spec(NoiseKind::TypeK(3), 0.05, 42);
        let a = add_noise(15, s).unwrap();
        let b = add_noise(15, s).unwrap();
        assert_eq!(a, b);
        let expected = (0.05 * fib_len(15) as f64).round() as usize;
        assert_eq!(a.altered_positions.len(), expected);
        assert!(a.altered_positions.windows(2).all(|w| w[0] < w[1]));
        let clean = fib_string(15);
        for (i, (&c, &t)) in clean.iter().zip(&a.text).enumerate() {
            assert_eq!(c != t, a.altered_positions.binary_search(&i).is_ok());
        }
    }

    #[test]
    fn ratio_out_of_range() {
        assert!(matches!(
            add_noise(5, spec(NoiseKind::Type0, 1.5, 0)),
            Err(FibError::RatioOutOfRange(_))
        ));
    }

    #[test]
    fn hand_made_noise_round_trips() {
        // a<->b at index 1 of "abaab"
        let c = choices_for_text(4, NoiseKind::Type0, b"aaaab").unwrap();
        assert_eq!(c.0, vec![0, 1, 0, 0, 0]);
        assert_eq!(reconstruct(4, NoiseKind::Type0, &c.0).unwrap(), b"aaaab");
        // c_2 at index 0
        let c = choices_for_text(4, NoiseKind::TypeK(2), b"dbaab").unwrap();
        assert_eq!(c.0, vec![2, 0, 0, 0, 0]);
        assert_eq!(reconstruct(4, NoiseKind::TypeK(2), &c.0).unwrap(), b"dbaab");
        assert_eq!(
            choices_for_text(4, NoiseKind::Type0, b"abaab").unwrap().0,
            vec![0; 5]
        );
    }

    #[test]
    fn illegal_letters_and_lengths() {
        assert_eq!(
            choices_for_text(4, NoiseKind::TypeK(2), b"bbaab"),
            Err(FibError::IllegalLetter {
                position: 0,
                byte: b'b'
            })
        );
        assert_eq!(
            choices_for_text(4, NoiseKind::TypeK(1), b"dbaab"),
            Err(FibError::IllegalLetter {
                position: 0,
                byte: b'd'
            })
        );
        assert_eq!(
            choices_for_text(4, NoiseKind::Type0, b"cbaab"),
            Err(FibError::IllegalLetter {
                position: 0,
                byte: b'c'
            })
        );
        assert!(matches!(
            choices_for_text(4, NoiseKind::Type0, b"abaa"),
            Err(FibError::LengthMismatch {
                expected: 5,
                got: 4,
                ..
            })
        ));
        assert!(matches!(
            reconstruct(4, NoiseKind::TypeK(2), &[3, 0, 0, 0, 0]),
            Err(FibError::ChoiceOutOfRange { choice: 3, .. })
        ));
    }

    #[test]
    fn choices_drive_the_augmented_grammar() {
        for (kind, seed) in [(NoiseKind::Type0, 1), (NoiseKind::TypeK(5), 2)] {
            let t = add_noise(13, spec(kind, 0.1, seed)).unwrap();
            let c = extract_choices(&t).unwrap();
            let g = build_for(13, kind).unwrap().grammar;
            assert_eq!(g.expand(&c.0).unwrap(), t.text);
            assert_eq!(
                c.0.iter().filter(|&&x| x != 0).count(),
                t.altered_positions.len()
            );
        }
    }
}
