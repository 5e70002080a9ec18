use pcfg_compress::fibonacci::{
    add_noise, build_g0, build_gk, choices_for_text, extract_choices, fib_len, fib_string,
    fibonacci_slp, noise_letter, reconstruct, FibError, NoiseKind, NoiseSpec,
};
use proptest::prelude::*;

#[test]
fn small_strings() {
    assert_eq!(fib_string(0), b"b");
    assert_eq!(fib_string(1), b"a");
    assert_eq!(fib_string(4), b"abaab");
    assert_eq!(fib_string(5), b"abaababa");
    assert_eq!(fib_string(20).len(), 10946);
    for m in 0..25 {
        assert_eq!(fib_string(m).len(), fib_len(m));
    }
}

#[test]
fn slp_is_minimal_shape() {
    for m in 2..=20 {
        let g = fibonacci_slp(m);
        assert!(g.is_slg() && g.is_cnf());
        assert_eq!(g.expand(&[]).unwrap(), fib_string(m));
        assert_eq!(g.nonterminal_count(), m as usize + 1);
    }
}

#[test]
fn clean_text_has_zero_choices() {
    let text = fib_string(12);
    let c = choices_for_text(12, NoiseKind::Type0, &text).unwrap();
    assert!(c.as_slice().iter().all(|&x| x == 0));
    assert_eq!(c.len(), text.len());
}

#[test]
fn type0_cannot_carry_noise_letters() {
    let mut text = fib_string(6);
    text[2] = noise_letter(1);
    assert!(matches!(
        choices_for_text(6, NoiseKind::Type0, &text),
        Err(FibError::IllegalLetter { position: 2, .. })
    ));
}

#[test]
fn seeded_noise_is_reproducible() {
    let spec = NoiseSpec {
        kind: NoiseKind::TypeK(3),
        ratio: 0.02,
        seed: 7,
    };
    let a = add_noise(15, spec).unwrap();
    let b = add_noise(15, spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        a.altered_positions.len(),
        (0.02 * fib_len(15) as f64).round() as usize
    );
}

#[test]
fn grammars_validate() {
    assert!(build_g0(20).validate().is_empty());
    for k in [1, 8, 24] {
        assert!(build_gk(20, k).unwrap().validate().is_empty());
    }
}

fn kind() -> impl Strategy<Value = NoiseKind> {
    prop_oneof![
        Just(NoiseKind::Type0),
        (1u8..=24).prop_map(NoiseKind::TypeK)
    ]
}

proptest! {
    #[test]
    fn noise_round_trip(m in 2u32..=18, kind in kind(), ratio in 0.0f64..=0.2, seed: u64) {
        let noisy = add_noise(m, NoiseSpec { kind, ratio, seed }).unwrap();
        let clean = fib_string(m);
        prop_assert_eq!(noisy.text.len(), clean.len());
        let diffs: Vec<usize> = (0..clean.len()).filter(|&i| clean[i] != noisy.text[i]).collect();
        prop_assert_eq!(&diffs, &noisy.altered_positions);
        let choices = extract_choices(&noisy).unwrap();
        prop_assert_eq!(reconstruct(m, kind, choices.as_slice()).unwrap(), noisy.text.clone());
        // the grammar derives the text from the same choices
        let g = pcfg_compress::fibonacci::build_for(m, kind).unwrap();
        prop_assert_eq!(g.grammar.expand(choices.as_slice()).unwrap(), noisy.text);
    }
}
