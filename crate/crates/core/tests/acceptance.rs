//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! fails. Each criterion's time budget is part of its pass condition.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use pcfg_compress::bench::{self, BenchConfig, Execution, Point};
use pcfg_compress::coding::range::static_information_bits;
use pcfg_compress::coding::{
    decompress_bytes, doubling_slp, rc_encode, serialize_grammar, unary_pcfg_compress,
};
use pcfg_compress::coding::{FrequencyModel, Header};
use pcfg_compress::fibonacci::{add_noise, fib_string, NoiseKind, NoiseSpec};
use pcfg_compress::repair::{replace, run};
use pcfg_compress::{compress, CompressedArtifact, Method, Scheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, ok: impl Into<String>, fail: impl Into<String>) -> Outcome {
    if cond {
        Ok(ok.into())
    } else {
        Err(fail.into())
    }
}

fn c1_example() -> Outcome {
    let p = common::example_pcfg();
    let rho = common::example_rho();
    let prob = p.derivation_probability(&rho).map_err(|e| e.to_string())?;
    let rel = (prob - 0.03675).abs() / 0.03675;
    let text = p
        .grammar
        .expand(&common::EXAMPLE_CHOICES)
        .map_err(|e| e.to_string())?;
    check(
        rel <= 1e-12 && text == b"abcdzbcdz",
        format!(
            "pi(rho)={prob} (rel err {rel:.1e}), expand={}",
            String::from_utf8_lossy(&text)
        ),
        format!(
            "pi(rho)={prob}, expand={:?}",
            String::from_utf8_lossy(&text)
        ),
    )
}

fn c2_fibonacci() -> Outcome {
    let (f4, f5, n20) = (fib_string(4), fib_string(5), fib_string(20).len());
    check(
        f4 == b"abaab" && f5 == b"abaababa" && n20 == 10946,
        "Fib_4=abaab, Fib_5=abaababa, |Fib_20|=10946",
        format!(
            "Fib_4={}, Fib_5={}, |Fib_20|={n20}",
            String::from_utf8_lossy(&f4),
            String::from_utf8_lossy(&f5)
        ),
    )
}

fn c3_replace() -> Outcome {
    // a = 0, v = 1
    let out = replace(&[0, 0, 0, 0, 0], (0, 0), 1);
    check(
        out == [1, 1, 0],
        "Replace(aaaaa, aa, v) = v v a",
        format!("got {out:?}"),
    )
}

fn c4_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let cases = 200;
    for case in 0..cases {
        let m = rng.random_range(5..=20u32);
        let kind =
            [NoiseKind::Type0, NoiseKind::TypeK(1), NoiseKind::TypeK(8)][rng.random_range(0..3)];
        let ratio = rng.random_range(0.0..=0.2);
        let seed = rng.random();
        let text = add_noise(m, NoiseSpec { kind, ratio, seed })
            .map_err(|e| e.to_string())?
            .text;
        let fib = match kind {
            NoiseKind::Type0 => Scheme::FibG0 { m },
            NoiseKind::TypeK(k) => Scheme::FibGk { m, k },
        };
        for scheme in [Scheme::Repair, Scheme::PcfgRepair, fib] {
            let ok = compress(&text, scheme)
                .map(|a| a.to_bytes())
                .and_then(|b| decompress_bytes(&b))
                .is_ok_and(|back| back == text);
            if !ok {
                failures.push(format!(
                    "case {case}: {scheme:?} m={m} {kind:?} ratio={ratio:.3}"
                ));
            }
        }
    }
    check(
        failures.is_empty(),
        format!("{cases} cases x 3 methods round-trip"),
        failures.join("; "),
    )
}

/// Least-squares fit `y = a + b x`; returns (a, b, max |residual|).
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let worst = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - a - b * x).abs())
        .fold(0.0, f64::max);
    (a, b, worst)
}

const MAX_SLOPE_BITS: f64 = 16.0;
const MAX_RESIDUAL_BITS: f64 = 16.0;

fn c5_unary() -> Outcome {
    let ms: Vec<u32> = (8..=20).collect();
    let mut bits = Vec::new();
    for &m in &ms {
        let a = unary_pcfg_compress(1 << m);
        let bytes = a.to_bytes();
        if decompress_bytes(&bytes).map_err(|e| e.to_string())?.len() != 1 << m {
            return Err(format!("a^(2^{m}) did not round-trip"));
        }
        bits.push((bytes.len() * 8) as f64);
    }
    let monotone = bits.windows(2).all(|w| w[0] <= w[1]);
    let xs: Vec<f64> = ms.iter().map(|&m| f64::from(m)).collect();
    let (a, b, resid) = linear_fit(&xs, &bits);

    let slp = CompressedArtifact {
        method: Method::Repair,
        header: Header::Repair,
        grammar_bytes: serialize_grammar(&doubling_slp(20)).map_err(|e| e.to_string())?,
        payload: Vec::new(),
    }
    .total_size();
    let unary = unary_pcfg_compress(1 << 20).total_size();
    let summary = format!(
        "bits ~ {a:.1} + {b:.2} m, max residual {resid:.1} bits; m=20: unary {unary} B vs doubling SLP {slp} B"
    );
    check(
        monotone && b <= MAX_SLOPE_BITS && resid <= MAX_RESIDUAL_BITS && unary < slp,
        summary.clone(),
        format!("{summary}; monotone={monotone}"),
    )
}

fn c6_static_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_slack = f64::INFINITY;
    for i in 0..100 {
        let alphabet = rng.random_range(2..=64usize);
        let weights: Vec<f64> = (0..alphabet)
            .map(|_| rng.random_range(0.001..1.0))
            .collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let len = rng.random_range(0..5000);
        let s: Vec<u32> = (0..len)
            .map(|_| rng.random_range(0..alphabet as u32))
            .collect();
        let bytes =
            rc_encode(&s, &FrequencyModel::fixed(probs.clone())).map_err(|e| e.to_string())?;
        let bound = static_information_bits(&s, &probs).ceil() + 64.0;
        let used = (bytes.len() * 8) as f64;
        if used > bound {
            return Err(format!("sequence {i}: {used} bits > bound {bound}"));
        }
        worst_slack = worst_slack.min(bound - used);
    }
    Ok(format!(
        "100 sequences within bound, tightest slack {worst_slack} bits"
    ))
}

fn c7_clean() -> Outcome {
    let text = fib_string(20);
    let bytes = compress(&text, Scheme::FibG0 { m: 20 })
        .map_err(|e| e.to_string())?
        .to_bytes();
    let ratio = bytes.len() as f64 / text.len() as f64;
    let back = decompress_bytes(&bytes).map_err(|e| e.to_string())?;
    check(
        bytes.len() < 64 && back == text,
        format!("{} bytes, ratio {:.4}%", bytes.len(), ratio * 100.0),
        format!("{} bytes", bytes.len()),
    )
}

const TIE_TOLERANCE: f64 = 0.05;

fn c8_trends() -> Outcome {
    let cfg = BenchConfig::from_toml(
        r#"
        m = 20
        trials = 10
        seed_base = 1000
        methods = ["repair", "pcfg-repair", "fib-g0", "fib-gk"]

        [[sweep]]
        noise = "0"
        ratios = [0.001, 0.01, 0.05]

        [[sweep]]
        noise = "k"
        ks = [1, 12, 24]
        ratios = [0.001]
        "#,
    )
    .map_err(|e| e.to_string())?;
    let report = bench::run(&cfg, Execution::Parallel).map_err(|e| e.to_string())?;
    let mean = |method: &str, kind: NoiseKind, ratio: f64| {
        report
            .mean_size(method, Point { kind, ratio })
            .ok_or_else(|| format!("no mean row for {method} {kind:?} {ratio}"))
    };
    let mut notes = Vec::new();
    let mut ok = true;

    let t1 = NoiseKind::TypeK(1);
    let (g1, pr, rp) = (
        mean("fib-gk", t1, 0.001)?,
        mean("pcfg-repair", t1, 0.001)?,
        mean("repair", t1, 0.001)?,
    );
    let a = g1 < pr && pr <= rp;
    ok &= a;
    notes.push(format!(
        "(a) {} G_1 {g1:.1} < pcfg-repair {pr:.1} <= repair {rp:.1}",
        mark(a)
    ));

    for ratio in [0.001, 0.01, 0.05] {
        let g0 = mean("fib-g0", NoiseKind::Type0, ratio)?;
        let others = mean("repair", NoiseKind::Type0, ratio)?.min(mean(
            "pcfg-repair",
            NoiseKind::Type0,
            ratio,
        )?);
        let b = g0 < others;
        ok &= b;
        notes.push(format!(
            "(b) {} {:.1}%: G_0 {g0:.1} < {others:.1}",
            mark(b),
            ratio * 100.0
        ));
    }

    for k in [12, 24] {
        let kind = NoiseKind::TypeK(k);
        let (pr, rp) = (
            mean("pcfg-repair", kind, 0.001)?,
            mean("repair", kind, 0.001)?,
        );
        let gap = (pr - rp).abs() / rp;
        let c = gap <= TIE_TOLERANCE;
        ok &= c;
        notes.push(format!("(c) {} k={k}: gap {:.2}%", mark(c), gap * 100.0));
    }
    check(ok, notes.join("; "), notes.join("; "))
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

/// Random strings that the minor-rule search never extends: periodic words
/// over distinct letters, plus random words that happen to qualify.
fn c9_subsumption() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut accepted, mut attempts) = (0, 0);
    while accepted < 50 {
        attempts += 1;
        if attempts > 100_000 {
            return Err(format!(
                "only {accepted} qualifying strings in {attempts} attempts"
            ));
        }
        let text: Vec<u8> = if rng.random_bool(0.5) {
            let period = rng.random_range(1..=8usize);
            let mut letters: Vec<u8> = (b'a'..=b'z').collect();
            for i in 0..period {
                let j = rng.random_range(i..letters.len());
                letters.swap(i, j);
            }
            let len = rng.random_range(2..400);
            (0..len).map(|i| letters[i % period]).collect()
        } else {
            let alphabet = rng.random_range(2..=6u8);
            let len = rng.random_range(2..60);
            (0..len)
                .map(|_| b'a' + rng.random_range(0..alphabet))
                .collect()
        };
        let pcfg = run(&text, true).map_err(|e| e.to_string())?;
        if pcfg.grammar.minor_count() > 0 {
            continue;
        }
        let classic = run(&text, false).map_err(|e| e.to_string())?;
        if pcfg.grammar != classic.grammar || !pcfg.flags.is_empty() {
            return Err(format!(
                "grammars differ on {:?}",
                String::from_utf8_lossy(&text)
            ));
        }
        accepted += 1;
    }
    Ok(format!("50 strings identical ({attempts} sampled)"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let ms = Duration::from_millis;
    let criteria: [Criterion; 9] = [
        ("1 worked PCFG example", c1_example, ms(1)),
        ("2 fibonacci facts", c2_fibonacci, ms(1)),
        ("3 replace footnote", c3_replace, ms(1)),
        ("4 universal round trip", c4_round_trip, ms(60_000)),
        ("5 unary PCFG vs doubling SLP", c5_unary, ms(10_000)),
        ("6 static coding bound", c6_static_bound, ms(10_000)),
        ("7 clean Fib_20 under G_0", c7_clean, ms(1_000)),
        ("8 benchmark trends", c8_trends, ms(300_000)),
        ("9 classic subsumption", c9_subsumption, ms(10_000)),
    ];
    let mut failed = 0;
    for (name, f, budget) in criteria {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over budget {budget:?}")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "{} [{name}] {detail} ({took:.2?})",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
