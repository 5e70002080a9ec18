//! Compression-ratio sweeps over noisy Fibonacci strings.
//!
//! A sweep visits every (noise kind, k, ratio) point, generates `trials`
//! noisy texts per point with seeds `seed_base + trial`, compresses each
//! with every applicable method, verifies the round trip, and records the
//! container size. Rows come out ordered by (method, point, trial), each
//! point followed by a mean row, whatever order the trials finished in.
//!
//! CSV columns: `method,noise,ratio,k,seed,original_size,compressed_size,ratio_value`.
//! `noise` is `0` or `k`; `k` is 0 for Type-0 rows; `seed` is the trial
//! seed, `mean` for averages, or `unavailable` for a missing external tool.

use std::io::{self, Write};
use std::path::Path;
use std::process::{Command, Stdio};

use serde::Deserialize;
use thiserror::Error;

use crate::coding::{compress, CodingError, Method, Scheme};
use crate::fibonacci::{add_noise, FibError, NoiseKind, NoiseSpec};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench config: {0}")]
    Config(String),
    #[error("cannot parse bench config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Fib(#[from] FibError),
    #[error("{method} failed: {source}")]
    Coding { method: String, source: CodingError },
    #[error("{method} did not round-trip (seed {seed})")]
    RoundTrip { method: String, seed: u64 },
}

/// Whether trials run on the rayon pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
pub enum NoiseFamily {
    #[serde(rename = "0", alias = "type0")]
    Type0,
    #[serde(rename = "k", alias = "typek", alias = "K")]
    TypeK,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub noise: NoiseFamily,
    pub ratios: Vec<f64>,
    /// Letter counts for Type-k sweeps; ignored for Type 0.
    #[serde(default)]
    pub ks: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub m: u32,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub seed_base: u64,
    pub methods: Vec<String>,
    #[serde(rename = "sweep")]
    pub sweeps: Vec<Sweep>,
    /// External compressors, invoked as `tool -c` / `tool -dc`.
    #[serde(default)]
    pub external: Vec<String>,
}

fn default_trials() -> u32 {
    10
}

impl BenchConfig {
    pub fn from_toml(s: &str) -> Result<Self, BenchError> {
        let cfg: BenchConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if self.m > crate::coding::container::MAX_FIB_INDEX {
            return bad(format!("m={} is too large", self.m));
        }
        self.internal_methods()?;
        for s in &self.sweeps {
            if let Some(r) = s.ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
                return bad(format!("ratio {r} outside [0, 1]"));
            }
            if s.noise == NoiseFamily::TypeK {
                if s.ks.is_empty() {
                    return bad("Type-k sweep needs ks".into());
                }
                if let Some(k) =
                    s.ks.iter()
                        .find(|&&k| k == 0 || k > crate::fibonacci::MAX_K)
                {
                    return bad(format!("k={k} out of range"));
                }
            }
        }
        Ok(())
    }

    fn internal_methods(&self) -> Result<Vec<Method>, BenchError> {
        self.methods
            .iter()
            .map(|name| match name.parse::<Method>() {
                Ok(Method::Unary) | Err(_) => Err(BenchError::Config(format!(
                    "unsupported bench method {name:?}"
                ))),
                Ok(m) => Ok(m),
            })
            .collect()
    }

    /// Every parameter point, in sweep order.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for s in &self.sweeps {
            match s.noise {
                NoiseFamily::Type0 => out.extend(s.ratios.iter().map(|&ratio| Point {
                    kind: NoiseKind::Type0,
                    ratio,
                })),
                NoiseFamily::TypeK => {
                    for &k in &s.ks {
                        out.extend(s.ratios.iter().map(|&ratio| Point {
                            kind: NoiseKind::TypeK(k),
                            ratio,
                        }));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub kind: NoiseKind,
    pub ratio: f64,
}

impl Point {
    fn noise_label(&self) -> &'static str {
        match self.kind {
            NoiseKind::Type0 => "0",
            NoiseKind::TypeK(_) => "k",
        }
    }

    fn k(&self) -> u32 {
        match self.kind {
            NoiseKind::Type0 => 0,
            NoiseKind::TypeK(k) => k.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Trial(u64),
    Mean,
    Unavailable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub method: String,
    pub point: Point,
    pub row: RowKind,
    pub original_size: f64,
    pub compressed_size: f64,
    /// `compressed_size / original_size`; for mean rows, the mean of the
    /// trial ratios.
    pub ratio_value: f64,
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    /// `tool: version` for every external compressor that was found.
    pub tool_versions: Vec<String>,
}

impl BenchReport {
    /// Mean compressed size of `method` at `point`.
    pub fn mean_size(&self, method: &str, point: Point) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.method == method && r.point == point && r.row == RowKind::Mean)
            .map(|r| r.compressed_size)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), BenchError> {
        for v in &self.tool_versions {
            writeln!(w, "# {v}")?;
        }
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "method",
            "noise",
            "ratio",
            "k",
            "seed",
            "original_size",
            "compressed_size",
            "ratio_value",
        ])?;
        for r in &self.records {
            let seed = match r.row {
                RowKind::Trial(s) => s.to_string(),
                RowKind::Mean => "mean".into(),
                RowKind::Unavailable => "unavailable".into(),
            };
            let (orig, comp, ratio) = if r.row == RowKind::Unavailable {
                (String::new(), String::new(), String::new())
            } else {
                (
                    r.original_size.to_string(),
                    r.compressed_size.to_string(),
                    r.ratio_value.to_string(),
                )
            };
            csv.write_record([
                r.method.clone(),
                r.point.noise_label().into(),
                r.point.ratio.to_string(),
                r.point.k().to_string(),
                seed,
                orig,
                comp,
                ratio,
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// Scheme for `method` on a text from `point`, or `None` when the method
/// does not apply (e.g. `G_0` on Type-k noise).
fn scheme_for(method: Method, m: u32, point: Point) -> Option<Scheme> {
    match (method, point.kind) {
        (Method::Repair, _) => Some(Scheme::Repair),
        (Method::PcfgRepair, _) => Some(Scheme::PcfgRepair),
        (Method::FibG0, NoiseKind::Type0) => Some(Scheme::FibG0 { m }),
        (Method::FibGk, NoiseKind::TypeK(k)) => Some(Scheme::FibGk { m, k }),
        _ => None,
    }
}

/// Compresses `text`, checks the container decodes back to it, and returns
/// the container size.
pub fn measure(text: &[u8], scheme: Scheme) -> Result<usize, CodingError> {
    let bytes = compress(text, scheme)?.to_bytes();
    let back = crate::coding::decompress_bytes(&bytes)?;
    if back != text {
        return Err(CodingError::MethodMismatch(format!(
            "{} round trip differs",
            scheme.method()
        )));
    }
    Ok(bytes.len())
}

/// Size of `text` piped through `tool -c`, verified with `tool -dc`.
/// `Ok(None)` when the tool cannot be started.
pub fn external_size(tool: &str, text: &[u8]) -> io::Result<Option<usize>> {
    let Some(packed) = pipe(tool, "-c", text)? else {
        return Ok(None);
    };
    match pipe(tool, "-dc", &packed)? {
        Some(back) if back == text => Ok(Some(packed.len())),
        _ => Err(io::Error::other(format!("{tool} did not round-trip"))),
    }
}

fn pipe(tool: &str, flag: &str, input: &[u8]) -> io::Result<Option<Vec<u8>>> {
    let child = Command::new(tool)
        .arg(flag)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut stdin = child.stdin.take().expect("piped stdin");
    let data = input.to_vec();
    let writer = std::thread::spawn(move || stdin.write_all(&data));
    let out = child.wait_with_output()?;
    writer.join().expect("stdin writer panicked")?;
    if !out.status.success() {
        return Err(io::Error::other(format!(
            "{tool} {flag} exited with {}",
            out.status
        )));
    }
    Ok(Some(out.stdout))
}

/// First line of `tool --version`, if the tool runs.
pub fn tool_version(tool: &str) -> Option<String> {
    let out = Command::new(tool)
        .arg("--version")
        .stderr(Stdio::piped())
        .output()
        .ok()?;
    let text = if out.stdout.is_empty() {
        out.stderr
    } else {
        out.stdout
    };
    String::from_utf8_lossy(&text)
        .lines()
        .next()
        .map(|l| l.trim().to_string())
}

fn map_jobs<T, R, F>(jobs: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            jobs.par_iter().map(f).collect()
        }
        _ => jobs.iter().map(f).collect(),
    }
}

/// Sizes for one noisy text: one slot per internal method, then one per
/// external tool (`None` = not applicable / unavailable).
type TrialSizes = Vec<Option<usize>>;

/// Runs the sweep described by `cfg`.
pub fn run(cfg: &BenchConfig, exec: Execution) -> Result<BenchReport, BenchError> {
    cfg.validate()?;
    let methods = cfg.internal_methods()?;
    let points = cfg.points();
    let available: Vec<(String, bool)> = cfg
        .external
        .iter()
        .map(|t| (t.clone(), tool_version(t).is_some()))
        .collect();

    let jobs: Vec<(usize, u32)> = (0..points.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();

    let results: Vec<Result<(usize, TrialSizes), BenchError>> = map_jobs(&jobs, exec, |&(p, t)| {
        let point = points[p];
        let seed = cfg.seed_base + u64::from(t);
        let noisy = add_noise(
            cfg.m,
            NoiseSpec {
                kind: point.kind,
                ratio: point.ratio,
                seed,
            },
        )?;
        let mut sizes = Vec::with_capacity(methods.len() + available.len());
        for &method in &methods {
            let size = match scheme_for(method, cfg.m, point) {
                Some(scheme) => {
                    Some(measure(&noisy.text, scheme).map_err(|source| match source {
                        CodingError::MethodMismatch(_) => BenchError::RoundTrip {
                            method: method.to_string(),
                            seed,
                        },
                        source => BenchError::Coding {
                            method: method.to_string(),
                            source,
                        },
                    })?)
                }
                None => None,
            };
            sizes.push(size);
        }
        for (tool, ok) in &available {
            sizes.push(if *ok {
                external_size(tool, &noisy.text)?
            } else {
                None
            });
        }
        Ok((noisy.text.len(), sizes))
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let names: Vec<String> = methods
        .iter()
        .map(|m| m.to_string())
        .chain(available.iter().map(|(t, _)| t.clone()))
        .collect();
    let mut report = BenchReport {
        records: Vec::new(),
        tool_versions: available
            .iter()
            .filter(|(_, ok)| *ok)
            .filter_map(|(t, _)| tool_version(t).map(|v| format!("{t}: {v}")))
            .collect(),
    };
    for (slot, name) in names.iter().enumerate() {
        let external = slot >= methods.len();
        if external && !available[slot - methods.len()].1 {
            report.records.push(BenchRecord {
                method: name.clone(),
                point: points.first().copied().unwrap_or(Point {
                    kind: NoiseKind::Type0,
                    ratio: 0.0,
                }),
                row: RowKind::Unavailable,
                original_size: 0.0,
                compressed_size: 0.0,
                ratio_value: 0.0,
            });
            continue;
        }
        for (p, &point) in points.iter().enumerate() {
            let trials = &results[p * cfg.trials as usize..(p + 1) * cfg.trials as usize];
            if trials.iter().all(|(_, sizes)| sizes[slot].is_none()) {
                continue;
            }
            let mut sum_size = 0.0;
            let mut sum_ratio = 0.0;
            let mut orig = 0.0;
            for (t, (len, sizes)) in trials.iter().enumerate() {
                let size = sizes[slot].expect("applicability is per point") as f64;
                orig = *len as f64;
                let ratio_value = size / orig;
                sum_size += size;
                sum_ratio += ratio_value;
                report.records.push(BenchRecord {
                    method: name.clone(),
                    point,
                    row: RowKind::Trial(cfg.seed_base + t as u64),
                    original_size: orig,
                    compressed_size: size,
                    ratio_value,
                });
            }
            let n = trials.len() as f64;
            report.records.push(BenchRecord {
                method: name.clone(),
                point,
                row: RowKind::Mean,
                original_size: orig,
                compressed_size: sum_size / n,
                ratio_value: sum_ratio / n,
            });
        }
    }
    Ok(report)
}
