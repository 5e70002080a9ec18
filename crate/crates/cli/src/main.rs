use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use pcfg_compress::bench::{self, BenchConfig, Execution, RowKind};
use pcfg_compress::coding::decompress_bytes;
use pcfg_compress::fibonacci::{add_noise, fib_len, NoiseKind, NoiseSpec};
use pcfg_compress::{compress, Method, Scheme};

#[derive(Parser)]
#[command(
    name = "pcfgc",
    version,
    about = "Grammar-based compression of (noisy) Fibonacci strings"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    /// swap a <-> b
    #[value(name = "0")]
    Zero,
    /// substitute one of k fresh letters
    #[value(name = "K", alias = "k")]
    K,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a noisy Fibonacci string.
    Gen {
        #[arg(long)]
        m: u32,
        #[arg(long, value_enum)]
        noise: Noise,
        #[arg(long, default_value_t = 1)]
        k: u8,
        #[arg(long, default_value_t = 0.0)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compress a file into a container.
    Compress {
        #[arg(long)]
        method: String,
        /// Fibonacci index; inferred from the input length when omitted.
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value_t = 1)]
        k: u8,
        /// Expected run length for `unary`.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Restore the original file from a container.
    Decompress {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a compression-ratio sweep and write CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        /// Comma-separated external compressors, e.g. gzip,bzip2.
        #[arg(long, value_delimiter = ',')]
        external: Vec<String>,
        /// Run trials on the current thread only.
        #[arg(long)]
        sequential: bool,
    },
}

fn infer_m(len: usize) -> Result<u32> {
    (0..=pcfg_compress::coding::container::MAX_FIB_INDEX)
        .find(|&m| fib_len(m) == len)
        .with_context(|| format!("input length {len} is not a Fibonacci length; pass --m"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Gen {
            m,
            noise,
            k,
            ratio,
            seed,
            out,
        } => {
            let kind = match noise {
                Noise::Zero => NoiseKind::Type0,
                Noise::K => NoiseKind::TypeK(k),
            };
            let t = add_noise(m, NoiseSpec { kind, ratio, seed })?;
            fs::write(&out, &t.text).with_context(|| format!("writing {}", out.display()))?;
            println!("{}", t.altered_positions.len());
        }
        Cmd::Compress {
            method,
            m,
            k,
            n,
            input,
            out,
        } => {
            let text = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let method: Method = method.parse()?;
            let m = || m.map_or_else(|| infer_m(text.len()), Ok);
            let scheme = match method {
                Method::Repair => Scheme::Repair,
                Method::PcfgRepair => Scheme::PcfgRepair,
                Method::FibG0 => Scheme::FibG0 { m: m()? },
                Method::FibGk => Scheme::FibGk { m: m()?, k },
                Method::Unary => {
                    if let Some(n) = n.filter(|&n| n != text.len() as u64) {
                        bail!("--n {n} does not match input length {}", text.len());
                    }
                    Scheme::Unary
                }
            };
            let bytes = compress(&text, scheme)?.to_bytes();
            fs::write(&out, &bytes).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("{method}: {} -> {} bytes", text.len(), bytes.len());
        }
        Cmd::Decompress { input, out } => {
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let text = decompress_bytes(&bytes)?;
            fs::write(&out, &text).with_context(|| format!("writing {}", out.display()))?;
        }
        Cmd::Bench {
            config,
            csv,
            external,
            sequential,
        } => {
            let mut cfg = BenchConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            for tool in external {
                if !cfg.external.contains(&tool) {
                    cfg.external.push(tool);
                }
            }
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let report = bench::run(&cfg, exec)?;
            for r in report
                .records
                .iter()
                .filter(|r| r.row == RowKind::Unavailable)
            {
                eprintln!(
                    "warning: external compressor {:?} not found, skipped",
                    r.method
                );
            }
            let file =
                fs::File::create(&csv).with_context(|| format!("creating {}", csv.display()))?;
            report.write_csv(BufWriter::new(file))?;
            eprintln!("wrote {} rows to {}", report.records.len(), csv.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
