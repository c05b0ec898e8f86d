//! `tkr-bench`: Gaussian-density Hadamard-square benchmark.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage error, 3 resource cap.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use tucker_cross::bench::{core_memory_mb, run_pipeline_full, BenchConfig, BenchReport, CSV_HEADER, SCHEMA};
use tucker_cross::io::{save_container, save_ortho, write_atomic};
use tucker_cross::recompress::{truncate, TruncationConfig};
use tucker_cross::{Error, Tucker};

#[derive(Parser)]
#[command(name = "tkr-bench", version, about = "Tucker Hadamard-square truncation benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the density and its Tucker compression as TKR1 containers.
    Gen(Common),
    /// Run the full pipeline and write report.json and summary.csv.
    Run(Common),
    /// Print a stored report.
    Report {
        /// Directory holding report.json, or the report file itself.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// JSON benchmark config.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Compare against dense tensors (small n only).
    #[arg(long)]
    dense_check: bool,
    /// Output directory; defaults to the config's `out` or `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Resource(anyhow::Error),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::Usage(_)) => Failure::Usage(e),
            Some(Error::Resource(_)) => Failure::Resource(e),
            _ => Failure::Other(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn load_config(c: &Common) -> Result<(BenchConfig, PathBuf), Failure> {
    let text = fs::read_to_string(&c.config)
        .with_context(|| format!("reading config {}", c.config.display()))
        .map_err(Failure::Usage)?;
    let mut cfg: BenchConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", c.config.display()))
        .map_err(Failure::Usage)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    cfg.dense_check |= c.dense_check;
    let out = c
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    cfg.validate()?;
    Ok((cfg, out))
}

fn write_json(path: &Path, value: &BenchReport) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes).with_context(|| format!("writing {}", path.display()))
}

fn gen(c: &Common) -> Result<(), Failure> {
    let (cfg, out) = load_config(c)?;
    let density = tucker_cross::bench::gen_density(&cfg)?;
    let tcfg = TruncationConfig {
        eps_gram: cfg.eps_gram,
        r_max: cfg.r_max.map(|r| [r; 3]),
        ..TruncationConfig::default()
    };
    let (input, rep) = truncate(&density, &tcfg)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    save_container(&out.join("density"), &density)?;
    save_ortho(&out.join("input"), &input)?;
    println!(
        "density: n = {}, terms = {}; Tucker ranks {:?}, rel error {:.3e}",
        cfg.n,
        density.ranks()[0],
        input.ranks(),
        rep.rel_frob_error
    );
    println!("wrote {}/density and {}/input", out.display(), out.display());
    Ok(())
}

fn run(c: &Common) -> Result<(), Failure> {
    let (cfg, out) = load_config(c)?;
    let result = run_pipeline_full(&cfg)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write_json(&out.join("report.json"), &result.report)?;
    let csv = format!("{CSV_HEADER}\n{}\n", result.report.csv_row());
    write_atomic(&out.join("summary.csv"), csv.as_bytes())?;
    save_ortho(&out.join("output"), &result.output)?;
    print_report(&result.report);
    if result.report.status != "complete" {
        return Err(Failure::Resource(anyhow::anyhow!(
            "partial result: {}",
            result.report.notes.join("; ")
        )));
    }
    Ok(())
}

fn report(out: &Path) -> Result<(), Failure> {
    let path = if out.is_dir() { out.join("report.json") } else { out.to_path_buf() };
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Usage)?;
    let rep: BenchReport = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::Usage)?;
    if rep.schema != SCHEMA {
        return Err(Failure::Usage(anyhow::anyhow!("unsupported schema {:?}", rep.schema)));
    }
    print_report(&rep);
    println!();
    println!("{CSV_HEADER}");
    println!("{}", rep.csv_row());
    Ok(())
}

fn print_report(rep: &BenchReport) {
    println!("n = {}, terms = {}, seed = {} ({})", rep.config.n, rep.terms, rep.config.seed, rep.status);
    for note in &rep.notes {
        println!("  note: {note}");
    }
    println!("input ranks      {:?}  rel error {:.2e}", rep.input_ranks, rep.input_rel_error);
    println!("hadamard ranks   {:?}", rep.hadamard_ranks);
    println!("gram cross       {:?}  rel error {:.2e}  (bound {:.2e})", rep.output_ranks, rep.rel_error_cross, rep.error_bound);
    if let (Some(r), Some(e)) = (rep.refined_ranks, rep.rel_error_als) {
        println!("after ALS sweep  {r:?}  rel error {e:.2e}");
    }
    if let Some(d) = &rep.dense_check {
        println!("dense check      crossed {:.2e}  als {:.2e}", d.rel_error_cross, d.rel_error_als);
    }
    let t = &rep.timings;
    println!(
        "time [s]: subspaces {:.3}  core {:.3}  error {:.3}  refine {:.3}  total {:.3}",
        t.subspaces, t.core, t.error, t.refine, t.total
    );
    let m = &rep.memory;
    println!(
        "memory [MB]: hadamard kron {:.3}, as dense core {:.3}, output core {:.3}, dense tensor {:.1}",
        m.hadamard_kron_mb, m.hadamard_dense_core_mb, m.output_core_mb, m.dense_tensor_mb
    );
    let r = rep.output_ranks.iter().copied().max().unwrap_or(0).max(1);
    let row: Vec<String> = (3..=6)
        .map(|d| core_memory_mb(r, d).map(|v| format!("d={d}: {v:.3}")).unwrap_or_default())
        .collect();
    println!("r^d storage at r = {r} [MB]: {}", row.join(", "));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(c) => gen(c),
        Command::Run(c) => run(c),
        Command::Report { out } => report(out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(e)) => {
            eprintln!("resource cap: {e:#}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
