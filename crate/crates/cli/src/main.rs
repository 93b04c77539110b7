//! `gbl`: runs one named experiment and reports its checks.
//!
//! Exit status is 0 when every asserted check passes, 1 when a check fails
//! or the run errors, and 2 on a usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use gbl_core::experiments::{run, Experiment, ExperimentConfig, OutputFormat};
use gbl_core::Exponent;

#[derive(Debug, Parser)]
#[command(name = "gbl", version, about = "Greedy-basis experiments in mixed-norm sequence spaces")]
struct Args {
    /// construct-and-verify, projection-norms, greedy-constants, property-a,
    /// maximal or nondemocracy-demo
    #[arg(long, value_parser = parse_experiment)]
    experiment: Experiment,

    /// Inner exponent, a number >= 1 or "inf"
    #[arg(long, default_value = "2")]
    p: Exponent,

    /// Outer exponent, finite and > 1
    #[arg(long, default_value_t = 2.0)]
    q: f64,

    /// Number of levels N of the construction
    #[arg(long, default_value_t = 2)]
    n_levels: usize,

    /// Target democracy tolerance in (0, 1)
    #[arg(long, default_value_t = 0.9)]
    eps: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Cap on the number of outer blocks n_N (accepts 1e9)
    #[arg(long, default_value = "1e9", value_parser = parse_count)]
    cap_family: u64,

    /// Random samples per sampled measurement
    #[arg(long, default_value_t = 2000)]
    samples: usize,

    /// Directory for report files; without it the report goes to stdout
    #[arg(long)]
    out_dir: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 1.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("'{s}' is not a positive integer")),
    }
}

fn threads_from_env() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("GBL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.parse().with_context(|| format!("GBL_THREADS='{raw}' is not a count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn execute(args: Args) -> anyhow::Result<bool> {
    threads_from_env()?;
    let format = match args.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    };
    let config = ExperimentConfig {
        experiment: args.experiment,
        seed: args.seed,
        p: args.p,
        q: args.q,
        n_levels: args.n_levels,
        eps: args.eps,
        cap_family: args.cap_family,
        samples: args.samples,
    };
    let report = run(&config)?;
    match &args.out_dir {
        Some(dir) => {
            for path in report.write(dir, format)? {
                eprintln!("wrote {}", path.display());
            }
            for c in &report.checks {
                let bound = c.bound.map_or("-".to_string(), |b| format!("{b:e}"));
                println!("{} {} value={:e} bound={bound}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value);
            }
        }
        None => match format {
            OutputFormat::Json => println!("{}", report.to_json()),
            OutputFormat::Csv => print!("{}", report.checks_csv()),
        },
    }
    Ok(report.passed())
}
