use clap::Parser;
use emproc_cli::config::OutputFormat;
use std::path::PathBuf;
use std::process::ExitCode;

/// Experiment runner: seminorms, typical sets, rate functions and
/// random-codebook simulations from a JSON config, with deterministic seeds.
#[derive(Parser, Debug)]
#[command(name = "emproc", version, about)]
struct Args {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,

    /// Seed for all randomness (overrides the config's `seed`).
    #[arg(long)]
    seed: Option<u64>,

    /// Output artifact path (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format (overrides the config's `format`).
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,

    /// Worker threads for trial loops. Affects speed only, never results.
    /// Falls back to GC_COORD_THREADS, then 1.
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(format!("unknown format {other:?} (expected csv or json)")),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    match emproc_cli::run(&text, args.seed, args.out, args.format, args.threads) {
        Ok(outcome) => {
            println!("{}", outcome.summary_line);
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
