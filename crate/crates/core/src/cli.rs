//! Command-line front end of the `aos` binary.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::bench::{self, ExperimentConfig};
use crate::data::{generate_clover, load_csv, load_keel, save_csv, LabelColumn};
use crate::error::Result;
use crate::samplers::{resample, SamplerKind, SamplerSpec};

#[derive(Debug, Parser)]
#[command(
    name = "aos",
    version,
    about = "Minority oversampling and imbalanced-classification benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a cross-validated benchmark described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; defaults to AOS_WORKERS or the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Rebalance one dataset and write it as CSV.
    Resample {
        /// CSV file, or a Keel `.dat` file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        sampler: SamplerKind,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        r: usize,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        #[arg(long, default_value_t = 0.5)]
        pt: f64,
        #[arg(long, default_value_t = 0.5)]
        wt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `last`, a zero-based index, or a header name (CSV input only).
        #[arg(long, default_value = "last")]
        label_column: String,
        /// Class that becomes the minority when both classes are the same size.
        #[arg(long)]
        positive_label: Option<String>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Write a synthetic five-petal clover dataset as CSV.
    GenClover {
        #[arg(long, default_value_t = 500)]
        majority: usize,
        #[arg(long, default_value_t = 100)]
        minority: usize,
        /// Percent of minority points moved onto petal borders (0-70).
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=70))]
        disturbance: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

/// Parses `argv` (program name first) and executes it. Returns 0 on success,
/// 1 on usage errors and 2 when the command itself fails.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config, workers } => {
            let cfg = ExperimentConfig::load(&config)?;
            let workers = workers.unwrap_or_else(bench::default_workers);
            let report = bench::run_with_workers(&cfg, workers)?;
            if cfg.output.is_none() {
                print!("{}", report.to_csv());
            }
            Ok(())
        }
        Command::Resample {
            input,
            sampler,
            k,
            r,
            eta,
            pt,
            wt,
            seed,
            label_column,
            positive_label,
            output,
        } => {
            let is_keel = input
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("dat"));
            let d = if is_keel {
                load_keel(&input, positive_label.as_deref())?
            } else {
                let col: LabelColumn = label_column.parse().expect("infallible");
                load_csv(&input, &col, positive_label.as_deref())?
            };
            let spec = SamplerSpec {
                kind: sampler,
                k,
                r,
                eta,
                p_t: pt,
                w_t: wt,
                seed,
            };
            let out = resample(&d, &spec)?;
            save_csv(&out.dataset, &output)
        }
        Command::GenClover {
            majority,
            minority,
            disturbance,
            seed,
            output,
        } => save_csv(
            &generate_clover(majority, minority, disturbance, seed)?,
            &output,
        ),
    }
}
