use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qrom::benchmark::{RecognizerChoice, RunOptions};
use qrom::commands::{self, InputFormat, StoreMode};
use qrom_core::qrom_bank::{DEFAULT_EPSILON, DEFAULT_SHOTS_PER_ARM};

/// Quantum filter-bank and projective-measurement image recognition simulator.
#[derive(Parser)]
#[command(name = "qrom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical-phase state of an image as JSON.
    Encode {
        image: PathBuf,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
    },
    /// Build a filter bank or orthogonal memory from images.
    Store {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        #[arg(long, value_enum)]
        mode: StoreMode,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        /// Input intensity I0 of the beam (beam mode).
        #[arg(long, default_value_t = 1.0)]
        intensity: f64,
    },
    /// Recognize a query image against a stored memory.
    Recognize {
        memory: PathBuf,
        query: PathBuf,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        /// Particles per arm (beam mode).
        #[arg(long, default_value_t = DEFAULT_SHOTS_PER_ARM)]
        shots: u64,
        /// Acceptance threshold: accept when score > 1 - epsilon (beam mode).
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a seeded benchmark sweep and write CSV and JSON reports.
    Benchmark {
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Override the config's recognizer.
        #[arg(long, value_enum)]
        mode: Option<RecognizerChoice>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Record wall-clock seconds (makes reports non-reproducible).
        #[arg(long)]
        timing: bool,
    },
}

fn run(cli: Cli) -> qrom::Result<()> {
    match cli.command {
        Command::Encode { image, format } => print!("{}", commands::encode(&image, format)?),
        Command::Store {
            images,
            mode,
            out,
            format,
            intensity,
        } => print!("{}", commands::store(&images, mode, &out, format, intensity)?),
        Command::Recognize {
            memory,
            query,
            format,
            shots,
            epsilon,
            seed,
        } => {
            let out = commands::recognize(&memory, &query, format, shots, epsilon, seed)?;
            print!("{}", out.json);
            eprintln!("{}", out.summary);
        }
        Command::Benchmark {
            config,
            out_dir,
            mode,
            jobs,
            timing,
        } => {
            let opts = RunOptions {
                jobs: jobs.max(1),
                timing,
                reverse: false,
            };
            print!("{}", commands::benchmark(&config, &out_dir, mode, opts)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
