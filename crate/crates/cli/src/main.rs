use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rwrs_cli::run::{estimate_b, simulate, verify, Options, Suite};

#[derive(Parser)]
#[command(
    name = "rwrs",
    version,
    about = "Monte Carlo lab for U-statistics of random walks in random scenery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate replicates and write records.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Run verification suites and write report.json.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Write SVG diagnostics next to the report.
        #[arg(long)]
        plots: bool,
        /// Reuse a records.csv instead of simulating.
        #[arg(long)]
        ingest: Option<PathBuf>,
    },
    /// Estimate the return-count constant b for a transient walk.
    EstimateB {
        #[command(flatten)]
        common: Common,
    },
}

fn options(c: Common) -> Options {
    Options {
        config: c.config,
        out: c.out,
        threads: c.threads,
        ..Options::default()
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { common } => simulate(&options(common)),
        Command::Verify {
            common,
            suite,
            plots,
            ingest,
        } => {
            let opts = Options {
                plots,
                ingest,
                ..options(common)
            };
            verify(&opts, suite)
        }
        Command::EstimateB { common } => estimate_b(&options(common)),
    };
    match result {
        Ok(outcome) => {
            if let Some(report) = &outcome.report {
                for s in &report.suites {
                    println!("{:<10} {:?}", s.suite, s.status);
                }
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
