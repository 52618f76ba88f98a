use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stablim_cli::{acceptance, catalog, run_file, RunOptions, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "stablim", version, about = "Stable limits of heavy-tailed partial sums")]
struct Cli {
    /// Worker threads (overrides STABLIM_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML configuration.
    Run {
        config: PathBuf,
        /// Report directory (overrides STABLIM_OUT and the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the model families and their parameters.
    ListModels,
    /// Run the acceptance suite.
    Selftest {
        /// Only these criteria, comma separated.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let opts = RunOptions {
        threads: cli.threads,
        ..RunOptions::default()
    };
    match cli.command {
        Command::Run { config, out, seed } => {
            let opts = RunOptions { out, seed, ..opts };
            let result = opts.with_env().and_then(|o| run_file(&config, &o));
            match result {
                Ok(outcome) => {
                    for v in &outcome.verdicts {
                        println!("{}: {} ({})", v.name, if v.passed { "pass" } else { "fail" }, v.detail);
                    }
                    println!("reports written to {}", outcome.out_dir.display());
                    ExitCode::from(outcome.exit_code())
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
        Command::ListModels => {
            print!("{}", catalog::list_models());
            ExitCode::SUCCESS
        }
        Command::Selftest { only } => {
            let opts = match opts.with_env() {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code());
                }
            };
            let run = || acceptance::run_selected(&only, |o| println!("{}", o.line()));
            let outcomes = match opts.threads {
                Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                    Ok(pool) => pool.install(run),
                    Err(e) => {
                        eprintln!("error: cannot start {k} threads: {e}");
                        return ExitCode::from(EXIT_USAGE);
                    }
                },
                None => run(),
            };
            ExitCode::from(if outcomes.iter().all(|o| o.passed) { 0 } else { 1 })
        }
    }
}
