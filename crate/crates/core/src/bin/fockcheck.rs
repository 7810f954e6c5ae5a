//! Runs the verification suites and writes `report.json` plus `tables/*.csv`.
//!
//! ```text
//! fockcheck run-all --out results
//! fockcheck verify-kernels --config cfg.json --seed 7 --out results
//! ```

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fock_vanishing::harness::{run, Config, Suite};

#[derive(Debug, Parser)]
#[command(name = "fockcheck", version, about = "Verification suites for rotation-invariant Fock-space operators")]
struct Cli {
    /// Suite to run.
    #[arg(value_enum, required_unless_present = "subcommand", conflicts_with = "subcommand")]
    suite: Option<Suite>,
    /// Suite to run, as a flag.
    #[arg(long, value_enum)]
    subcommand: Option<Suite>,
    /// JSON configuration; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "fockcheck-out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let suite = cli.suite.or(cli.subcommand).expect("clap enforces one suite");
    let mut cfg = match &cli.config {
        Some(path) => match Config::load(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("fockcheck: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let output = match run(suite, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("fockcheck: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = output.write(&cli.out) {
        eprintln!("fockcheck: writing {}: {e}", cli.out.display());
        return ExitCode::from(2);
    }
    for r in &output.reports {
        println!("{} {:<28} {:>8.2}s", if r.pass { "PASS" } else { "FAIL" }, r.name, r.runtime);
        for m in r.measured.iter().filter(|m| !m.pass) {
            println!("     {} = {:e} ({:?} {:e})", m.quantity, m.value, m.relation, m.tolerance);
        }
    }
    if output.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
