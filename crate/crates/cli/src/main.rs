use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hilfer_relax_cli::{
    cap_threads, load_config, run_batch, run_relaxation, run_solve, run_verify, CliError, Overrides,
};

/// Hilfer-fractional impulsive heat equation under ordinary and relaxed controls.
///
/// Exit codes: 0 when every checked clause passes, 1 on an error, 2 when the
/// configuration is rejected (the ledger is printed), 3 when a solve, relax
/// or batch ledger fails, and 10 + i when verification suite i is the first
/// to fail.
#[derive(Parser)]
#[command(name = "hilfer-relax", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON scenario configuration; the built-in benchmark when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed of the searches and the sampled suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Mesh nodes per impulse interval.
    #[arg(long, global = true)]
    mesh_n: Option<usize>,
    /// Number of retained sine modes.
    #[arg(long, global = true)]
    modes: Option<usize>,
    /// Picard stopping tolerance on the weighted-norm update.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for parallel work.
    #[arg(long, global = true, env = "HILFER_RELAX_THREADS", hide = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve under the study control; write the trajectory and bound checks.
    Solve,
    /// Run the relaxation study over doubling piece counts.
    Relax,
    /// Run every verification suite the configuration engages.
    Verify,
    /// Sweep (μ, ν) and check every benchmark trajectory against its bounds.
    Batch,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let c = &cli.common;
    if let Some(n) = c.threads {
        cap_threads(n.max(1))?;
    }
    let overrides = Overrides {
        seed: c.seed,
        mesh_n: c.mesh_n,
        modes: c.modes,
        tol: c.tol,
    };
    let config = load_config(c.config.as_deref(), &overrides)?;
    let ledger = match cli.command {
        Command::Solve => run_solve(&config, &c.out)?,
        Command::Relax => run_relaxation(&config, &c.out)?,
        Command::Batch => run_batch(&config, &c.out)?,
        Command::Verify => {
            let results = run_verify(&config, &c.out, config.search.seed)?;
            let mut code = 0;
            for (i, r) in results.iter().enumerate() {
                println!(
                    "{} suite {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.suite
                );
                print!("{}", r.ledger.render());
                if !r.passed && code == 0 {
                    code = 10 + i as u8;
                }
            }
            return Ok(code);
        }
    };
    print!("{}", ledger.render());
    Ok(if ledger.passed() { 0 } else { 3 })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e @ CliError::Validation(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
