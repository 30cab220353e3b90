use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dtfl_cli::{
    exit, sim_files, solve_files, verify, write_files, CliError, ScenarioConfig, SimOptions, SolveOptions,
    VerifyOptions,
};

#[derive(Parser)]
#[command(name = "dtfl", version, about = "Delay-optimal scheduling and simulation of DT-assisted federated learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the round delay and write the Q sweep, multiplier trace and summary.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Step of the outer search over the aggregate jamming level, W.
        #[arg(long)]
        q_step: Option<f64>,
    },
    /// Run the multi-cluster FL simulation and write round logs and the ledger.
    Sim {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        rounds: Option<u32>,
        /// Aggregate every cluster model without checking it.
        #[arg(long)]
        no_verify: bool,
        #[arg(long)]
        q_step: Option<f64>,
    },
    /// Cross-check the solver against the brute-force and numerical probes.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Random instances for the pivot uniqueness probe.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, hide = true)]
        perturb_y: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { config, out, seed, q_step } => {
            let cfg = ScenarioConfig::load(&config)?;
            let files = solve_files(&cfg, &SolveOptions { seed, q_step })?;
            write_files(&out, &files)
        }
        Command::Sim { config, out, seed, rounds, no_verify, q_step } => {
            let cfg = ScenarioConfig::load(&config)?;
            let files = sim_files(&cfg, &SimOptions { seed, rounds, no_verify, q_step })?;
            write_files(&out, &files)
        }
        Command::Verify { config, seed, trials, perturb_y } => {
            let cfg = ScenarioConfig::load(&config)?;
            let report = verify(&cfg, &VerifyOptions { seed, trials, perturb_y })?;
            print!("{}", report.table());
            report.into_result().map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
