use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use isocap::config::{
    BlowupConfig, ConcentrationConfig, Flags, ProofChainConfig, Resolved, RieszConfig, Theorem1Config,
};
use isocap::experiments::{blowup, concentration, proof_chain, riesz, theorem1, Outcome};
use isocap::AppResult;

/// Concentration and isoperimetry experiments on high-dimensional spheres.
///
/// Exit status: 0 when every checked property held, 2 when the run completed
/// but a property failed (the record is still written), 1 on usage or
/// configuration errors.
#[derive(Debug, Parser)]
#[command(name = "isocap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability that two Haar points are within eps of orthogonal.
    Concentration(Flags),
    /// Measure of the (pi/2 - theta + eps)-neighbourhood of each set.
    Blowup(Flags),
    /// Monte Carlo success probability of the cap-intersection bound.
    Theorem1(Flags),
    /// Random trials of the rearrangement inequality.
    Riesz(Flags),
    /// Rearrangement chain checks for one zonal set.
    ProofChain(Flags),
}

fn execute(command: &Command) -> AppResult<Outcome> {
    let (flags, run): (&Flags, fn(&Resolved) -> AppResult<Outcome>) = match command {
        Command::Concentration(f) => (f, |r| {
            Ok(concentration::run(&ConcentrationConfig::resolve(r)?)?.into_outcome())
        }),
        Command::Blowup(f) => (f, |r| Ok(blowup::run(&BlowupConfig::resolve(r)?)?.into_outcome())),
        Command::Theorem1(f) => (f, |r| Ok(theorem1::run(&Theorem1Config::resolve(r)?)?.into_outcome())),
        Command::Riesz(f) => (f, |r| Ok(riesz::run(&RieszConfig::resolve(r)?)?.into_outcome())),
        Command::ProofChain(f) => (f, |r| {
            Ok(proof_chain::run(&ProofChainConfig::resolve(r)?)?.into_outcome())
        }),
    };
    let resolved = Resolved::from_flags(flags)?;
    let start = Instant::now();
    let outcome = run(&resolved)?;
    outcome
        .artifacts
        .write(resolved.out.as_deref(), &outcome.sidecar(start.elapsed()))?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("a verification property failed; see the record");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
