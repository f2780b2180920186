//! Command-line front end: CROC, AUC and effective-rate sweeps, density
//! tables and closed-form verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunArgs;

/// Bad flags, files or settings. Exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// At least one verification record failed. Exits with status 1.
#[derive(Debug, thiserror::Error)]
#[error("{failed} of {total} verification checks failed")]
pub struct VerifyFailed {
    pub failed: usize,
    pub total: usize,
}

#[derive(Parser)]
#[command(
    name = "edfading",
    version,
    about = "Energy detection and effective rate over fading channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complementary ROC: missed detection against false alarm at one mean SNR.
    Croc(RunArgs),
    /// Complementary average AUC over a mean-SNR sweep.
    Auc(RunArgs),
    /// Effective rate in bits/s/Hz over a mean-SNR sweep.
    Effrate(RunArgs),
    /// Closed forms against quadrature and Monte Carlo.
    Verify(RunArgs),
    /// Density and distribution function of the SNR on a grid.
    Pdf(RunArgs),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<VerifyFailed>() {
        return 1;
    }
    if err.is::<UsageError>() {
        return 2;
    }
    match err.downcast_ref::<edfading::Error>() {
        Some(edfading::Error::InvalidParameter(_)) => 2,
        Some(_) => 3,
        None => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (run, args): (fn(&RunArgs) -> anyhow::Result<()>, RunArgs) = match cli.command {
        Command::Croc(a) => (commands::croc, a),
        Command::Auc(a) => (commands::auc, a),
        Command::Effrate(a) => (commands::effrate, a),
        Command::Verify(a) => (commands::verify, a),
        Command::Pdf(a) => (commands::pdf, a),
    };
    match args.merge_json().and_then(|a| run(&a)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
