//! `cascade-dim`: CSV front end for cascade image dimensions.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input or
//! non-subcritical model, 3 resource guard.

mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use cascade_dim::{Error, Exec};

use args::{Cli, Command};

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("CASCADE_DIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("CASCADE_DIM_THREADS must be a positive integer, got `{v}`"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Resource(_) | Error::Depth { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let exec = Exec::default();
    let outcome = match &cli.command {
        Command::TheoryCurves(a) => commands::theory_curves(a, exec).map(|_| true),
        Command::Legendre(a) => commands::legendre(a).map(|_| true),
        Command::SimulateBoxdim(a) => commands::simulate_boxdim(a, exec).map(|_| true),
        Command::SimulateLdp(a) => commands::simulate_ldp(a, exec).map(|_| true),
        Command::Verify(a) => commands::verify(a, exec),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
