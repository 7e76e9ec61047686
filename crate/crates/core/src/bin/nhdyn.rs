use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use nhdyn::cli::{load_config, run, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Decompose,
    Flow,
    Evolve,
    Verify,
    Spectrum,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Decompose => Command::Decompose,
            Cmd::Flow => Command::Flow,
            Cmd::Evolve => Command::Evolve,
            Cmd::Verify => Command::Verify,
            Cmd::Spectrum => Command::Spectrum,
        }
    }
}

/// Time-dependent non-Hermitian su(2) / su(1,1) dynamics.
///
/// Exit status: 0 success, 2 certification failure, 1 error.
#[derive(Debug, Parser)]
#[command(name = "nhdyn", version)]
struct Args {
    command: Cmd,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the flow relative tolerance.
    #[arg(long)]
    rtol: Option<f64>,
    /// Override the flow absolute tolerance.
    #[arg(long)]
    atol: Option<f64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = load_config(&args.config).and_then(|mut cfg| {
        cfg.set_tolerances(args.rtol, args.atol)?;
        run(args.command.into(), &cfg, &args.out)
    });
    match result {
        Ok(report) if report.certified => ExitCode::SUCCESS,
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("nhdyn: {w}");
            }
            eprintln!("nhdyn: {} not certified", report.command);
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("nhdyn: error: {e}");
            ExitCode::from(1)
        }
    }
}
