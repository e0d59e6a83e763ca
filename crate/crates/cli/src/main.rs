use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdho_cli::commands::{cmd_classical, cmd_compare, cmd_evolve, cmd_steady, cmd_verify};
use qdho_cli::config::parse_override;
use qdho_cli::{CliError, CliResult, ConfigFile, Status};
use qdho_core::identities::VerifyOptions;

#[derive(Debug, Parser)]
#[command(name = "qdho", version, about = "Damped quantum oscillator: analytic propagator, oracles and identity checks")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file, or `stdout` / `-`.
    #[arg(long, global = true, default_value = "stdout")]
    out: String,

    /// Re-run every time point at twice the dimension and fail if it moves.
    #[arg(long, global = true)]
    check_truncation: bool,

    /// Override one tolerance, e.g. `--tol-override oracle_tol=1e-8`.
    #[arg(long = "tol-override", global = true, value_name = "KEY=VALUE", value_parser = parse_override)]
    tol_override: Vec<(String, f64)>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve the configured state and write a CSV time series.
    Evolve,
    /// Run the analytic propagator against both numeric oracles.
    Compare,
    /// Relax towards the thermal steady state and report the deviation.
    Steady,
    /// Classical damped oscillator, analytic against RK4, as CSV.
    Classical,
    /// Run every identity suite.
    Verify {
        #[arg(long, default_value_t = VerifyOptions::default().seed)]
        seed: u64,
        /// Negate E(t) to confirm the disentangling suites can fail.
        #[arg(long, hide = true)]
        flip_e_sign: bool,
    },
}

fn config(cli: &Cli) -> CliResult<ConfigFile> {
    match &cli.config {
        Some(path) => ConfigFile::load(path),
        None => Err(CliError::validation("this command needs --config <path>")),
    }
}

fn emit(out: &str, text: &str) -> CliResult<()> {
    if out == "stdout" || out == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        stdout.flush()?;
    } else {
        std::fs::write(out, text).map_err(|e| CliError::validation(format!("cannot write {out}: {e}")))?;
    }
    Ok(())
}

/// Writes the report, then turns a failed check into exit status 2.
fn report((text, pass): (String, bool), out: &str) -> CliResult<()> {
    emit(out, &text)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::tolerance("report ends in RESULT fail"))
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Evolve => {
            let cfg = config(cli)?.run_config(&cli.tol_override, cli.check_truncation)?;
            emit(&cli.out, &cmd_evolve(&cfg)?)
        }
        Command::Compare => {
            let cfg = config(cli)?.run_config(&cli.tol_override, cli.check_truncation)?;
            report(cmd_compare(&cfg)?, &cli.out)
        }
        Command::Steady => {
            let (params, trunc, rho0) = config(cli)?.steady_inputs()?;
            report(cmd_steady(&params, &trunc, &rho0)?, &cli.out)
        }
        Command::Classical => emit(&cli.out, &cmd_classical(&config(cli)?.classical_config()?)?),
        Command::Verify { seed, flip_e_sign } => {
            let opts = VerifyOptions { seed: *seed, flip_e_sign: *flip_e_sign };
            report(cmd_verify(&opts)?, &cli.out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on bad arguments; 2 is reserved for failed checks.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::Validation.into() } else { Status::Success.into() };
        }
    };
    match run(&cli) {
        Ok(()) => Status::Success.into(),
        Err(e) => {
            eprintln!("error: {e}");
            e.status.into()
        }
    }
}
