//! `trivml`: evaluate trivariate Mittag-Leffler functions, solve three-order
//! Caputo problems, run the verification checks and tabulate curves as CSV.

mod commands;
mod failure;
mod options;
mod table;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use failure::Failure;
use options::Options;

#[derive(Parser, Debug)]
#[command(name = "trivml", version, about = "Trivariate Mittag-Leffler functions and three-order Caputo problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// E^η_{α,β,γ,δ}(u, v, w) as one CSV row
    Eval,
    /// r^{δ−1}E(λ₁r^α, λ₂r^β, λ₃r^γ) at --r or on a uniform grid
    EvalUnivariate,
    /// D^α y − λ₃D^β y − λ₂D^γ y − λ₁y = g, y(0) = y0, on [0, t-max]
    Solve,
    /// run the identity and oracle checks
    Verify,
    /// curves for the four function families
    Table,
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let o = cli.options.resolve()?;
    let (bytes, code) = match cli.command {
        Command::Eval => (commands::eval(&o)?, 0),
        Command::EvalUnivariate => (commands::eval_univariate_cmd(&o)?, 0),
        Command::Solve => (commands::solve_cmd(&o)?, 0),
        Command::Table => (table::table_cmd(&o)?, 0),
        Command::Verify => {
            let (b, ok) = commands::verify_cmd(&o)?;
            (b, commands::verify_exit(ok))
        }
    };
    commands::emit(o.out.as_deref(), &bytes)?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { failure::INVALID as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
