//! `hardy`: bounds, refinement traces and oracle runs for weighted discrete
//! Hardy inequalities.

mod commands;
mod input;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use input::{OptionFlags, ProblemArgs};

/// Exit statuses beyond 0 (success) and 1 (runtime error).
pub mod exit {
    pub const PARSE: u8 = 2;
    pub const NON_CONVERGENCE: u8 = 3;
    pub const INVARIANT: u8 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "hardy", version, about = "Optimal constants of weighted discrete Hardy inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Two-sided bounds on the optimal constant as a JSON report.
    Bound {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        options: OptionFlags,
        /// Also run the brute-force oracle.
        #[arg(long)]
        oracle: bool,
        #[arg(long, short)]
        output: Option<std::path::PathBuf>,
    },
    /// Upper and lower refinement sequences as CSV.
    Refine {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        options: OptionFlags,
        #[arg(long, short)]
        output: Option<std::path::PathBuf>,
    },
    /// Brute-force estimate of the optimal constant and its maximizer.
    Oracle {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        options: OptionFlags,
        #[arg(long, short)]
        output: Option<std::path::PathBuf>,
    },
    /// Reproduce a built-in example with its closed-form values.
    Example {
        #[arg(value_enum)]
        name: ExampleName,
        /// Truncation.
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, short)]
        output: Option<std::path::PathBuf>,
    },
    /// Run the invariant suite.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Deliberately break a component to check the suite catches it.
        #[arg(long, value_enum)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    Geometric,
    Bliss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Replace the improved factor by a value above the classical one.
    KExceedsTildeK,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bound {
            problem,
            options,
            oracle,
            output,
        } => commands::bound(&problem, &options, oracle, output.as_deref()),
        Command::Refine {
            problem,
            options,
            output,
        } => commands::refine(&problem, &options, output.as_deref()),
        Command::Oracle {
            problem,
            options,
            output,
        } => commands::oracle(&problem, &options, output.as_deref()),
        Command::Example { name, n, output } => commands::example(name, n, output.as_deref()),
        Command::Selftest { seed, inject_fault } => commands::selftest(seed, inject_fault),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
