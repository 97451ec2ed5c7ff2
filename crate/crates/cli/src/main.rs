mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::{Cli, Command};
use commands::{CompareOpts, SimulateOpts};
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bound { scenario, json } => commands::bound(&scenario.resolve()?, json),
        Command::Simulate {
            scenario,
            mode,
            steps,
            out,
            dump_sl,
            json,
        } => commands::simulate(
            &scenario.resolve()?,
            SimulateOpts {
                mode,
                steps,
                out: out.as_deref(),
                dump_sl,
                json,
            },
        ),
        Command::Compare {
            scenario,
            budget_min,
            budget_max,
            k_max,
            mode,
            out,
        } => commands::compare(
            &scenario.resolve()?,
            CompareOpts {
                budget_min,
                budget_max,
                k_max,
                mode,
                out: out.as_deref(),
            },
        ),
        Command::Witness {
            scenario,
            t,
            n,
            json,
        } => commands::witness(&scenario.resolve()?, t, n, json),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let name = match &cli.command {
        Command::Bound { .. } => "bound",
        Command::Simulate { .. } => "simulate",
        Command::Compare { .. } => "compare",
        Command::Witness { .. } => "witness",
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 2 {
                let mut cmd = Cli::command();
                cmd.build();
                let usage = cmd.find_subcommand_mut(name).map(|c| c.render_usage());
                if let Some(usage) = usage {
                    eprintln!("\n{usage}\n\nFor more information, try 'memcool {name} --help'.");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
