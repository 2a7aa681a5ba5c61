mod args;
mod commands;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn run(cli: &Cli) -> anyhow::Result<output::RunRecord> {
    match &cli.command {
        Command::Threshold(a) => commands::threshold(a),
        Command::Thermal(a) => commands::thermal(a),
        Command::Sdc(a) => commands::sdc(a),
        Command::WitnessTheorem(a) => commands::witness_theorem(a),
        Command::Tppi(a) => commands::tppi(a),
        Command::Lines(a) => commands::lines(a),
        Command::FitTensor(a) => commands::fit_tensor_cmd(a),
        Command::FitRelax(a) => commands::fit_relax(a),
        Command::Entangle(a) => commands::entangle(a),
        Command::Pulses(a) => commands::pulses(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let record = run(&cli).and_then(|r| Ok(serde_json::to_string_pretty(&r)?));
    match record {
        Ok(text) => match writeln!(io::stdout().lock(), "{text}") {
            // a closed pipe downstream is not our failure
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
            _ => ExitCode::SUCCESS,
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
