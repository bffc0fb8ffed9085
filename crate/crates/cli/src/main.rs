mod commands;
mod config;
mod error;
mod output;
mod svg;

use clap::error::ErrorKind;
use clap::Parser;
use config::{Cli, Command, RunConfig};
use error::CliError;
use output::Sink;
use std::process::ExitCode;

const THREADS_VAR: &str = "ORBIT_ENTANGLE_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_VAR}={raw:?} is not a thread count")))?;
    Ok(orbit_entangle::parallel::configure_threads(n)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = RunConfig::resolve(cli)?;
    let name = cfg.command.name();
    if let Command::CorpusRebuild(a) = &cfg.command {
        std::fs::create_dir_all(&cfg.output.dir).map_err(|e| CliError::io(&cfg.output.dir, e))?;
        println!("{name}: {}", commands::rebuild(a, &cfg.output.dir)?);
        return Ok(());
    }
    let mut sink = Sink::new(cfg.output)?;
    let result = match &cfg.command {
        Command::Poles(a) => commands::poles(a, &mut sink),
        Command::Amplitudes(a) => commands::amplitudes_cmd(a, &mut sink),
        Command::Region(a) => commands::region(a, &mut sink),
        Command::Dynamics(a) => commands::dynamics(a, &mut sink),
        Command::ConcurrenceSurface(a) => commands::surface(a, &mut sink),
        Command::EsdCurve(a) => commands::esd(a, &mut sink),
        Command::Verify(a) => commands::verify(a, &mut sink),
        Command::CorpusRebuild(_) => unreachable!("handled above"),
    };
    for p in &sink.written {
        println!("wrote {}", p.display());
    }
    println!("{name}: {}", result?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
