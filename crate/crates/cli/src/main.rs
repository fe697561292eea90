use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use irs_stealth_cli::{run, CliError, Command, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "irs-stealth", version, about = "Min-max IRS reflection design for radar stealth")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML experiment configuration; defaults reproduce the reference setup.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; overrides `output.path`. Stdout when neither is set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `solver.tol`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Progress and timing on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Solve the configured instance; JSON report.
    Solve,
    /// Gain versus Phi for all methods; CSV.
    SweepGain,
    /// Window maximum versus N_x; CSV.
    SweepElements,
    /// Window maximum versus K; CSV.
    SweepSamples,
    /// Bistatic echo simulation with random radar placements; JSON.
    Simulate,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::SweepGain => Command::SweepGain,
            Cmd::SweepElements => Command::SweepElements,
            Cmd::SweepSamples => Command::SweepSamples,
            Cmd::Simulate => Command::Simulate,
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        cfg.solver.tol = tol;
    }
    cfg.validate()?;
    // the destination is not part of the experiment, so --out leaves the echoed config alone
    let dest = match &cli.out {
        Some(out) => out.display().to_string(),
        None => cfg.output.path.clone(),
    };

    let cmd = Command::from(cli.command);
    let started = std::time::Instant::now();
    let text = run(cmd, &cfg)?;
    log::info!("{} finished in {:.3} s", cmd.name(), started.elapsed().as_secs_f64());

    if dest.is_empty() {
        print!("{text}");
    } else {
        std::fs::write(&dest, text).map_err(|e| CliError::Io { path: dest.clone(), message: e.to_string() })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .format_timestamp(None)
        .init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
