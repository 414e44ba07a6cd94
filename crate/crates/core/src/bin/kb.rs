use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use kbound::jobs::{run, Command, Format, JobConfig, Report};
use kbound::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Validate,
    Factorize,
    GaussianSample,
    Clark,
    Renorm,
    MorphismCheck,
    VerifyAll,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Validate => Command::Validate,
            Cmd::Factorize => Command::Factorize,
            Cmd::GaussianSample => Command::GaussianSample,
            Cmd::Clark => Command::Clark,
            Cmd::Renorm => Command::Renorm,
            Cmd::MorphismCheck => Command::MorphismCheck,
            Cmd::VerifyAll => Command::VerifyAll,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fmt {
    Json,
    Csv,
}

/// Verifies kernel factorizations from JSON job configs.
///
/// Exit status: 0 when every check passes, 2 when a check fails, 1 on
/// configuration or domain errors. Set KB_LOG for log output.
#[derive(Debug, Parser)]
#[command(name = "kb", version)]
struct Cli {
    command: Cmd,
    /// Job config (JSON). Optional for verify-all.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Fmt>,
}

fn load(cli: &Cli) -> Result<JobConfig, Error> {
    let command = Command::from(cli.command);
    let mut cfg = match &cli.config {
        Some(path) => JobConfig::load(path)?,
        None if command == Command::VerifyAll => JobConfig::default(),
        None => return Err(Error::Config(format!("{} needs --config", command.as_str()))),
    };
    match cfg.command {
        Some(c) if c != command => {
            return Err(Error::Config(format!("config is for {}, not {}", c.as_str(), command.as_str())));
        }
        _ => cfg.command = Some(command),
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn write(cli: &Cli, cfg: &JobConfig, report: &Report) -> Result<(), Error> {
    let format = match cli.format {
        Some(Fmt::Json) => Format::Json,
        Some(Fmt::Csv) => Format::Csv,
        None => cfg.output.as_ref().map_or(Format::Json, |o| o.format),
    };
    let path = cli.out.clone().or_else(|| cfg.output.as_ref().and_then(|o| o.path.clone()));
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(&p)?);
            report.emit(format, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            report.emit(format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KB_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| {
        let report = run(&cfg)?;
        write(&cli, &cfg, &report)?;
        Ok(report)
    });
    match result {
        Ok(report) => {
            for c in report.checks.iter().filter(|c| !c.passed) {
                log::warn!("check failed: {} (value {:?}, threshold {:?})", c.name, c.value, c.threshold);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("kb: {e}");
            ExitCode::from(1)
        }
    }
}
