use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fano_steering::harness::{
    cmd_analyze, cmd_certify, cmd_contour, cmd_hedge, cmd_keyrate, cmd_simulate, ConfigFile,
    RunConfig,
};
use fano_steering::Error;

/// Certify EPR steering from discretized position and momentum coincidences.
#[derive(Parser)]
#[command(name = "fanosteer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample position and momentum counts from the photon pair model.
    Simulate(Opts),
    /// Agreement and domain probabilities, without a verdict.
    Analyze(Opts),
    /// Run the full certification pipeline.
    Certify(Opts),
    /// Smallest domain probability that still certifies.
    Hedge(Opts),
    /// Write the violation map over agreement probabilities.
    Contour(Opts),
    /// One-way secret key rate bound.
    Keyrate(Opts),
}

#[derive(Args)]
struct Opts {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    eta_x: Option<f64>,
    #[arg(long)]
    eta_k: Option<f64>,
    #[arg(long)]
    mu_x: Option<f64>,
    #[arg(long)]
    mu_k: Option<f64>,
    #[arg(long)]
    n_bar: Option<usize>,
    #[arg(long)]
    rhs_bits: Option<f64>,
    #[arg(long)]
    fill_x: Option<f64>,
    #[arg(long)]
    fill_k: Option<f64>,
    #[arg(long)]
    efficiency: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl Opts {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let base = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let overrides = ConfigFile {
            eta_x: self.eta_x,
            eta_k: self.eta_k,
            mu_x: self.mu_x,
            mu_k: self.mu_k,
            n_bar: self.n_bar,
            rhs_bits: self.rhs_bits,
            fill_x: self.fill_x,
            fill_k: self.fill_k,
            efficiency: self.efficiency,
            seed: self.seed,
            threshold: self.threshold,
            output_dir: self.output_dir.clone(),
            ..Default::default()
        };
        RunConfig::resolve(base.merged(&overrides))
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn run(cli: &Cli) -> Result<(String, u8), Error> {
    Ok(match &cli.command {
        Command::Simulate(o) => (json(&cmd_simulate(&o.resolve()?)?)?, 0),
        Command::Analyze(o) => (json(&cmd_analyze(&o.resolve()?)?)?, 0),
        Command::Certify(o) => {
            let r = cmd_certify(&o.resolve()?)?;
            (json(&r)?, r.verdict.exit_code() as u8)
        }
        Command::Hedge(o) => match cmd_hedge(&o.resolve()?) {
            Ok(r) => (json(&r)?, 0),
            Err(Error::Stage { source, .. }) if matches!(*source, Error::NoHedge(_)) => (
                json(&serde_json::json!({ "error": source.to_string() }))?,
                1,
            ),
            Err(e) => return Err(e),
        },
        Command::Contour(o) => (json(&cmd_contour(&o.resolve()?)?)?, 0),
        Command::Keyrate(o) => {
            let r = cmd_keyrate(&o.resolve()?)?;
            (json(&r)?, r.verdict.exit_code() as u8)
        }
    })
}

fn main() -> ExitCode {
    // usage errors must not collide with the verdict exit codes
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok((out, code)) => {
            println!("{out}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("fanosteer: {e}");
            ExitCode::from(3)
        }
    }
}
