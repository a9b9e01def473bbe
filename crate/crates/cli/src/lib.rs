//! `dp-hierarchy`: one binary with a subcommand per pipeline stage.
//!
//! Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 usage or config error,
//! 3 runtime guard (blow-up or cube-root domain).

pub mod derive;
pub mod error;
pub mod manifest;
pub mod normal_form;
pub mod resonances;
pub mod simulate;
pub mod verify;

use std::path::Path;

use clap::{Parser, Subcommand};
use serde::Serialize;
use tracing::error;

pub use error::CliError;
pub use manifest::RunManifest;

use manifest::{manifest_path, now, sha256_hex, versions, Outputs};

#[derive(Parser, Debug)]
#[command(name = "dp-hierarchy", version, about = "Conserved quantities, normal forms and simulation for the dispersive DP equation")]
pub struct Cli {
    /// Emit progress events as JSON lines on stderr.
    #[arg(long, global = true)]
    pub json_logs: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Densities, their integrals and the triangular invariants, as JSON.
    Derive(derive::DeriveArgs),
    /// Linear coefficients against the closed form, plus level checks, as CSV.
    VerifyCoeffs(verify::VerifyArgs),
    /// Exhaustive resonance scan of zero-momentum indices.
    Resonances(resonances::ResonanceArgs),
    /// Birkhoff normal form of the truncated Fourier Hamiltonian.
    Birkhoff(normal_form::BirkhoffArgs),
    /// Pseudospectral run with invariant diagnostics.
    Simulate(simulate::SimulateArgs),
}

fn args_hash<T: Serialize>(name: &str, args: &T) -> String {
    let v = serde_json::json!({ "command": name, "args": args });
    sha256_hex(v.to_string().as_bytes())
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Derive(_) => "derive",
            Command::VerifyCoeffs(_) => "verify-coeffs",
            Command::Resonances(_) => "resonances",
            Command::Birkhoff(_) => "birkhoff",
            Command::Simulate(_) => "simulate",
        }
    }

    pub fn out(&self) -> &Path {
        match self {
            Command::Derive(a) => &a.out,
            Command::VerifyCoeffs(a) => &a.out,
            Command::Resonances(a) => &a.out,
            Command::Birkhoff(a) => &a.out,
            Command::Simulate(a) => &a.out,
        }
    }

    /// Input hash and seed recorded in the manifest.
    fn identity(&self) -> Result<(String, Option<u64>), CliError> {
        let name = self.name();
        Ok(match self {
            Command::Derive(a) => (args_hash(name, a), None),
            Command::VerifyCoeffs(a) => (args_hash(name, a), None),
            Command::Resonances(a) => (args_hash(name, a), None),
            Command::Birkhoff(a) => (args_hash(name, a), None),
            Command::Simulate(a) => {
                let (bytes, cfg) = simulate::load_config(&a.config)?;
                (sha256_hex(&bytes), simulate::seed_of(&cfg))
            }
        })
    }
}

/// Runs one subcommand and writes `<out>.manifest.json` listing every file produced.
pub fn execute(cli: &Cli, argv: Vec<String>) -> Result<RunManifest, CliError> {
    let started = now();
    let (config_hash, seed) = cli.command.identity()?;
    let mut outs = Outputs::default();
    let result = match &cli.command {
        Command::Derive(a) => derive::cmd_derive(a, &mut outs),
        Command::VerifyCoeffs(a) => verify::cmd_verify(a, &mut outs),
        Command::Resonances(a) => resonances::cmd_resonances(a, &mut outs),
        Command::Birkhoff(a) => normal_form::cmd_birkhoff(a, &mut outs),
        Command::Simulate(a) => simulate::cmd_simulate(a, &mut outs),
    };
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => e.to_string(),
    };
    let path = manifest_path(cli.command.out());
    let manifest = RunManifest {
        command: argv,
        subcommand: cli.command.name().to_string(),
        config_hash,
        seed,
        versions: versions(),
        started,
        finished: now(),
        status,
        outputs: outs.files.iter().map(|p| p.display().to_string()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    let written = std::fs::write(&path, text).map_err(|source| CliError::Io { path, source });
    result?;
    written?;
    Ok(manifest)
}

pub fn init_logging(json: bool) {
    use std::io::IsTerminal;
    let builder = tracing_subscriber::fmt().with_writer(std::io::stderr).with_target(false).with_ansi(!json && std::io::stderr().is_terminal());
    let res = if json { builder.json().try_init() } else { builder.compact().try_init() };
    // a subscriber installed by an embedding program wins
    let _ = res;
}

/// Parses, runs and maps the outcome to the process exit code.
pub fn main_with(argv: Vec<String>) -> u8 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_logging(cli.json_logs);
    match execute(&cli, argv) {
        Ok(_) => 0,
        Err(e) => {
            error!(event = "failed", exit_code = e.exit_code(), "{}", e);
            eprintln!("error: {}", e);
            e.exit_code()
        }
    }
}
