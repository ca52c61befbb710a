use std::path::PathBuf;
use std::process::ExitCode;

use aniso_eit::io::{cmd_evaluate, cmd_map, cmd_reconstruct, cmd_simulate, RunConfig, CONFIG_KEYS};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "aniso-eit",
    version,
    about = "Anisotropic EIT: simulate electrode data, isotropize, reconstruct, evaluate",
    long_about = "Anisotropic EIT: simulate electrode data, isotropize, reconstruct, evaluate.\n\n\
Every subcommand reads a JSON run configuration (--config). Outputs go to\n\
output_dir and embed the config hash. On failure a JSON error record is\n\
printed to stderr.\n\n\
Exit codes: 0 success, 2 config or input error, 3 numerical failure.",
    after_long_help = CONFIG_KEYS,
    after_help = "Run with --help for the list of config keys."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate CEM voltages and DN matrices for the configured phantom.
    #[command(after_long_help = CONFIG_KEYS)]
    Simulate {
        /// JSON run configuration; see the key list below.
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve the Beltrami equation for the phantom's background tensor.
    #[command(after_long_help = CONFIG_KEYS)]
    Map {
        /// JSON run configuration; see the key list below.
        #[arg(long)]
        config: PathBuf,
    },
    /// Reconstruct a(x) A0 from a DN file and a map file.
    #[command(after_long_help = CONFIG_KEYS)]
    Reconstruct {
        /// JSON run configuration; see the key list below.
        #[arg(long)]
        config: PathBuf,
        /// DN matrix written by `simulate` (dn.json).
        #[arg(long)]
        dn: PathBuf,
        /// Map grid written by `map` (map.bin, with map.json beside it).
        #[arg(long)]
        map: PathBuf,
        /// Background DN matrix (dn_reference.json); simulated when omitted.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Compare a reconstruction with the configured phantom.
    #[command(after_long_help = CONFIG_KEYS)]
    Evaluate {
        /// JSON run configuration; see the key list below.
        #[arg(long)]
        config: PathBuf,
        /// Reconstruction written by `reconstruct` (recon_R*.json).
        #[arg(long)]
        recon: PathBuf,
    },
}

fn run(cli: Cli) -> aniso_eit::Result<serde_json::Value> {
    let load = |p: &PathBuf| RunConfig::load(p);
    let paths = |v: &[&PathBuf]| {
        serde_json::json!(v
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>())
    };
    Ok(match cli.command {
        Command::Simulate { config } => {
            let o = cmd_simulate(&load(&config)?)?;
            serde_json::json!({ "written": paths(&[&o.mesh, &o.voltages, &o.dn, &o.reference]) })
        }
        Command::Map { config } => {
            let o = cmd_map(&load(&config)?)?;
            serde_json::json!({ "written": paths(&[&o.grid, &o.sidecar, &o.boundary]) })
        }
        Command::Reconstruct {
            config,
            dn,
            map,
            reference,
        } => {
            let o = cmd_reconstruct(&load(&config)?, &dn, &map, reference.as_deref())?;
            serde_json::json!({ "written": paths(&[&o.field, &o.fhat, &o.grid, &o.tensor, &o.cross_section]) })
        }
        Command::Evaluate { config, recon } => {
            let (path, metrics) = cmd_evaluate(&load(&config)?, &recon)?;
            serde_json::json!({ "written": paths(&[&path]), "metrics": metrics })
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code: u8 = if e.is_config() { 2 } else { 3 };
            let record = serde_json::json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code });
            eprintln!("{record}");
            ExitCode::from(code)
        }
    }
}
