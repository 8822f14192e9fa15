mod commands;
mod config;
mod error;
mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use config::{Cli, Command};
use error::{CliError, CliResult};
use output::{Manifest, OutDir, RunRecord, json_bytes, tolerances};

/// Reads a config record, either bare or as the `config` field of a manifest.
fn load_config(path: &Path) -> CliResult<Command> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config file {} is not JSON: {e}", path.display())))?;
    let record = value.get("config").cloned().unwrap_or(value);
    serde_json::from_value(record).map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("`threads`: {e}")))?;
    }
    let command = match cli.command {
        Command::Run(args) => load_config(&args.config)?,
        other => other,
    };
    let started = Instant::now();
    let out = OutDir::new(&cli.out_dir)?;
    let manifest = Manifest {
        tool: "edgelab",
        version: edgelab::VERSION,
        command: command.name(),
        seed: command.seed(),
        config: &command,
        tolerances: tolerances(),
        sigma_xi: commands::manifest_sigma(&command),
    };
    let manifest_name = format!("{}.manifest.json", command.name());
    let manifest_sha = out.write(Path::new(&manifest_name), &json_bytes(&manifest))?;
    let produced = commands::execute(&command, &manifest_sha)?;
    let mut hashes = BTreeMap::new();
    for o in &produced.outputs {
        let sha = out.write(&o.name, &o.bytes)?;
        hashes.insert(o.name.display().to_string(), sha);
    }
    let record = RunRecord {
        manifest: manifest_name,
        manifest_sha256: manifest_sha,
        outputs: hashes,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    out.write(Path::new(&format!("{}.record.json", command.name())), &json_bytes(&record))?;
    if let Some(text) = produced.stdout {
        println!("{text}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("edgelab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
