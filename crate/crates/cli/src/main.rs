//! `smallball`: certify, estimate and verify small-ball probabilities from a
//! JSON configuration.

mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use config::{parse_config, Command, RunConfig};
use error::CliError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "smallball",
    version,
    about = "Certified small-ball bounds and Monte Carlo verification"
)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration; defaults apply to omitted keys.
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte Carlo paths, overriding the configuration.
    #[arg(long)]
    paths: Option<usize>,
    /// Existing directory for the artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => "{}".to_string(),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(c) = cfg.command {
        if c != args.command {
            return Err(CliError::Usage(format!(
                "configuration is for `{}`, invoked as `{}`",
                c.name(),
                args.command.name()
            )));
        }
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(p) = args.paths {
        cfg.n_paths = Some(p);
    }
    if let Some(o) = &args.out {
        cfg.out_dir = Some(o.display().to_string());
    }
    cfg.fill_defaults(args.command);
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn execute(args: &Args) -> Result<bool, CliError> {
    let cfg = load(args)?;
    let out = PathBuf::from(cfg.out_dir.clone().unwrap_or_else(|| ".".into()));
    if !out.is_dir() {
        return Err(CliError::Io {
            path: out.display().to_string(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "output directory does not exist",
            ),
        });
    }
    let artifacts = commands::run(args.command, &cfg)?;
    let digest = cfg.digest();
    let name = args.command.name();
    let header = format!(
        "# smallball {VERSION} command={name} config_digest={digest} seed={}\n",
        cfg.seed
    );
    write(&out.join(format!("{name}.csv")), &(header + &artifacts.csv))?;
    let doc = json!({
        "tool": "smallball",
        "version": VERSION,
        "command": name,
        "config_digest": digest,
        "seed": cfg.seed,
        "config": cfg,
        "result": artifacts.result,
    });
    let text = serde_json::to_string_pretty(&doc).expect("artifact serializes") + "\n";
    write(&out.join(format!("{name}.json")), &text)?;
    if let Some(s) = artifacts.stdout {
        print!("{s}");
    }
    Ok(artifacts.failed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
