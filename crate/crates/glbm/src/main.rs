use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use glbm::config::{ExperimentSpec, Kind};
use glbm::run::run;
use glbm::HarnessError;

/// Monte Carlo experiments for invariant Brownian motions on GL(N, C).
#[derive(Debug, Parser)]
#[command(name = "glbm", version)]
struct Cli {
    /// Experiment kind (simulate, spectrum, boundary, figure, verify-*, sd-check).
    kind: String,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: `output` from the config, else `glbm-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to GLBM_WORKERS, then to all cores.
    #[arg(long)]
    workers: Option<usize>,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

struct Prepared {
    spec: ExperimentSpec,
    resolved: glbm::config::Resolved,
    out: PathBuf,
    workers: usize,
}

fn prepare(cli: &Cli) -> Result<Prepared> {
    let kind: Kind = cli.kind.parse()?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| HarnessError::Validation(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut spec = ExperimentSpec::from_json(&text)?;
    if let Some(s) = cli.seed {
        spec.seed = Some(s);
    }
    if let Some(o) = &cli.out {
        spec.output = Some(o.display().to_string());
    }
    let workers = match cli.workers {
        Some(w) => w,
        None => match std::env::var("GLBM_WORKERS") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| HarnessError::Validation(format!("GLBM_WORKERS must be a nonnegative integer, got {v:?}")))?,
            Err(_) => 0,
        },
    };
    let resolved = spec.resolve(kind)?;
    let out = PathBuf::from(spec.output.clone().unwrap_or_else(|| "glbm-out".into()));
    Ok(Prepared { spec, resolved, out, workers })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let prepared = match prepare(&cli) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("glbm: {e:#}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let result = run(&prepared.spec, &prepared.resolved, &prepared.out, prepared.workers)
        .with_context(|| format!("{} run failed", prepared.resolved.kind));
    match result {
        Ok(manifest) => {
            println!("wrote {} files to {}", manifest.files.len() + 1, prepared.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("glbm: {e:#}");
            match e.downcast_ref::<HarnessError>() {
                Some(HarnessError::NumericalFailure { .. }) => ExitCode::from(EXIT_NUMERICAL),
                Some(HarnessError::Validation(_)) => ExitCode::from(EXIT_VALIDATION),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
