//! `alexandrov`: config-driven experiments for the quantitative Alexandrov
//! analysis. Exit codes: 0 when every gate passes, 1 on a gate or pipeline
//! failure, 2 on usage or configuration errors.

mod config;
mod error;
mod run;
mod summary;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{parse_operator, ExperimentConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "alexandrov", version, about = "Stability experiments for almost-CMC hypersurfaces in space forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides the config's `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for sampled checks (overrides the config's `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiply every tolerance by this factor.
    #[arg(long = "tol-scale", global = true)]
    tol_scale: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full pipeline described by an experiment config.
    Run { config: PathBuf },
    /// Sweep a surface family over eps in one model.
    Sweep {
        /// euclidean, hyperbolic or spherical.
        #[arg(long)]
        model: String,
        /// spheroid, perturbed_sphere or sphere.
        #[arg(long)]
        family: String,
        /// Comma-separated eps values; 0 gives a round row with an undefined ratio.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        eps: Vec<f64>,
        /// mean or hr:R.
        #[arg(long, default_value = "mean")]
        op: String,
        /// Radius of perturbed spheres and spheres.
        #[arg(long)]
        radius: Option<f64>,
        /// Perturbation harmonic: xy or zonal<l>.
        #[arg(long)]
        harmonic: Option<String>,
        /// Direction-grid level.
        #[arg(long, default_value_t = 5)]
        level: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// Run the lemma-verification suite with the config's seed and resolution.
    CheckLemmas { config: PathBuf },
}

fn apply_overrides(cli: &Cli, config: &mut ExperimentConfig) -> Result<PathBuf> {
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(scale) = cli.tol_scale {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(CliError::key("tol-scale", format!("must be positive, got {scale}")));
        }
        config.tol_scale = scale;
    }
    Ok(cli
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("alexandrov-out")))
}

#[allow(clippy::too_many_arguments)]
fn sweep_config(
    model: &str,
    family: &str,
    eps: &[f64],
    op: &str,
    radius: Option<f64>,
    harmonic: Option<&str>,
    level: usize,
    dim: usize,
) -> Result<ExperimentConfig> {
    if let Some(e) = eps.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(CliError::key("eps", format!("values must be non-negative, got {e}")));
    }
    // Reuse the config validation with positive placeholders, then restore
    // the requested list so an eps = 0 row is allowed.
    let sphere = family == "sphere";
    let doc = serde_json::json!({
        "schema": config::SCHEMA,
        "models": [model],
        "dim": dim,
        "family": family,
        "radius": radius,
        "harmonic": harmonic,
        "eps": if sphere { None } else { Some(eps.iter().map(|e| e.max(1e-3)).collect::<Vec<_>>()) },
        "operator": op,
        "grid_levels": [level],
        "lemmas": false,
    });
    let mut config = ExperimentConfig::from_json(&doc.to_string()).map_err(|e| match e {
        CliError::ConfigKey { key, message } => {
            let flag = match key.as_str() {
                "models" => "model",
                "operator" => "op",
                "grid_levels" => "level",
                other => other,
            };
            CliError::key(flag, message)
        }
        other => other,
    })?;
    if !sphere {
        config.eps = eps.to_vec();
        config.check_surfaces()?;
    }
    Ok(config)
}

fn execute(cli: &Cli) -> Result<bool> {
    let outcome = match &cli.command {
        Command::Run { config } => {
            let mut config = ExperimentConfig::from_path(config)?;
            let dir = apply_overrides(cli, &mut config)?;
            run::run_experiment(&config, &dir, "run")?
        }
        Command::Sweep {
            model,
            family,
            eps,
            op,
            radius,
            harmonic,
            level,
            dim,
        } => {
            if family != "sphere" && eps.is_empty() {
                return Err(CliError::key("eps", "required for a swept family"));
            }
            parse_operator(op, *dim).map_err(|m| CliError::key("op", m))?;
            let mut config = sweep_config(model, family, eps, op, *radius, harmonic.as_deref(), *level, *dim)?;
            let dir = apply_overrides(cli, &mut config)?;
            run::run_experiment(&config, &dir, "sweep")?
        }
        Command::CheckLemmas { config } => {
            let mut config = ExperimentConfig::from_path(config)?;
            let dir = apply_overrides(cli, &mut config)?;
            run::check_lemmas(&config, &dir)?
        }
    };
    print!("{}", outcome.summary);
    for gate in outcome.gates.iter().filter(|g| !g.pass) {
        eprintln!("failed: {}", gate.line());
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
