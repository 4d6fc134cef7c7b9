//! Run configuration: flat TOML file, command-line flags on top, `DFOKIT_SEED` as the last seed fallback.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dfokit::drivers::{Algorithm, TrConfig};
use dfokit::model::ModelKind;
use dfokit::problem::lookup;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Environment variable consulted when neither a flag nor the config file sets the seed.
pub const SEED_ENV: &str = "DFOKIT_SEED";

/// Model choices for the drivers that accept one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    Linear,
    MinFrobenius,
    MinChangeFrobenius,
    Composite,
}

impl ModelChoice {
    pub fn kind(self) -> ModelKind {
        match self {
            ModelChoice::Linear => ModelKind::Linear,
            ModelChoice::MinFrobenius => ModelKind::MinFrobenius,
            ModelChoice::MinChangeFrobenius => ModelKind::MinChangeFrobenius,
            ModelChoice::Composite => ModelKind::Composite,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelChoice::Linear => "linear",
            ModelChoice::MinFrobenius => "min-frobenius",
            ModelChoice::MinChangeFrobenius => "min-change-frobenius",
            ModelChoice::Composite => "composite",
        }
    }
}

/// Kebab-case name of a driver variant, as used on the command line and in reports.
pub fn algorithm_name(algo: Algorithm) -> &'static str {
    match algo {
        Algorithm::Classical => "classical",
        Algorithm::FirstOrder => "first-order",
        Algorithm::SecondOrder => "second-order",
        Algorithm::Inaccurate => "inaccurate",
        Algorithm::SelfCorrecting => "self-correcting",
        Algorithm::ConvexConstrained => "convex-constrained",
        Algorithm::NoisyDeterministic => "noisy-deterministic",
        Algorithm::Storm => "storm",
    }
}

pub fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    Algorithm::ALL.iter().copied().find(|&a| algorithm_name(a) == s).ok_or_else(|| {
        let names: Vec<&str> = Algorithm::ALL.iter().map(|&a| algorithm_name(a)).collect();
        format!("unknown algorithm '{s}'; valid options: {}", names.join(", "))
    })
}

pub fn parse_model(s: &str) -> std::result::Result<ModelChoice, String> {
    ModelChoice::from_str(s, false).map_err(|_| {
        let names: Vec<&str> = ModelChoice::value_variants().iter().map(|m| m.name()).collect();
        format!("unknown model '{s}'; valid options: {}", names.join(", "))
    })
}

/// Flags of the `run` subcommand. Every field is optional so a config file can supply it.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Registered problem name.
    #[arg(long)]
    pub problem: Option<String>,
    /// Driver variant.
    #[arg(long, value_parser = parse_algorithm)]
    pub algo: Option<Algorithm>,
    /// Model for the first-order and self-correcting drivers.
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ModelChoice>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub delta0: Option<f64>,
    #[arg(long)]
    pub max_evals: Option<u64>,
    /// Standard deviation of additive Gaussian noise (storm only).
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Bound of deterministic noise.
    #[arg(long)]
    pub noise_epsf: Option<f64>,
    /// Flat TOML file with the same keys as the flags (underscores or dashes).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved run configuration, embedded in every report. The seed lives in `tr.seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: String,
    pub algo: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_epsf: Option<f64>,
    #[serde(flatten)]
    pub tr: TrConfig,
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.tr.seed
    }
}

const HARNESS_KEYS: [&str; 6] = ["problem", "algo", "model", "seed", "noise_sigma", "noise_epsf"];

fn read_table(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| BenchError::config(format!("--config: cannot read {}: {e}", path.display())))?;
    let raw: toml::Table = text
        .parse()
        .map_err(|e| BenchError::config(format!("--config: {} is not valid TOML: {e}", path.display())))?;
    Ok(raw.into_iter().map(|(k, v)| (k.replace('-', "_"), v)).collect())
}

fn take_str(table: &mut toml::Table, key: &str) -> Result<Option<String>> {
    match table.remove(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s)),
        Some(other) => Err(BenchError::config(format!("config key '{key}' must be a string, got {other}"))),
    }
}

fn take_f64(table: &mut toml::Table, key: &str) -> Result<Option<f64>> {
    match table.remove(key) {
        None => Ok(None),
        Some(toml::Value::Float(x)) => Ok(Some(x)),
        Some(toml::Value::Integer(i)) => Ok(Some(i as f64)),
        Some(other) => Err(BenchError::config(format!("config key '{key}' must be a number, got {other}"))),
    }
}

fn take_u64(table: &mut toml::Table, key: &str) -> Result<Option<u64>> {
    match table.remove(key) {
        None => Ok(None),
        Some(toml::Value::Integer(i)) if i >= 0 => Ok(Some(i as u64)),
        Some(other) => Err(BenchError::config(format!("config key '{key}' must be a nonnegative integer, got {other}"))),
    }
}

fn tr_from_table(table: toml::Table, path: &Path) -> Result<TrConfig> {
    let known = toml::Table::try_from(TrConfig::default()).expect("TrConfig serializes to a table");
    if let Some(key) = table.keys().find(|k| !known.contains_key(*k) || *k == "seed") {
        let mut valid: Vec<&str> = HARNESS_KEYS.to_vec();
        valid.extend(known.keys().map(String::as_str).filter(|k| *k != "seed"));
        return Err(BenchError::config(format!(
            "--config: unknown key '{key}' in {}; valid keys: {}",
            path.display(),
            valid.join(", ")
        )));
    }
    table
        .try_into()
        .map_err(|e| BenchError::config(format!("--config: invalid value in {}: {e}", path.display())))
}

/// Merges the config file, the flags and the seed fallback, then checks the combination.
///
/// `env_seed` is the raw value of [`SEED_ENV`], if set.
pub fn resolve(args: &RunArgs, env_seed: Option<&str>) -> Result<RunConfig> {
    let mut file = toml::Table::new();
    let path = args.config.clone().unwrap_or_default();
    if args.config.is_some() {
        file = read_table(&path)?;
    }
    let file_problem = take_str(&mut file, "problem")?;
    let file_algo = take_str(&mut file, "algo")?
        .map(|s| parse_algorithm(&s).map_err(|e| BenchError::config(format!("--config: {e}"))))
        .transpose()?;
    let file_model = take_str(&mut file, "model")?
        .map(|s| parse_model(&s).map_err(|e| BenchError::config(format!("--config: {e}"))))
        .transpose()?;
    let file_seed = take_u64(&mut file, "seed")?;
    let file_sigma = take_f64(&mut file, "noise_sigma")?;
    let file_epsf = take_f64(&mut file, "noise_epsf")?;
    let mut tr = tr_from_table(file, &path)?;

    let problem = args
        .problem
        .clone()
        .or(file_problem)
        .ok_or_else(|| BenchError::config("--problem is required (flag or config file)"))?;
    let spec = lookup(&problem).map_err(|e| BenchError::config(format!("--problem: {e}")))?;
    let algo = args.algo.or(file_algo).ok_or_else(|| BenchError::config("--algo is required (flag or config file)"))?;

    let env_seed = env_seed
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| BenchError::config(format!("{SEED_ENV} must be an unsigned integer, got '{s}'")))
        })
        .transpose()?;
    let seed = args.seed.or(file_seed).or(env_seed).unwrap_or(0);
    tr.seed = seed;
    if let Some(d) = args.delta0 {
        tr.delta0 = d;
    }
    if let Some(m) = args.max_evals {
        tr.max_evals = m;
    }

    let model = args.model.or(file_model);
    match (algo, model) {
        (Algorithm::FirstOrder | Algorithm::SelfCorrecting, None) => {}
        (Algorithm::FirstOrder, Some(ModelChoice::MinChangeFrobenius)) => {
            return Err(BenchError::config("--model: first-order does not support min-change-frobenius"));
        }
        (Algorithm::SelfCorrecting, Some(ModelChoice::Composite)) => {
            return Err(BenchError::config("--model: self-correcting does not support composite"));
        }
        (Algorithm::FirstOrder | Algorithm::SelfCorrecting, Some(_)) => {}
        (_, Some(_)) => {
            return Err(BenchError::config(format!(
                "--model only applies to first-order and self-correcting, not {}",
                algorithm_name(algo)
            )));
        }
        (_, None) => {}
    }
    let model = match algo {
        Algorithm::FirstOrder | Algorithm::SelfCorrecting => Some(model.unwrap_or(ModelChoice::Linear)),
        _ => None,
    };
    if model == Some(ModelChoice::Composite) && spec.residuals.is_none() {
        return Err(BenchError::config(format!("--model: composite needs a least-squares problem, {problem} is not one")));
    }

    let noise_sigma = args.noise_sigma.or(file_sigma);
    let noise_epsf = args.noise_epsf.or(file_epsf);
    if let Some(s) = noise_sigma {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(BenchError::config(format!("--noise-sigma must be nonnegative, got {s}")));
        }
        if algo != Algorithm::Storm {
            return Err(BenchError::config("--noise-sigma only applies to --algo storm"));
        }
    }
    if let Some(e) = noise_epsf {
        if !(e > 0.0 && e.is_finite()) {
            return Err(BenchError::config(format!("--noise-epsf must be positive, got {e}")));
        }
        if algo == Algorithm::Storm {
            return Err(BenchError::config("--noise-epsf does not apply to --algo storm; use --noise-sigma"));
        }
        if algo == Algorithm::NoisyDeterministic && tr.noise_r == 0.0 {
            tr.noise_r = 2.0 * e;
        }
    }
    if algo == Algorithm::Storm && noise_sigma.is_none() {
        return Err(BenchError::config("--algo storm needs --noise-sigma"));
    }
    if algo == Algorithm::Classical && spec.gradient.is_none() {
        return Err(BenchError::config(format!("--algo classical needs a gradient, {problem} has none")));
    }
    tr.validate().map_err(|e| BenchError::config(e.to_string()))?;

    Ok(RunConfig { problem, algo, model, noise_sigma, noise_epsf, tr })
}
