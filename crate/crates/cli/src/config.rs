//! Run configuration: built-in defaults, then command-line flags, then the config
//! file (TOML or JSON), each layer overriding the previous one.

use std::path::{Path, PathBuf};

use polysing::constructor::{default_phi, parse_rational, BuildOptions, PhiPreset};
use polysing::potential::Theorem;
use polysing::verify::VerifyConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Construction parameters as they may appear in a config file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub theorem: Option<String>,
    pub m: Option<u32>,
    pub n: Option<usize>,
    pub lambda: Option<String>,
    pub phi: Option<String>,
    pub j_max: Option<usize>,
    pub a_used: Option<f64>,
    pub visibility: Option<bool>,
    pub c_budget: Option<usize>,
    pub max_halvings: Option<u32>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    /// Partial [`VerifyConfig`]; keys present here override everything else.
    pub verify: Option<serde_json::Value>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let bad = |e: String| CliError::Config(format!("{}: {e}", path.display()));
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| bad(e.to_string())),
            Some("toml") => toml::from_str(&text).map_err(|e| bad(e.to_string())),
            _ => Err(bad("config files must end in .toml or .json".into())),
        }
    }
}

/// Recursive overlay that rejects keys `base` does not have.
fn overlay(base: &mut serde_json::Value, top: &serde_json::Value, at: &str) -> Result<(), CliError> {
    use serde_json::Value;
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                let path = format!("{at}.{k}");
                let slot = b.get_mut(k).ok_or_else(|| CliError::Config(format!("unknown config key {path}")))?;
                overlay(slot, v, &path)?;
            }
            Ok(())
        }
        (b, t) => {
            *b = t.clone();
            Ok(())
        }
    }
}

/// Defaults, then the `--seed` flag, then the file's `seed` and `[verify]` table.
pub fn resolve_verify(file: Option<&FileConfig>, flag_seed: Option<u64>) -> Result<VerifyConfig, CliError> {
    let mut v = serde_json::to_value(VerifyConfig::default())?;
    if let Some(s) = flag_seed {
        v["seed"] = s.into();
    }
    if let Some(s) = file.and_then(|f| f.seed) {
        v["seed"] = s.into();
    }
    if let Some(t) = file.and_then(|f| f.verify.as_ref()) {
        overlay(&mut v, t, "verify")?;
    }
    let cfg: VerifyConfig = serde_json::from_value(v).map_err(|e| CliError::Config(format!("verify config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Flags shared by every construction, all optional so that unset flags can fall
/// through to defaults.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct BuildFlags {
    /// Construction label: 1.5, 1.6, 1.8, 1.10, 1.11 or 1.17
    #[arg(long)]
    pub theorem: Option<String>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Exact rational, e.g. 3, 1/2 or 0.25
    #[arg(long)]
    pub lambda: Option<String>,
    /// Modulus preset: pow:α, log, loglog or explog
    #[arg(long)]
    pub phi: Option<String>,
    /// Retained bumps (3–12)
    #[arg(long)]
    pub j_max: Option<usize>,
    /// Override the lower-bound constant A used in the sequence formulas
    #[arg(long)]
    pub a_used: Option<f64>,
    /// Force the background-visibility filter on or off
    #[arg(long)]
    pub visibility: Option<bool>,
    /// Sample budget for choosing C
    #[arg(long)]
    pub c_budget: Option<usize>,
    /// Halve A up to this many times until the pointwise inequality holds
    #[arg(long)]
    pub max_halvings: Option<u32>,
}

/// Fully resolved configuration; its digest is stamped into every output.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub theorem: Theorem,
    pub m: u32,
    pub n: usize,
    pub lambda: String,
    pub phi: String,
    pub j_max: usize,
    pub a_used: Option<f64>,
    pub visibility: Option<bool>,
    pub c_budget: usize,
    pub max_halvings: u32,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub verify: VerifyConfig,
}

impl RunConfig {
    /// `file` wins over `flags`, which win over the reference configuration.
    pub fn resolve(command: &str, flags: &BuildFlags, file: Option<&FileConfig>, out_dir: PathBuf, seed: Option<u64>) -> Result<Self, CliError> {
        let f = file.cloned().unwrap_or_default();
        let theorem: Theorem = f.theorem.or(flags.theorem.clone()).unwrap_or_else(|| "1.5".into()).parse()?;
        let phi = match f.phi.or(flags.phi.clone()) {
            Some(p) => p.parse::<PhiPreset>()?,
            None => default_phi(theorem),
        };
        let lambda = f.lambda.or(flags.lambda.clone()).unwrap_or_else(|| "3".into());
        parse_rational(&lambda)?;
        let verify = resolve_verify(file, seed)?;
        let defaults = BuildOptions::default();
        let j_max = f.j_max.or(flags.j_max).unwrap_or(defaults.j_max);
        if !(3..=12).contains(&j_max) {
            return Err(CliError::Config(format!("j_max must lie in 3..=12, got {j_max}")));
        }
        Ok(RunConfig {
            command: command.to_string(),
            theorem,
            m: f.m.or(flags.m).unwrap_or(3),
            n: f.n.or(flags.n).unwrap_or(7),
            lambda,
            phi: phi.to_string(),
            j_max,
            a_used: f.a_used.or(flags.a_used),
            visibility: f.visibility.or(flags.visibility),
            c_budget: f.c_budget.or(flags.c_budget).unwrap_or(defaults.c_budget),
            max_halvings: f.max_halvings.or(flags.max_halvings).unwrap_or(6),
            seed: verify.seed,
            out_dir: f.out_dir.unwrap_or(out_dir),
            verify,
        })
    }

    pub fn build_options(&self) -> BuildOptions {
        BuildOptions {
            j_max: self.j_max,
            a_used: self.a_used,
            visibility: self.visibility,
            c_budget: self.c_budget,
            quadrature: self.verify.quadrature.clone(),
        }
    }

    pub fn phi(&self) -> PhiPreset {
        self.phi.parse().expect("validated in resolve")
    }
}
