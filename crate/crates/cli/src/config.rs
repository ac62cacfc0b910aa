//! Run configuration: TOML file, command-line overrides and seed fallback.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use spectral_lab::experiments::{find, Scenario};

/// Environment variable consulted when neither the flags nor the file set a seed.
pub const SEED_ENV: &str = "SPECTRAL_LAB_SEED";

/// Contents of a config file. A manifest written by `run` has the same
/// shape, with `definition` and `versions` filled in.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<String>,
    pub n_grid: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub beta: Option<f64>,
    pub omega: Option<f64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub budget_seconds: Option<f64>,
    /// Full scenario definition; takes precedence over the registry entry.
    pub definition: Option<Scenario>,
    pub versions: Option<BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Values given on the command line; `None` leaves the file or default value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub scenario: Option<String>,
    pub n_grid: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub beta: Option<f64>,
    pub omega: Option<f64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub budget_seconds: Option<f64>,
}

/// Fully resolved run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub budget_seconds: Option<f64>,
}

impl RunConfig {
    /// Precedence: flags, then the config file, then `SPECTRAL_LAB_SEED`
    /// (seed only), then the registry defaults.
    pub fn resolve(file: Option<ConfigFile>, flags: Overrides, env_seed: Option<&str>) -> Result<Self> {
        let file = file.unwrap_or_default();
        let name = flags.scenario.clone().or(file.scenario.clone());
        let mut scenario = match (file.definition, name) {
            (Some(def), Some(n)) if def.name != n => bail!("config names scenario '{n}' but its definition is '{}'", def.name),
            (Some(def), _) => def,
            (None, Some(n)) => find(&n)?,
            (None, None) => bail!("no scenario given; pass a name or --config"),
        };
        let env_seed = match env_seed {
            Some(s) => Some(s.trim().parse::<u64>().with_context(|| format!("{SEED_ENV}='{s}' is not an unsigned integer"))?),
            None => None,
        };
        if let Some(g) = flags.n_grid.or(file.n_grid) {
            scenario.n_grid = g;
        }
        if let Some(t) = flags.trials.or(file.trials) {
            scenario.trials = t;
        }
        if let Some(s) = flags.seed.or(file.seed).or(env_seed) {
            scenario.seed = s;
        }
        if let Some(b) = flags.beta.or(file.beta) {
            scenario.beta = b;
        }
        if let Some(o) = flags.omega.or(file.omega) {
            scenario.omega = o;
        }
        scenario.validate()?;
        let budget_seconds = flags.budget_seconds.or(file.budget_seconds);
        if budget_seconds.is_some_and(|b| !(b >= 0.0)) {
            bail!("budget must be a nonnegative number of seconds");
        }
        let jobs = flags.jobs.or(file.jobs);
        if jobs == Some(0) {
            bail!("--jobs must be at least 1");
        }
        let out = flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("runs").join(&scenario.name));
        Ok(Self { scenario, out, jobs, budget_seconds })
    }

    /// The manifest: everything needed to repeat this run.
    pub fn manifest(&self) -> ConfigFile {
        let s = &self.scenario;
        ConfigFile {
            scenario: Some(s.name.clone()),
            n_grid: Some(s.n_grid.clone()),
            trials: Some(s.trials),
            seed: Some(s.seed),
            beta: Some(s.beta),
            omega: Some(s.omega),
            out: None,
            jobs: self.jobs,
            budget_seconds: self.budget_seconds,
            definition: Some(s.clone()),
            versions: Some(crate::versions()),
        }
    }
}
