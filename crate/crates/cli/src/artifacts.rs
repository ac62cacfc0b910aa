//! CSV, JSON and manifest output.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use spectral_lab::experiments::{Expectation, PerN, RunOutput};

use crate::config::RunConfig;

pub const RATES_HEADER: [&str; 6] = ["scenario", "N", "trial", "seed", "statistic", "value"];
pub const SPECTRUM_HEADER: [&str; 6] = ["scenario", "N", "trial", "seed", "re", "im"];
pub const RASTER_HEADER: [&str; 5] = ["scenario", "N", "x", "y", "inside"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionOut {
    pub z0_re: f64,
    pub z0_im: f64,
    pub k: usize,
    pub rate: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub predictions: Vec<PredictionOut>,
    pub slope: Option<f64>,
    pub r2: Option<f64>,
    pub frequency: Option<f64>,
    pub pass: Option<bool>,
    pub expectation: Expectation,
    pub complete: bool,
    pub successes: Option<usize>,
    pub trials: Option<usize>,
    pub frequency_interval: Option<[f64; 2]>,
    pub per_n: Vec<PerN>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Summary {
    pub fn new(cfg: &RunConfig, out: &RunOutput) -> Self {
        let est = out.estimate.as_ref();
        Self {
            scenario: out.scenario.clone(),
            predictions: out
                .predictions
                .iter()
                .map(|p| PredictionOut { z0_re: p.z0.re, z0_im: p.z0.im, k: p.multiplicity, rate: p.rate_exponent, degenerate: p.degenerate })
                .collect(),
            slope: est.and_then(|e| e.slope),
            r2: est.and_then(|e| e.r_squared),
            frequency: out.frequency.map(|f| f.frequency),
            pass: out.pass,
            expectation: cfg.scenario.expect,
            complete: out.complete,
            successes: out.frequency.map(|f| f.successes),
            trials: out.frequency.map(|f| f.trials),
            frequency_interval: out.frequency.map(|f| [f.lower, f.upper]),
            per_n: est.map(|e| e.per_n.clone()).unwrap_or_default(),
            metrics: out.metrics.clone(),
            notes: out.notes.clone(),
        }
    }
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `rates.csv`, `spectrum.csv`, `raster.csv`, `summary.json` and
/// `manifest.toml` into the output directory.
pub fn write_all(cfg: &RunConfig, out: &RunOutput) -> Result<Summary> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    write_csv(&cfg.out.join("rates.csv"), &RATES_HEADER, &out.rates)?;
    write_csv(&cfg.out.join("spectrum.csv"), &SPECTRUM_HEADER, &out.spectra)?;
    write_csv(&cfg.out.join("raster.csv"), &RASTER_HEADER, &out.raster)?;
    let summary = Summary::new(cfg, out);
    fs::write(cfg.out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    write_manifest(cfg)?;
    Ok(summary)
}

pub fn write_manifest(cfg: &RunConfig) -> Result<()> {
    let text = toml::to_string(&cfg.manifest()).context("serializing manifest")?;
    fs::write(cfg.out.join("manifest.toml"), text)?;
    Ok(())
}
