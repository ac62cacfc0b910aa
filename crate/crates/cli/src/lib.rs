//! Scenario runner behind the `spectral-lab` binary.

pub mod artifacts;
pub mod config;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use anyhow::Result;
use spectral_lab::experiments::{registry, run_scenario, ExecOptions, RunOutput};

pub use artifacts::Summary;
pub use config::{ConfigFile, Overrides, RunConfig, SEED_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_RANGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

extern "C" {
    fn openblas_set_num_threads(n: std::os::raw::c_int);
}

/// Restricts OpenBLAS to one thread; parallelism comes from the trial pool.
pub fn pin_blas_threads() {
    // SAFETY: plain setter exported by the linked OpenBLAS.
    unsafe { openblas_set_num_threads(1) }
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("spectral-lab-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("spectral-lab-core".to_string(), spectral_lab::VERSION.to_string()),
        ("lapack".to_string(), "openblas".to_string()),
    ])
}

/// One line per scenario: name, anchor, description.
pub fn catalog() -> String {
    let all = registry();
    let w = all.iter().map(|s| s.name.len()).max().unwrap_or(0);
    all.iter().map(|s| format!("{:w$}  [{}]  {}\n", s.name, s.anchor, s.description)).collect()
}

/// Runs the configured scenario and writes its artifacts.
pub fn execute(cfg: &RunConfig) -> Result<(RunOutput, Summary, i32)> {
    pin_blas_threads();
    let opts = ExecOptions { jobs: cfg.jobs, deadline: cfg.budget_seconds.map(|b| Instant::now() + Duration::from_secs_f64(b)) };
    let out = run_scenario(&cfg.scenario, &opts)?;
    let summary = artifacts::write_all(cfg, &out)?;
    let code = if !out.complete {
        EXIT_BUDGET
    } else if out.pass == Some(false) {
        EXIT_RANGE
    } else {
        EXIT_OK
    };
    Ok((out, summary, code))
}
