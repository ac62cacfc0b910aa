//! Scenario registry, Monte Carlo runners and rate fitting.

pub mod fit;
pub mod registry;
pub mod run;

pub use fit::{empirical_high_probability, fit_loglog, summarize, Frequency, PerN, RateEstimate};
pub use registry::{find, registry, Expectation, Family, ModelSpec, Placement, Scenario, SpikeSetup};
pub use run::{
    run_bulk_imag, run_hankel, run_hx, run_outlier_convergence, run_quadratic, run_resolvent_error, run_scenario,
    run_window_scan, ExecOptions, RasterRow, RateRow, RunOutput, SpectrumRow,
};
