//! Seeded Monte Carlo sweeps over `(N, trial)` cells.
//!
//! Every cell draws its matrix from `derive_seed(scenario.seed, N, trial)`
//! and results are collected in grid order, so the raw tables do not depend
//! on how many worker threads execute the cells.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{empirical_high_probability, summarize, Frequency, RateEstimate};
use super::registry::{Expectation, Family, ModelSpec, Scenario, SpikeSetup};
use crate::ensembles::{derive_seed, sample_mp, sample_wigner, EnsembleSpec};
use crate::hankel::{hankel_pencil, match_modes, noise_resolvent_decay, pencil_modes, synth_signal, SignalModel};
use crate::matops::{checked_inverse, eigs_near, order_by_distance, spectrum};
use crate::outliers::{count_near, OutlierPrediction};
use crate::perturbation::{in_deformed_window, perturbed_linear, resolvent_error, DeformedWindowParams, PerturbationModel, Rect, WindowBase};
use crate::polyeig::{count_upper, hx_spectrum, quadratic_spectrum, spike_spectrum, QuadraticScenario, UPPER_HALF_THRESHOLD};
use crate::stieltjes::{rate_psi, LawKind, LimitLaw};
use crate::{CMatrix, Error, Result, C64};

/// Radius used for eigenvalue counting around a predicted outlier.
pub const COUNT_RADIUS: f64 = 0.3;
/// `|Im|` above which an eigenvalue of the acoustic problem counts as non-real.
pub const NONREAL_IM: f64 = 0.05;
/// Largest `N` at which spike runs compute the whole spectrum.
pub const FULL_SPECTRUM_MAX: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub scenario: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub statistic: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub scenario: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterRow {
    pub scenario: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub x: f64,
    pub y: f64,
    pub inside: bool,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ExecOptions {
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Cells not started by this instant are skipped.
    pub deadline: Option<Instant>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub scenario: String,
    pub predictions: Vec<OutlierPrediction>,
    pub rates: Vec<RateRow>,
    pub spectra: Vec<SpectrumRow>,
    pub raster: Vec<RasterRow>,
    pub estimate: Option<RateEstimate>,
    pub frequency: Option<Frequency>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub pass: Option<bool>,
    /// False when the deadline cut the sweep short.
    pub complete: bool,
}

impl RunOutput {
    fn new(scn: &Scenario, predictions: Vec<OutlierPrediction>) -> Self {
        Self {
            scenario: scn.name.clone(),
            predictions,
            rates: Vec::new(),
            spectra: Vec::new(),
            raster: Vec::new(),
            estimate: None,
            frequency: None,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            pass: None,
            complete: true,
        }
    }

    /// `(N, value)` pairs of one statistic.
    pub fn statistic(&self, name: &str) -> Vec<(usize, f64)> {
        self.rates.iter().filter(|r| r.statistic == name).map(|r| (r.n, r.value)).collect()
    }
}

struct Cell {
    n: usize,
    trial: usize,
    seed: u64,
    stats: Vec<(String, f64)>,
    spectrum: Vec<C64>,
    indicator: Option<bool>,
}

impl Cell {
    fn new(n: usize, trial: usize, seed: u64) -> Self {
        Self { n, trial, seed, stats: Vec::new(), spectrum: Vec::new(), indicator: None }
    }

    fn stat(&mut self, name: &str, v: f64) {
        self.stats.push((name.to_string(), v));
    }
}

fn in_pool<T: Send>(opts: &ExecOptions, f: impl FnOnce() -> T + Send) -> Result<T> {
    match opts.jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Runs `f` on every `(N, trial)` cell; returns the finished cells in grid
/// order and whether all of them ran.
fn sweep<F>(scn: &Scenario, opts: &ExecOptions, f: F) -> Result<(Vec<Cell>, bool)>
where
    F: Fn(usize, usize, u64) -> Result<Cell> + Sync,
{
    let cells: Vec<(usize, usize)> = scn.n_grid.iter().flat_map(|&n| (0..scn.trials).map(move |t| (n, t))).collect();
    let results: Vec<Result<Option<Cell>>> = in_pool(opts, || {
        cells
            .par_iter()
            .map(|&(n, t)| {
                if opts.deadline.is_some_and(|d| Instant::now() >= d) {
                    return Ok(None);
                }
                f(n, t, derive_seed(scn.seed, n, t)).map(Some)
            })
            .collect()
    })?;
    let mut done = Vec::with_capacity(results.len());
    let mut complete = true;
    for r in results {
        match r? {
            Some(c) => done.push(c),
            None => complete = false,
        }
    }
    Ok((done, complete))
}

fn absorb(out: &mut RunOutput, cells: Vec<Cell>, keep_spectra: bool) -> Vec<bool> {
    let mut indicators = Vec::new();
    for c in cells {
        for (name, v) in c.stats {
            out.rates.push(RateRow { scenario: out.scenario.clone(), n: c.n, trial: c.trial, seed: c.seed, statistic: name, value: v });
        }
        if keep_spectra {
            for l in c.spectrum {
                out.spectra.push(SpectrumRow { scenario: out.scenario.clone(), n: c.n, trial: c.trial, seed: c.seed, re: l.re, im: l.im });
            }
        }
        if let Some(b) = c.indicator {
            indicators.push(b);
        }
    }
    indicators
}

/// Unperturbed random matrix of the scenario's law.
pub fn sample_base(law: LimitLaw, n: usize, seed: u64) -> Result<CMatrix> {
    match law.kind {
        LawKind::Wigner => sample_wigner(&EnsembleSpec::wigner_real(n, seed)),
        LawKind::MarchenkoPastur => {
            let m = ((law.phi * n as f64).round() as usize).max(1);
            Ok(sample_mp(&EnsembleSpec::marchenko_pastur(n, m, seed))?.1)
        }
    }
}

/// `max_{j <= k} |lambda_j - z0|` over the `k` eigenvalues nearest `z0`.
pub fn delta(spec: &[C64], z0: C64, k: usize) -> f64 {
    order_by_distance(spec, z0).iter().take(k).map(|l| (l - z0).norm()).fold(0.0, f64::max)
}

fn designated(preds: &[OutlierPrediction], name: &str) -> Result<OutlierPrediction> {
    preds
        .iter()
        .find(|p| !p.degenerate)
        .copied()
        .ok_or_else(|| Error::NoPrediction(format!("{name} has no off-bulk outlier")))
}

fn spike_cell(spec: Vec<C64>, pred: OutlierPrediction, mut cell: Cell) -> Cell {
    let k = pred.multiplicity;
    let ordered = order_by_distance(&spec, pred.z0);
    let count = count_near(&spec, pred.z0, COUNT_RADIUS);
    cell.stat("delta", delta(&spec, pred.z0, k));
    cell.stat("count_near", count as f64);
    if let Some(next) = ordered.get(k) {
        cell.stat("next_distance", (next - pred.z0).norm());
    }
    cell.indicator = Some(count == k);
    cell.spectrum = spec;
    cell
}

fn port_hamiltonian_matrix(t: &[f64], z: &CMatrix) -> CMatrix {
    let mut a = z.mapv(|v| -v);
    for (i, &tj) in t.iter().enumerate() {
        a[[i, i]] += C64::new(0.0, tj);
    }
    a
}

/// `delta(N)` sweep for spike-type scenarios (matrix spikes, port-Hamiltonian).
pub fn run_outlier_convergence(scn: &Scenario, opts: &ExecOptions) -> Result<RunOutput> {
    scn.validate()?;
    let preds = scn.predictions()?;
    let pred = designated(&preds, &scn.name)?;
    let mut out = RunOutput::new(scn, preds);
    let (cells, complete) = match &scn.model {
        ModelSpec::Spike(spike) => sweep(scn, opts, |n, t, seed| {
            let x = sample_base(scn.law, n, seed)?;
            let model = spike.model(n)?;
            if n <= FULL_SPECTRUM_MAX {
                return Ok(spike_cell(spike_spectrum(&x, &model)?, pred, Cell::new(n, t, seed)));
            }
            let near = eigs_near(&perturbed_linear(&x, &model, C64::new(0.0, 0.0)), pred.z0, pred.multiplicity)?;
            let mut cell = Cell::new(n, t, seed);
            cell.stat("delta", delta(&near, pred.z0, pred.multiplicity));
            cell.spectrum = near;
            Ok(cell)
        })?,
        ModelSpec::PortHamiltonian { t: ts } => sweep(scn, opts, |n, t, seed| {
            let z = sample_base(scn.law, n, seed)?;
            let spec = spectrum(&port_hamiltonian_matrix(ts, &z))?;
            Ok(spike_cell(spec, pred, Cell::new(n, t, seed)))
        })?,
        _ => return Err(Error::InvalidParameter(format!("{} is not a spike scenario", scn.name))),
    };
    out.complete = complete;
    if matches!(scn.model, ModelSpec::Spike(_)) && scn.n_grid.iter().any(|&n| n > FULL_SPECTRUM_MAX) {
        out.notes.push(format!("N > {FULL_SPECTRUM_MAX}: only the {} eigenvalues nearest z0 are computed and stored", pred.multiplicity));
    }
    let ind = absorb(&mut out, cells, true);
    out.estimate = Some(summarize(&out.statistic("delta"))?);
    if !ind.is_empty() {
        out.frequency = Some(empirical_high_probability(&ind)?);
    }
    Ok(out)
}

/// `Delta(N)` sweep: largest `|Im|` after removing the outliers.
pub fn run_bulk_imag(scn: &Scenario, opts: &ExecOptions) -> Result<RunOutput> {
    scn.validate()?;
    let ModelSpec::Bulk { spike, exclude } = &scn.model else {
        return Err(Error::InvalidParameter(format!("{} is not a bulk scenario", scn.name)));
    };
    let preds = scn.predictions()?;
    let z0 = if *exclude > 0 { Some(designated(&preds, &scn.name)?.z0) } else { None };
    let mut out = RunOutput::new(scn, preds);
    let (cells, complete) = sweep(scn, opts, |n, t, seed| {
        let x = sample_base(scn.law, n, seed)?;
        let spec = spike_spectrum(&x, &spike.model(n)?)?;
        let rest: Vec<C64> = match z0 {
            Some(z0) => order_by_distance(&spec, z0).into_iter().skip(*exclude).collect(),
            None => spec.clone(),
        };
        let mut cell = Cell::new(n, t, seed);
        cell.stat("Delta", rest.iter().map(|l| l.im.abs()).fold(0.0, f64::max));
        cell.spectrum = spec;
        Ok(cell)
    })?;
    out.complete = complete;
    absorb(&mut out, cells, true);
    out.estimate = Some(summarize(&out.statistic("Delta"))?);
    Ok(out)
}

/// Eigenvalues of `H X` against the product predictions.
pub fn run_hx(scn: &Scenario, opts: &ExecOptions) -> Result<RunOutput> {
    scn.validate()?;
    let ModelSpec::HX { c, radius } = &scn.model else {
        return Err(Error::InvalidParameter(format!("{} is not an H X scenario", scn.name)));
    };
    let preds = scn.predictions()?;
    let upper_expected: usize = preds.iter().filter(|p| p.z0.im > UPPER_HALF_THRESHOLD).map(|p| p.multiplicity).sum();
    let mut out = RunOutput::new(scn, preds.clone());
    let (cells, complete) = sweep(scn, opts, |n, t, seed| {
        let x = sample_base(scn.law, n, seed)?;
        let spec = hx_spectrum(c, &x)?;
        let upper = count_upper(&spec, UPPER_HALF_THRESHOLD);
        let mut cell = Cell::new(n, t, seed);
        cell.stat("upper_count", upper as f64);
        let mut ok = upper == upper_expected;
        for (j, p) in preds.iter().enumerate() {
            cell.stat(&format!("delta_{}", j + 1), delta(&spec, p.z0, p.multiplicity));
            let near: Vec<&C64> = spec.iter().filter(|l| (*l - p.z0).norm() <= *radius).collect();
            ok &= near.len() == p.multiplicity;
            if p.z0.im.abs() <= UPPER_HALF_THRESHOLD {
                ok &= near.iter().all(|l| l.im.abs() <= UPPER_HALF_THRESHOLD);
            }
        }
        cell.indicator = Some(ok);
        cell.spectrum = spec;
        Ok(cell)
    })?;
    out.complete = complete;
    let ind = absorb(&mut out, cells, true);
    if !ind.is_empty() {
        out.frequency = Some(empirical_high_probability(&ind)?);
    }
    Ok(out)
}

/// Eigenvalues of the acoustic quadratic near the probe point.
pub fn run_quadratic(scn: &Scenario, opts: &ExecOptions) -> Result<RunOutput> {
    scn.validate()?;
    let ModelSpec::Quadratic { zeta, target, radius } = &scn.model else {
        return Err(Error::InvalidParameter(format!("{} is not a quadratic scenario", scn.name)));
    };
    let mut out = RunOutput::new(scn, Vec::new());
    let (cells, complete) = sweep(scn, opts, |n, t, seed| {
        let x = sample_base(scn.law, n, seed)?;
        let q = QuadraticScenario::acoustic(n, *zeta)?;
        let ps = quadratic_spectrum(&q, &x)?;
        let nearest = ps.eigenvalues.iter().map(|l| (l - target).norm()).fold(f64::INFINITY, f64::min);
        let nonreal = ps.eigenvalues.iter().filter(|l| l.im.abs() > NONREAL_IM).count();
        let mut cell = Cell::new(n, t, seed);
        cell.stat("nearest_target", nearest);
        cell.stat("nonreal_count", nonreal as f64);
        cell.stat("infinite_count", ps.infinite as f64);
        cell.indicator = Some(nearest < *radius);
        cell.spectrum = ps.eigenvalues;
        Ok(cell)
    })?;
    out.complete = complete;
    let ind = absorb(&mut out, cells, true);
    let with_nonreal = out.statistic("nonreal_count").iter().filter(|v| v.1 > 0.0).count();
    out.metrics.insert("trials_with_nonreal".into(), with_nonreal as f64);
    if !ind.is_empty() {
        out.frequency = Some(empirical_high_probability(&ind)?);
    }
    Ok(out)
}

/// Hankel scenarios: pole recovery error or the noise-resolvent sweep.
pub fn run_hankel(scn: &Scenario, opts: &ExecOptions) -> Result<RunOutput> {
    scn.validate()?;
    let mut out = RunOutput::new(scn, Vec::new());
    match &scn.model {
        ModelSpec::HankelModes { modes, sigma } => {
            let truth: Vec<C64> = modes.iter().map(|m| m.1).collect();
            let (cells, complete) = sweep(scn, opts, |n, t, seed| {
                let model = SignalModel { modes: modes.clone(), n, noise_sigma: *sigma, seed };
                let (u0, u1) = hankel_pencil(&synth_signal(&model)?)?;
                let est = pencil_modes(&u0, &u1, truth.len())?;
                let (_, err) = match_modes(&est, &truth)?;
                let mut cell = Cell::new(n, t, seed);
                cell.stat("mode_error", err);
                cell.spectrum = est;
                Ok(cell)
            })?;
            out.complete = complete;
            absorb(&mut out, cells, true);
            out.estimate = Some(summarize(&out.statistic("mode_error"))?);
        }
        ModelSpec::HankelConjecture { poles, z_probe, sigma } => {
            let decay = in_pool(opts, || noise_resolvent_decay(&scn.n_grid, *z_probe, scn.trials, *sigma, scn.seed, poles))??;
            for s in &decay.samples {
                let (name, v) = match s.value {
                    Some(v) => ("noise_resolvent", v),
                    None => ("singular", 1.0),
                };
                out.rates.push(RateRow { scenario: scn.name.clone(), n: s.n, trial: s.trial, seed: s.seed, statistic: name.into(), value: v });
            }
            out.metrics.insert("discarded".into(), decay.discarded as f64);
            out.frequency = Some(decay.bounded);
            out.estimate = Some(decay.rate);
        }
        _ => return Err(Error::InvalidParameter(format!("{} is not a Hankel scenario", scn.name))),
    }
    Ok(out)
}

fn window_params(scn: &Scenario, region: Rect) -> Result<DeformedWindowParams> {
    DeformedWindowParams::new(scn.beta, WindowBase::Compact(region))
}

/// Sup-grid resolvent error sweep over the given grid.
///
/// Grid points within the exclusion radius of a prediction or outside the
/// deformed window at some `N` are dropped and reported.
pub fn run_resolvent_error(scn: &Scenario, grid: &[C64], opts: &ExecOptions) -> Result<RunOutput> {
    scn.validate()?;
    let ModelSpec::Resolvent { spike, region, exclusion, .. } = &scn.model else {
        return Err(Error::InvalidParameter(format!("{} is not a resolvent scenario", scn.name)));
    };
    if scn.law.kind != LawKind::Wigner {
        return Err(Error::Unsupported("resolvent sweeps are implemented for the Wigner law".into()));
    }
    let preds = scn.predictions()?;
    let params = window_params(scn, *region)?;
    let model_at = |n: usize| -> Result<PerturbationModel> {
        match spike {
            Some(s) => s.model(n),
            None => Ok(PerturbationModel::zero(n)),
        }
    };
    let mut out = RunOutput::new(scn, preds.clone());
    let mut survivors: BTreeMap<usize, Vec<C64>> = BTreeMap::new();
    for &n in &scn.n_grid {
        let model = model_at(n)?;
        let keep: Vec<C64> = grid
            .iter()
            .copied()
            .filter(|&z| preds.iter().all(|p| (z - p.z0).norm() > *exclusion))
            .filter(|&z| in_deformed_window(&model, scn.law, z, &params, n, None))
            .collect();
        if keep.is_empty() {
            return Err(Error::InvalidParameter(format!("{}: no grid point survives at N = {n}", scn.name)));
        }
        out.metrics.insert(format!("dropped_N{n}"), (grid.len() - keep.len()) as f64);
        if keep.len() < grid.len() {
            let dropped: Vec<String> = grid.iter().filter(|z| !keep.contains(z)).map(|z| format!("{z}")).collect();
            out.notes.push(format!("N = {n}: dropped {}", dropped.join(", ")));
        }
        survivors.insert(n, keep);
    }
    let (cells, complete) = sweep(scn, opts, |n, t, seed| {
        let x = sample_wigner(&EnsembleSpec::wigner_real(n, seed))?;
        let model = model_at(n)?;
        let mut sup: f64 = 0.0;
        let mut psi: f64 = 0.0;
        for &z in &survivors[&n] {
            let xres = checked_inverse(&perturbed_linear(&x, &PerturbationModel::zero(n), z), "X - zI")?;
            sup = sup.max(resolvent_error(&xres, &model, scn.law, z)?);
            psi = psi.max(rate_psi(scn.law, z, n)?);
        }
        let mut cell = Cell::new(n, t, seed);
        cell.stat("sup_error", sup);
        cell.stat("sup_psi", psi);
        Ok(cell)
    })?;
    out.complete = complete;
    absorb(&mut out, cells, false);
    out.estimate = Some(summarize(&out.statistic("sup_error"))?);
    Ok(out)
}

/// Raster of the deformed window plus sampled spectra.
pub fn run_window_scan(scn: &Scenario, resolution: f64, opts: &ExecOptions) -> Result<RunOutput> {
    scn.validate()?;
    let ModelSpec::WindowScan { spike, region, .. } = &scn.model else {
        return Err(Error::InvalidParameter(format!("{} is not a window scan", scn.name)));
    };
    if !(resolution > 0.0) {
        return Err(Error::InvalidParameter("raster resolution must be positive".into()));
    }
    let preds = scn.predictions()?;
    let params = window_params(scn, *region)?;
    let nx = ((region.re_max - region.re_min) / resolution).round().max(1.0) as usize;
    let ny = ((region.im_max - region.im_min) / resolution).round().max(1.0) as usize;
    let grid = region.grid(nx, ny);
    let mut out = RunOutput::new(scn, preds.clone());
    for &n in &scn.n_grid {
        let model = spike.model(n)?;
        let inside: Vec<bool> = in_pool(opts, || grid.par_iter().map(|&z| in_deformed_window(&model, scn.law, z, &params, n, None)).collect())?;
        let excluded: Vec<C64> = grid.iter().zip(&inside).filter(|(_, &b)| !b).map(|(z, _)| *z).collect();
        out.metrics.insert(format!("excluded_fraction_N{n}"), excluded.len() as f64 / grid.len() as f64);
        if let Some(centre) = preds.first().map(|p| p.z0) {
            let r = excluded.iter().map(|z| (z - centre).norm()).fold(0.0, f64::max);
            out.metrics.insert(format!("excluded_radius_N{n}"), r);
        }
        for (z, b) in grid.iter().zip(inside) {
            out.raster.push(RasterRow { scenario: scn.name.clone(), n, x: z.re, y: z.im, inside: b });
        }
    }
    let (cells, complete) = sweep(scn, opts, |n, t, seed| {
        let x = sample_base(scn.law, n, seed)?;
        let spec = spike_spectrum(&x, &spike.model(n)?)?;
        let mut cell = Cell::new(n, t, seed);
        cell.stat("in_region", spec.iter().filter(|l| region.contains(**l)).count() as f64);
        cell.spectrum = spec;
        Ok(cell)
    })?;
    out.complete = complete;
    absorb(&mut out, cells, true);
    Ok(out)
}

fn spike_of(model: &ModelSpec) -> Option<&SpikeSetup> {
    match model {
        ModelSpec::Spike(s) | ModelSpec::Bulk { spike: s, .. } | ModelSpec::WindowScan { spike: s, .. } => Some(s),
        ModelSpec::Resolvent { spike, .. } => spike.as_ref(),
        _ => None,
    }
}

/// Dispatches on the scenario family and evaluates its expectation.
pub fn run_scenario(scn: &Scenario, opts: &ExecOptions) -> Result<RunOutput> {
    let mut out = match (&scn.family, &scn.model) {
        (Family::MatrixSpike, _) => run_outlier_convergence(scn, opts)?,
        (Family::BulkImag, _) => run_bulk_imag(scn, opts)?,
        (Family::HXProduct, _) => run_hx(scn, opts)?,
        (Family::Quadratic, _) => run_quadratic(scn, opts)?,
        (Family::Hankel, _) => run_hankel(scn, opts)?,
        (Family::ResolventError, ModelSpec::Resolvent { region, nx, ny, .. }) => run_resolvent_error(scn, &region.grid(*nx, *ny), opts)?,
        (Family::WindowScan, ModelSpec::WindowScan { resolution, .. }) => run_window_scan(scn, *resolution, opts)?,
        _ => return Err(Error::InvalidParameter(format!("{}: family and model disagree", scn.name))),
    };
    if let Some(s) = spike_of(&scn.model) {
        let stats = s.model(scn.n_grid[0])?.stats()?;
        out.metrics.insert("P_norm2".into(), stats.p_norm2);
        out.metrics.insert("Q_norm2".into(), stats.q_norm2);
    }
    out.pass = evaluate(scn.expect, &out);
    Ok(out)
}

/// Outcome of the scenario's range check; `None` when there is nothing to check.
pub fn evaluate(expect: Expectation, out: &RunOutput) -> Option<bool> {
    match expect {
        Expectation::None => None,
        Expectation::Slope { lo, hi } => Some(out.estimate.as_ref().and_then(|e| e.slope).is_some_and(|s| (lo..=hi).contains(&s))),
        Expectation::Frequency { min } => Some(out.frequency.is_some_and(|f| f.frequency >= min)),
        Expectation::NonIncreasing => Some(
            out.estimate
                .as_ref()
                .is_some_and(|e| e.per_n.len() >= 2 && e.slope.is_some_and(|b| b <= 0.0) && e.per_n.last().unwrap().median <= e.per_n[0].median),
        ),
    }
}
