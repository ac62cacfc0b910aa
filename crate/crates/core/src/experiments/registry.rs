//! Built-in scenarios.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::outliers::{hx_outliers, matrix_spike_predictions, port_hamiltonian_outliers, JordanEntry, JordanSpec, OutlierPrediction};
use crate::perturbation::{diag, selector, MatrixPoly, PerturbationModel, Rect};
use crate::stieltjes::LimitLaw;
use crate::{CMatrix, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    MatrixSpike,
    BulkImag,
    HXProduct,
    Quadratic,
    Hankel,
    ResolventError,
    WindowScan,
}

/// Where the rank-`n` perturbation sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// `P = [I_n; 0]`, `Q = P^*`.
    Leading,
    /// `P = e_1`, `Q = e_2^T` (rank one, `QP = 0`).
    Offset,
}

/// A constant perturbation `P C Q` with known Jordan structure of `D = C Q P`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeSetup {
    pub c: CMatrix,
    pub placement: Placement,
    pub jordan: JordanSpec,
}

impl SpikeSetup {
    pub fn leading(c: CMatrix, jordan: JordanSpec) -> Self {
        Self { c, placement: Placement::Leading, jordan }
    }

    pub fn model(&self, big_n: usize) -> Result<PerturbationModel> {
        match self.placement {
            Placement::Leading => PerturbationModel::leading_block(big_n, self.c.clone()),
            Placement::Offset => {
                if self.c.dim() != (1, 1) || big_n < 2 {
                    return Err(Error::Shape("offset placement needs a 1x1 C and N >= 2".into()));
                }
                PerturbationModel::new(selector(big_n, &[0]), MatrixPoly::constant(self.c.clone())?, selector(big_n, &[1]).t().to_owned())
            }
        }
    }

    /// Predicted limit points; empty when `D = C Q P` vanishes.
    pub fn predictions(&self, law: LimitLaw) -> Result<Vec<OutlierPrediction>> {
        if self.placement == Placement::Offset {
            return Ok(Vec::new());
        }
        Ok(matrix_spike_predictions(&self.jordan, law)?.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelSpec {
    /// Eigenvalues of `X + P C Q` against the spike predictions.
    Spike(SpikeSetup),
    /// Eigenvalues of `diag(i t) (+) 0 - Z` with `Z` square MP.
    PortHamiltonian { t: Vec<f64> },
    /// Largest `|Im|` after removing the `exclude` eigenvalues nearest the
    /// first prediction.
    Bulk { spike: SpikeSetup, exclude: usize },
    /// Eigenvalues of `H X`, `H = diag(c, 1, ..., 1)`.
    HX { c: Vec<f64>, radius: f64 },
    /// The acoustic quadratic with damping `zeta`, probed near `target`.
    Quadratic { zeta: C64, target: C64, radius: f64 },
    /// Mode recovery from a noisy Hankel pencil of size `N`.
    HankelModes { modes: Vec<(C64, C64)>, sigma: f64 },
    /// Noise-resolvent statistic of pure-noise pencils of size `N`.
    HankelConjecture { poles: Vec<C64>, z_probe: C64, sigma: f64 },
    /// Sup over a grid of `||(X - z + A)^{-1} - M~(z)||_max`; grid points
    /// within `exclusion` of a prediction are dropped.
    Resolvent { spike: Option<SpikeSetup>, region: Rect, nx: usize, ny: usize, exclusion: f64 },
    /// Raster of the deformed window over `region` with step `resolution`.
    WindowScan { spike: SpikeSetup, region: Rect, resolution: f64 },
}

/// Range check written to the summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expectation {
    None,
    Slope { lo: f64, hi: f64 },
    Frequency { min: f64 },
    /// Fitted slope at most 0 and the last median no larger than the first.
    NonIncreasing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    /// Where in the source material the scenario comes from.
    pub anchor: String,
    pub description: String,
    pub family: Family,
    pub law: LimitLaw,
    pub model: ModelSpec,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub beta: f64,
    pub omega: f64,
    pub expect: Expectation,
}

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_BETA: f64 = 0.45;
pub const DEFAULT_OMEGA: f64 = 0.9;
pub const DEFAULT_TRIALS: usize = 10;
pub const SPIKE_GRID: [usize; 6] = [125, 250, 500, 1000, 2000, 4000];
pub const BULK_GRID: [usize; 5] = [125, 250, 500, 1000, 2000];

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) || self.n_grid[0] == 0 {
            return Err(Error::InvalidParameter(format!("{}: N grid must be positive and strictly increasing", self.name)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter(format!("{}: trials must be at least 1", self.name)));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(Error::InvalidParameter(format!("{}: beta must lie in (0, 1/2)", self.name)));
        }
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::InvalidParameter(format!("{}: omega must lie in (0, 1)", self.name)));
        }
        Ok(())
    }

    /// Predicted outliers, if the family has any.
    pub fn predictions(&self) -> Result<Vec<OutlierPrediction>> {
        match &self.model {
            ModelSpec::Spike(s) | ModelSpec::Bulk { spike: s, .. } | ModelSpec::WindowScan { spike: s, .. } => s.predictions(self.law),
            ModelSpec::Resolvent { spike: Some(s), .. } => s.predictions(self.law),
            ModelSpec::PortHamiltonian { t } => port_hamiltonian_outliers(t),
            ModelSpec::HX { c, .. } => hx_outliers(c, self.law),
            _ => Ok(Vec::new()),
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn spike_c(index: usize) -> SpikeSetup {
    let xi8 = c(0.0, 8.0);
    match index {
        1 => SpikeSetup::leading(diag(&[xi8]), JordanSpec::diagonal(&[xi8]).expect("valid")),
        2 => SpikeSetup::leading(diag(&[xi8; 3]), JordanSpec::diagonal(&[xi8; 3]).expect("valid")),
        3 => {
            let mut m = diag(&[xi8; 3]);
            m[[0, 1]] = c(1.0, 0.0);
            m[[1, 2]] = c(1.0, 0.0);
            SpikeSetup::leading(m, JordanSpec::new(vec![JordanEntry::new(xi8, vec![3])]).expect("valid"))
        }
        4 => SpikeSetup::leading(diag(&[c(0.0, 2.0)]), JordanSpec::diagonal(&[c(0.0, 2.0)]).expect("valid")),
        5 => SpikeSetup::leading(diag(&[c(0.0, 1.0)]), JordanSpec::diagonal(&[c(0.0, 1.0)]).expect("valid")),
        _ => unreachable!("no such spike"),
    }
}

fn base(name: &str, anchor: &str, description: &str, family: Family, model: ModelSpec, n_grid: &[usize]) -> Scenario {
    Scenario {
        name: name.into(),
        anchor: anchor.into(),
        description: description.into(),
        family,
        law: LimitLaw::wigner(),
        model,
        n_grid: n_grid.to_vec(),
        trials: DEFAULT_TRIALS,
        seed: DEFAULT_SEED,
        beta: DEFAULT_BETA,
        omega: DEFAULT_OMEGA,
        expect: Expectation::None,
    }
}

const HALF_RATE: Expectation = Expectation::Slope { lo: -0.65, hi: -0.35 };

/// All built-in scenarios.
pub fn registry() -> Vec<Scenario> {
    let spike_anchor = "Example Wignerplusi / Figure F1";
    let bulk_anchor = "Example Wignerplusi2 / Figure F2";
    let mut out = Vec::new();
    for (i, what) in [(1, "C = [8i]"), (2, "C = diag(8i, 8i, 8i)"), (3, "C = 3x3 Jordan block at 8i"), (4, "C = [2i]")] {
        let mut s = base(
            &format!("wigner-spike-c{i}"),
            spike_anchor,
            &format!("Wigner + P C Q, {what}: delta(N) to the predicted outlier"),
            Family::MatrixSpike,
            ModelSpec::Spike(spike_c(i)),
            &SPIKE_GRID,
        );
        s.expect = if i == 3 { Expectation::Slope { lo: -0.30, hi: -0.05 } } else { HALF_RATE };
        out.push(s);
    }
    let mut a1 = base("bulk-a1", bulk_anchor, "Wigner + [8i] spike: max |Im| of the non-outlier eigenvalues", Family::BulkImag, ModelSpec::Bulk { spike: spike_c(1), exclude: 1 }, &BULK_GRID);
    a1.expect = Expectation::Slope { lo: -1.25, hi: -0.75 };
    let mut a5 = base("bulk-a5", bulk_anchor, "Wigner + [i] spike on e1: max |Im| over the whole spectrum", Family::BulkImag, ModelSpec::Bulk { spike: spike_c(5), exclude: 0 }, &BULK_GRID);
    a5.expect = Expectation::Slope { lo: -0.75, hi: -0.25 };
    let mut offset = spike_c(5);
    offset.placement = Placement::Offset;
    let mut a6 = base("bulk-a6", bulk_anchor, "Wigner + i e1 e2^T (QP = 0): max |Im| over the whole spectrum", Family::BulkImag, ModelSpec::Bulk { spike: offset, exclude: 0 }, &BULK_GRID);
    a6.expect = Expectation::Slope { lo: -1.25, hi: -0.75 };
    out.extend([a1, a5, a6]);

    let mut hx = base("hx-wigner-122", "Section 4 example, H = diag(-1, -2, -2, 1, ...)", "eigenvalues of H W: three non-real pairs near sqrt(2)/2 i and 2 sqrt(3)/3 i", Family::HXProduct, ModelSpec::HX { c: vec![-1.0, -2.0, -2.0], radius: 0.15 }, &[1000]);
    hx.trials = 20;
    hx.expect = Expectation::Frequency { min: 0.9 };
    let mut hxmp = base("hx-mp-square", "Section 4 remark on square MP", "eigenvalues of H Y^*Y, H = diag(-1, 1, ...): real outlier near -1/2", Family::HXProduct, ModelSpec::HX { c: vec![-1.0], radius: 0.1 }, &[1000]);
    hxmp.law = LimitLaw::square_mp();
    hxmp.trials = 20;
    hxmp.expect = Expectation::Frequency { min: 0.9 };
    out.extend([hx, hxmp]);

    let mut ph = base("port-hamiltonian", "Section 3 port-Hamiltonian corollary", "eigenvalues of diag(i) (+) 0 - Y^*Y: outlier at -1/(1 + i)", Family::MatrixSpike, ModelSpec::PortHamiltonian { t: vec![1.0] }, &[125, 250, 500, 1000]);
    ph.law = LimitLaw::square_mp();
    ph.expect = HALF_RATE;
    out.push(ph);

    let mut quad = base("quad-acoustic", "Example polyex / Figure F5", "acoustic quadratic X - p(z) I + q(z) e_N e_N^T, zeta = 1: eigenvalues near 0.3223", Family::Quadratic, ModelSpec::Quadratic { zeta: c(1.0, 0.0), target: c(0.3223, 0.0), radius: 0.05 }, &[500]);
    quad.trials = 20;
    quad.expect = Expectation::Frequency { min: 0.8 };
    out.push(quad);

    let two_modes = vec![(c(1.0, 0.0), c(0.9, 0.0)), (c(1.0, 0.0), C64::from_polar(0.5, PI / 4.0))];
    let mut hm = base("hankel-modes", "Example eUU", "pole recovery from a noisy Hankel pencil of size N (sigma = 1e-2)", Family::Hankel, ModelSpec::HankelModes { modes: two_modes.clone(), sigma: 1e-2 }, &[8, 16, 32, 64]);
    hm.trials = 50;
    hm.expect = Expectation::NonIncreasing;
    let mut hc = base("hankel-conjecture", "Example eUU conjecture", "max-norm of the rotated noise-pencil inverse at z = 2 versus pencil size", Family::Hankel, ModelSpec::HankelConjecture { poles: two_modes.iter().map(|m| m.1).collect(), z_probe: c(2.0, 0.0), sigma: 1.0 }, &[64, 128, 256, 512]);
    hc.trials = 50;
    hc.expect = Expectation::Slope { lo: -0.7, hi: -0.3 };
    out.extend([hm, hc]);

    let mut rb = base("resolvent-baseline", "Theorem thres with A = 0, compact T", "sup over T = [-1,1] x [1,2]i of the resolvent max-norm error", Family::ResolventError, ModelSpec::Resolvent { spike: None, region: Rect { re_min: -1.0, re_max: 1.0, im_min: 1.0, im_max: 2.0 }, nx: 5, ny: 3, exclusion: 0.0 }, &[125, 250, 500, 1000]);
    rb.expect = HALF_RATE;
    let mut rc = base("resolvent-c1", "Theorem thres, C = [8i]", "sup over T = [-1,1] x [1,9]i minus a 0.3-disc at 63i/8 of the deformed resolvent error", Family::ResolventError, ModelSpec::Resolvent { spike: Some(spike_c(1)), region: Rect { re_min: -1.0, re_max: 1.0, im_min: 1.0, im_max: 9.0 }, nx: 3, ny: 9, exclusion: 0.3 }, &[125, 250, 500, 1000]);
    rc.expect = HALF_RATE;
    out.extend([rb, rc]);

    let mut w4 = base("window-scan-c4", "Figure F0", "deformed window around 3i/2 for C = [2i] with one sampled spectrum", Family::WindowScan, ModelSpec::WindowScan { spike: spike_c(4), region: Rect { re_min: -0.5, re_max: 0.5, im_min: 1.0, im_max: 2.0 }, resolution: 0.005 }, &[1000]);
    w4.trials = 1;
    let mut w5 = base("window-scan-a5", "Figure F0b", "deformed window near 0 for C = [i] with one sampled spectrum", Family::WindowScan, ModelSpec::WindowScan { spike: spike_c(5), region: Rect { re_min: -1.0, re_max: 1.0, im_min: 0.005, im_max: 1.0 }, resolution: 0.01 }, &[1000]);
    w5.trials = 1;
    out.extend([w4, w5]);
    out
}

/// Scenario by name.
pub fn find(name: &str) -> Result<Scenario> {
    registry()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario '{name}'")))
}
