//! Damped-oscillation signals, their Hankel pencils, mode recovery and the
//! noise-resolvent decay sweep.

use ndarray::{s, Array2};
use ndarray_linalg::{Eig, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::derive_seed;
use crate::experiments::fit::{empirical_high_probability, summarize, Frequency, RateEstimate};
use crate::matops::{checked_inverse, frobenius, max_norm};
use crate::{CMatrix, Error, Result, C64};

/// Relative singular-value cutoff for the numerical rank of `U0`.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalModel {
    /// `(amplitude, pole)` pairs.
    pub modes: Vec<(C64, C64)>,
    /// Pencil size; the signal has `2n` samples.
    pub n: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SignalModel {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("pencil size must be positive".into()));
        }
        if self.modes.len() > self.n {
            return Err(Error::InvalidParameter(format!("{} modes exceed pencil size {}", self.modes.len(), self.n)));
        }
        if let Some((_, z)) = self.modes.iter().find(|(_, z)| !(z.norm() < 1.0)) {
            return Err(Error::InvalidParameter(format!("pole {z} is not inside the unit disk")));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise level {} must be finite and nonnegative", self.noise_sigma)));
        }
        Ok(())
    }
}

/// `s_j = sum_k a_k z_k^j + sigma g_j`, `j = 0, ..., 2n - 1`, with real
/// standard Gaussian `g_j`.
pub fn synth_signal(model: &SignalModel) -> Result<Vec<C64>> {
    model.validate()?;
    let mut s = vec![C64::new(0.0, 0.0); 2 * model.n];
    for &(a, z) in &model.modes {
        let mut pw = C64::new(1.0, 0.0);
        for v in s.iter_mut() {
            *v += a * pw;
            pw *= z;
        }
    }
    if model.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
        for v in s.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *v += model.noise_sigma * g;
        }
    }
    Ok(s)
}

/// `U0[i][j] = s_{i+j}`, `U1[i][j] = s_{i+j+1}`.
pub fn hankel_pencil(s: &[C64]) -> Result<(CMatrix, CMatrix)> {
    if s.is_empty() || s.len() % 2 != 0 {
        return Err(Error::Shape(format!("signal length {} is not a positive even number", s.len())));
    }
    let n = s.len() / 2;
    let u0 = Array2::from_shape_fn((n, n), |(i, j)| s[i + j]);
    let u1 = Array2::from_shape_fn((n, n), |(i, j)| s[i + j + 1]);
    Ok((u0, u1))
}

/// Vandermonde vector `(z^0, ..., z^{n-1})`.
pub fn vandermonde(z: C64, n: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(n);
    let mut pw = C64::new(1.0, 0.0);
    for _ in 0..n {
        out.push(pw);
        pw *= z;
    }
    out
}

/// `k` eigenvalues of `z U0 - U1` in the closed unit disk.
///
/// `U0 = U S V^*` is truncated to its leading `k` singular triplets and the
/// reduced problem `S_k^{-1} U_k^* U1 V_k` is solved. Fails when the
/// numerical rank of `U0` is below `k`. Interior points come first, then
/// ordering is by relative residual `||(z U0 - U1) x|| / ((|z| ||U0|| + ||U1||) ||x||)`.
pub fn pencil_modes(u0: &CMatrix, u1: &CMatrix, k: usize) -> Result<Vec<C64>> {
    let n = u0.nrows();
    if u0.dim() != (n, n) || u1.dim() != (n, n) {
        return Err(Error::Shape(format!("pencil blocks {:?} and {:?}", u0.dim(), u1.dim())));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("cannot extract {k} modes from a pencil of size {n}")));
    }
    let (u, sv, vt) = u0.svd(true, true)?;
    let (u, vt) = (u.expect("requested"), vt.expect("requested"));
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Err(Error::InsufficientModes { found: 0, requested: k });
    }
    let numerical = sv.iter().filter(|&&v| v > RANK_TOL * smax).count();
    if numerical < k {
        return Err(Error::InsufficientModes { found: numerical, requested: k });
    }
    let rank = k;
    let ur = u.slice(s![.., ..rank]).to_owned();
    let vr = vt.slice(s![..rank, ..]).mapv(|v| v.conj()).reversed_axes();
    let mut a = ur.t().mapv(|v| v.conj()).dot(u1).dot(&vr);
    for (i, mut row) in a.rows_mut().into_iter().enumerate() {
        let inv = 1.0 / sv[i];
        row.mapv_inplace(|v| v * inv);
    }
    let (vals, vecs) = a.eig()?;
    let (n0, n1) = (frobenius(u0), frobenius(u1));
    let mut cand: Vec<(bool, f64, C64)> = Vec::new();
    for (j, &z) in vals.iter().enumerate() {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > 1.0 + 1e-12 {
            continue;
        }
        let x = vr.dot(&vecs.column(j));
        let r = u0.dot(&x).mapv(|v| v * z) - u1.dot(&x);
        let rn = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let xn = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        cand.push((z.norm() < 1.0, rn / ((z.norm() * n0 + n1) * xn), z));
    }
    if cand.len() < k {
        return Err(Error::InsufficientModes { found: cand.len(), requested: k });
    }
    cand.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.total_cmp(&b.1)));
    Ok(cand.into_iter().take(k).map(|c| c.2).collect())
}

/// Assignment of estimates to true modes minimizing the total distance.
///
/// Returns, for each true mode, the index of its estimate and the largest
/// matched distance. Exhaustive; `k <= 8`.
pub fn match_modes(estimates: &[C64], truth: &[C64]) -> Result<(Vec<usize>, f64)> {
    let k = truth.len();
    if estimates.len() != k || k > 8 {
        return Err(Error::InvalidParameter(format!("cannot match {} estimates to {k} modes", estimates.len())));
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = (f64::INFINITY, perm.clone());
    permute(&mut perm, 0, &mut |p| {
        let total: f64 = p.iter().enumerate().map(|(i, &j)| (estimates[j] - truth[i]).norm()).sum();
        if total < best.0 {
            best = (total, p.to_vec());
        }
    });
    let worst = best.1.iter().enumerate().map(|(i, &j)| (estimates[j] - truth[i]).norm()).fold(0.0, f64::max);
    Ok((best.1, worst))
}

fn permute(p: &mut Vec<usize>, at: usize, f: &mut impl FnMut(&[usize])) {
    if at == p.len() {
        f(p);
        return;
    }
    for i in at..p.len() {
        p.swap(at, i);
        permute(p, at + 1, f);
        p.swap(at, i);
    }
}

/// Orthonormal basis (columns) of the span of the Vandermonde vectors of
/// `poles`, by modified Gram–Schmidt in the given order.
pub fn mode_basis(poles: &[C64], n: usize) -> Result<CMatrix> {
    let mut q = CMatrix::zeros((n, poles.len()));
    for (j, &z) in poles.iter().enumerate() {
        let mut v = ndarray::Array1::from(vandermonde(z, n));
        for i in 0..j {
            let qi = q.column(i);
            let proj: C64 = qi.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            v = &v - &qi.mapv(|x| x * proj);
        }
        let nv = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if nv < 1e-12 {
            return Err(Error::InvalidParameter(format!("Vandermonde vectors are dependent at pole {z}")));
        }
        q.column_mut(j).assign(&v.mapv(|x| x / nv));
    }
    Ok(q)
}

/// One cell of the noise sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSample {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    /// `None` when the noise pencil was numerically singular at the probe.
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseDecay {
    pub rate: RateEstimate,
    /// Fraction of trials at the largest `n` with `sqrt(n) * value` at most
    /// twice its median at the smallest `n`.
    pub bounded: Frequency,
    pub discarded: usize,
    pub samples: Vec<NoiseSample>,
}

/// `|| V (z U0 - U1)^{-1} V^T ||_max` restricted to the leading `k x k`
/// block, for the noise-only pencil of a seeded signal.
pub fn noise_statistic(n: usize, z_probe: C64, sigma: f64, seed: u64, basis: &CMatrix) -> Result<Option<f64>> {
    let model = SignalModel { modes: Vec::new(), n, noise_sigma: sigma, seed };
    let (u0, u1) = hankel_pencil(&synth_signal(&model)?)?;
    let r = u0.mapv(|v| v * z_probe) - u1;
    let rinv = match checked_inverse(&r, "noise pencil") {
        Ok(m) => m,
        Err(Error::Singular { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let left = basis.t().mapv(|v| v.conj());
    let right = basis.mapv(|v| v.conj());
    Ok(Some(max_norm(&left.dot(&rinv).dot(&right))))
}

/// Sweep of the noise statistic over `n_grid`, median slope in `log n`.
pub fn noise_resolvent_decay(n_grid: &[usize], z_probe: C64, trials: usize, sigma: f64, seed: u64, poles: &[C64]) -> Result<NoiseDecay> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("n grid must be nonempty and strictly increasing".into()));
    }
    if (z_probe.norm() - 1.0).abs() < 1e-6 {
        return Err(Error::InvalidParameter("probe point lies on the unit circle".into()));
    }
    if poles.is_empty() || poles.len() > n_grid[0] {
        return Err(Error::InvalidParameter("need between 1 and n_min poles".into()));
    }
    let bases: Vec<CMatrix> = n_grid.iter().map(|&n| mode_basis(poles, n)).collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..n_grid.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let samples: Vec<NoiseSample> = cells
        .par_iter()
        .map(|&(i, trial)| {
            let n = n_grid[i];
            let cell_seed = derive_seed(seed, n, trial);
            let value = noise_statistic(n, z_probe, sigma, cell_seed, &bases[i])?;
            Ok(NoiseSample { n, trial, seed: cell_seed, value })
        })
        .collect::<Result<_>>()?;
    let raw: Vec<(usize, f64)> = samples.iter().filter_map(|s| s.value.map(|v| (s.n, v))).collect();
    let discarded = samples.len() - raw.len();
    let rate = summarize(&raw)?;
    let first = rate.per_n.first().ok_or_else(|| Error::NonConvergence("every noise pencil was singular".into()))?;
    let c_ref = first.median * (first.n as f64).sqrt();
    let n_max = *n_grid.last().expect("nonempty");
    let hits: Vec<bool> = raw.iter().filter(|r| r.0 == n_max).map(|r| r.1 * (n_max as f64).sqrt() <= 2.0 * c_ref).collect();
    let bounded = empirical_high_probability(&hits)?;
    Ok(NoiseDecay { rate, bounded, discarded, samples })
}
