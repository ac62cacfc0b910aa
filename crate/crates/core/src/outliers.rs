//! Predicted limits of outlier eigenvalues, their multiplicities and rates.
//!
//! An outlier `z0` solves `det K(z0) = 0`. For isotropic limit laws this
//! reduces to scalar equations: `1 + xi m(z0) = 0` for each eigenvalue `xi`
//! of `D = C Q P`, `c/((c - 1) z) + m(z) = 0` for products `H X`, and
//! `m(p(z)) + 1/q(z) = 0` for the quadratic family `X - p(z) I + q(z) u u^*`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::matops::spectrum;
use crate::perturbation::Rect;
use crate::stieltjes::{LawKind, LimitLaw, RealAxis};
use crate::{CMatrix, Error, Result, C64};

/// Tolerance for accepting a root of a defining scalar equation.
pub const ROOT_TOL: f64 = 1e-10;

/// Jordan blocks of one eigenvalue `xi` of `D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JordanEntry {
    pub xi: C64,
    pub blocks: Vec<usize>,
}

impl JordanEntry {
    pub fn new(xi: C64, blocks: Vec<usize>) -> Self {
        Self { xi, blocks }
    }

    /// Algebraic multiplicity `k_xi`.
    pub fn k(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Largest block `p_xi`.
    pub fn p(&self) -> usize {
        self.blocks.iter().copied().max().unwrap_or(0)
    }
}

/// Jordan structure of `D = C Q P`, supplied by the caller.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JordanSpec {
    pub entries: Vec<JordanEntry>,
}

impl JordanSpec {
    pub fn new(entries: Vec<JordanEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("Jordan structure has no eigenvalues".into()));
        }
        for e in &entries {
            if e.blocks.is_empty() || e.blocks.contains(&0) {
                return Err(Error::InvalidParameter(format!("eigenvalue {} needs nonempty positive blocks", e.xi)));
            }
        }
        for (i, a) in entries.iter().enumerate() {
            if entries[..i].iter().any(|b| b.xi == a.xi) {
                return Err(Error::InvalidParameter(format!("eigenvalue {} listed twice", a.xi)));
            }
        }
        Ok(Self { entries })
    }

    /// Diagonalizable `D` with the given eigenvalues (repeats merged).
    pub fn diagonal(values: &[C64]) -> Result<Self> {
        let mut entries: Vec<JordanEntry> = Vec::new();
        for &v in values {
            match entries.iter_mut().find(|e| e.xi == v) {
                Some(e) => e.blocks.push(1),
                None => entries.push(JordanEntry::new(v, vec![1])),
            }
        }
        Self::new(entries)
    }

    /// Total size `n = sum k_xi`.
    pub fn n(&self) -> usize {
        self.entries.iter().map(JordanEntry::k).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredictionSource {
    MatrixSpike,
    HXProduct,
    PortHamiltonian,
    QuadraticScalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierPrediction {
    pub z0: C64,
    /// Number of eigenvalues converging to `z0`.
    pub multiplicity: usize,
    /// `-1/(2 p)`.
    pub rate_exponent: f64,
    pub source: PredictionSource,
    /// The root lies on the bulk boundary and only solves the equation for the
    /// boundary extension of `m`.
    pub degenerate: bool,
}

impl OutlierPrediction {
    fn new(z0: C64, multiplicity: usize, p: usize, source: PredictionSource) -> Self {
        Self { z0, multiplicity, rate_exponent: -1.0 / (2.0 * p as f64), source, degenerate: false }
    }
}

/// A solution of `1 + xi m(z) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeRoot {
    pub z0: C64,
    pub degenerate: bool,
}

fn nonzero(xi: C64) -> Result<()> {
    if xi.norm() == 0.0 || !xi.re.is_finite() || !xi.im.is_finite() {
        return Err(Error::InvalidParameter(format!("spike eigenvalue must be finite and nonzero, got {xi}")));
    }
    Ok(())
}

/// Solution of `1 + xi m_W(z) = 0`: `z0 = xi + 1/xi` when `|xi| > 1`, the
/// boundary point `2 Re xi` (degenerate) when `|xi| = 1`, none otherwise.
pub fn wigner_spike_outlier(xi: C64) -> Result<Option<SpikeRoot>> {
    nonzero(xi)?;
    let r = xi.norm();
    if (r - 1.0).abs() <= 1e-12 {
        return Ok(Some(SpikeRoot { z0: C64::new(2.0 * xi.re, 0.0), degenerate: true }));
    }
    if r < 1.0 {
        return Ok(None);
    }
    let z0 = xi + 1.0 / xi;
    let m = crate::stieltjes::m_wigner(z0, RealAxis::Strict)?;
    if (C64::new(1.0, 0.0) + xi * m).norm() > ROOT_TOL {
        return Ok(None);
    }
    Ok(Some(SpikeRoot { z0, degenerate: false }))
}

/// Solution of `1 + xi m_MP(z) = 0`, by inverting the self-consistent
/// equation at `m = -1/xi` and checking the branch.
pub fn mp_spike_outlier(xi: C64, law: LimitLaw) -> Result<Option<C64>> {
    nonzero(xi)?;
    if law.kind != LawKind::MarchenkoPastur {
        return Err(Error::InvalidParameter("mp_spike_outlier requires a Marchenko-Pastur law".into()));
    }
    let s = law.phi.sqrt();
    let a = s - 1.0 / s;
    let m = -1.0 / xi;
    let denom = m * m + s * m;
    if denom.norm() < 1e-300 {
        return Ok(None);
    }
    let z0 = s * (a * m - 1.0) / denom;
    if !(z0.re.is_finite() && z0.im.is_finite()) {
        return Ok(None);
    }
    match law.m(z0) {
        Ok(mz) if (mz - m).norm() <= ROOT_TOL * (1.0 + m.norm()) => Ok(Some(z0)),
        _ => Ok(None),
    }
}

/// One prediction per eigenvalue of `D` that has an outlier.
///
/// Returns the predictions and the eigenvalues for which no solution exists.
pub fn matrix_spike_predictions(jordan: &JordanSpec, law: LimitLaw) -> Result<(Vec<OutlierPrediction>, Vec<C64>)> {
    let mut out = Vec::new();
    let mut omitted = Vec::new();
    for e in &jordan.entries {
        let root = match law.kind {
            LawKind::Wigner => wigner_spike_outlier(e.xi)?,
            LawKind::MarchenkoPastur => mp_spike_outlier(e.xi, law)?.map(|z0| SpikeRoot { z0, degenerate: false }),
        };
        match root {
            Some(r) => {
                let mut p = OutlierPrediction::new(r.z0, e.k(), e.p(), PredictionSource::MatrixSpike);
                p.degenerate = r.degenerate;
                out.push(p);
            }
            None => omitted.push(e.xi),
        }
    }
    Ok((out, omitted))
}

/// Distinct values with repetition counts, in order of first appearance.
fn grouped(values: &[f64]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        match out.iter_mut().find(|(u, _)| *u == v) {
            Some((_, k)) => *k += 1,
            None => out.push((v, 1)),
        }
    }
    out
}

/// Residual of `c/((c - 1) z) + m(z)`.
pub fn hx_residual(c: f64, z: C64, law: LimitLaw) -> Result<C64> {
    Ok(c / ((c - 1.0) * z) + law.m(z)?)
}

/// Closed-form real limit point for `H X` with an MP matrix `X`, written in
/// terms of the bulk edges.
pub fn hx_mp_closed_form(c: f64, phi: f64) -> f64 {
    let s = phi.sqrt();
    let (gm, gp) = (s + 1.0 / s - 2.0, s + 1.0 / s + 2.0);
    let b = 2.0 * c / s + (c - 1.0) * (s - 1.0 / s);
    let cm = c - 1.0;
    (-cm * cm * gm * gp + b * b) / (2.0 * b * cm - cm * cm * (gp + gm))
}

/// Limits of the non-real (Wigner) or negative (MP) eigenvalues of
/// `H X` with `H = diag(c_1, ..., c_n, 1, ..., 1)`.
///
/// Wigner: `+-(-c) i / sqrt(1 - c)`, upper point first. MP: the unique
/// solution of `c/((c-1) z) + m(z) = 0`, obtained from the linear equation it
/// reduces to and cross-checked against [`hx_mp_closed_form`].
pub fn hx_outliers(c: &[f64], law: LimitLaw) -> Result<Vec<OutlierPrediction>> {
    if let Some(bad) = c.iter().find(|&&v| !(v < 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!("H entries must be negative, got {bad}")));
    }
    let mut out = Vec::new();
    for (cj, k) in grouped(c) {
        match law.kind {
            LawKind::Wigner => {
                let z = C64::new(0.0, -cj / (1.0 - cj).sqrt());
                for z0 in [z, z.conj()] {
                    out.push(OutlierPrediction::new(z0, k, 1, PredictionSource::HXProduct));
                }
            }
            LawKind::MarchenkoPastur => {
                let s = law.phi.sqrt();
                let a = s - 1.0 / s;
                let w = cj / (cj - 1.0);
                let z = -(w * w + s * a * w) / (s * (1.0 - w));
                let closed = hx_mp_closed_form(cj, law.phi);
                if (z - closed).abs() > 1e-9 * (1.0 + z.abs()) {
                    return Err(Error::NoPrediction(format!(
                        "closed form {closed} disagrees with the solved limit point {z} for c = {cj}"
                    )));
                }
                let z0 = C64::new(z, 0.0);
                match hx_residual(cj, z0, law) {
                    Ok(r) if r.norm() <= ROOT_TOL * (1.0 + 1.0 / z.abs()) => {
                        out.push(OutlierPrediction::new(z0, k, 1, PredictionSource::HXProduct));
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(out)
}

/// Limits `-t^2/(1 + i t)` of the eigenvalues of `C (+) 0 - Y^*Y` for a
/// skew-Hermitian `C` with eigenvalues `i t_j` and a square MP matrix.
pub fn port_hamiltonian_outliers(t: &[f64]) -> Result<Vec<OutlierPrediction>> {
    if let Some(bad) = t.iter().find(|&&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be finite and nonzero, got {bad}")));
    }
    let law = LimitLaw::square_mp();
    let mut out = Vec::new();
    for (tj, k) in grouped(t) {
        let z0 = -C64::new(tj * tj, 0.0) / C64::new(1.0, tj);
        // -z0 is an outlier of Y^*Y + (-C) with spike -i t
        let xi = C64::new(0.0, -tj);
        let r = C64::new(1.0, 0.0) + xi * law.m(-z0)?;
        if r.norm() > ROOT_TOL {
            return Err(Error::NoPrediction(format!("t = {tj}: residual {}", r.norm())));
        }
        out.push(OutlierPrediction::new(z0, k, 1, PredictionSource::PortHamiltonian));
    }
    Ok(out)
}

/// Scalar polynomial with coefficients in increasing powers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarPoly(pub Vec<C64>);

impl ScalarPoly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        let mut c = coeffs;
        while c.len() > 1 && c.last().is_some_and(|v| v.norm() == 0.0) {
            c.pop();
        }
        Self(c)
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| v.norm() == 0.0)
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        if self.0.len() <= 1 {
            return Self(vec![C64::new(0.0, 0.0)]);
        }
        Self::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect())
    }

    /// All roots, via the companion matrix.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let d = self.degree();
        if d == 0 {
            return Ok(Vec::new());
        }
        let lead = self.0[d];
        if d == 1 {
            return Ok(vec![-self.0[0] / lead]);
        }
        let mut comp = CMatrix::zeros((d, d));
        for j in 0..d {
            comp[[0, j]] = -self.0[d - 1 - j] / lead;
        }
        for i in 1..d {
            comp[[i, i - 1]] = C64::new(1.0, 0.0);
        }
        spectrum(&comp)
    }
}

/// `f(z) = m(p(z)) + 1/q(z)`.
pub fn quadratic_residual(p: &ScalarPoly, q: &ScalarPoly, law: LimitLaw, z: C64, mode: RealAxis) -> Result<C64> {
    let qz = q.eval(z);
    if qz.norm() == 0.0 {
        return Err(Error::Domain(format!("q vanishes at {z}")));
    }
    Ok(law.m_with(p.eval(z), mode)? + 1.0 / qz)
}

fn quadratic_residual_and_derivative(p: &ScalarPoly, q: &ScalarPoly, dp: &ScalarPoly, dq: &ScalarPoly, law: LimitLaw, z: C64) -> Result<(C64, C64)> {
    let w = p.eval(z);
    let qz = q.eval(z);
    if qz.norm() == 0.0 {
        return Err(Error::Domain(format!("q vanishes at {z}")));
    }
    let f = law.m(w)? + 1.0 / qz;
    let df = law.dm(w, RealAxis::Strict)? * dp.eval(z) - dq.eval(z) / (qz * qz);
    Ok((f, df))
}

/// Grid resolution for Newton seeds.
pub const SEED_SPACING: f64 = 0.02;
/// Stop Newton once `|f| <` this.
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 100;
/// Radius of the circle used for the winding-number multiplicity.
pub const WINDING_RADIUS: f64 = 1e-3;

/// Newton limits closer than this are one root; a root of order `k` is only
/// resolved to about `NEWTON_TOL^{1/k}`.
const MERGE_RADIUS: f64 = 1e-5;

/// Number of samples of the bulk used to trace `p^{-1}(bulk)`.
const PREIMAGE_SAMPLES: usize = 4001;

/// Points of `p^{-1}(bulk)` with the bulk value that produced them.
fn bulk_preimage(p: &ScalarPoly, law: LimitLaw) -> Result<Vec<(f64, C64)>> {
    let (lo, hi) = law.bulk();
    let mut xs: Vec<f64> = (0..PREIMAGE_SAMPLES).map(|i| lo + (hi - lo) * i as f64 / (PREIMAGE_SAMPLES - 1) as f64).collect();
    if law.kind == LawKind::MarchenkoPastur && law.phi < 1.0 {
        xs.push(0.0);
    }
    let mut pts = Vec::new();
    for x in xs {
        let mut shifted = p.0.clone();
        shifted[0] -= x;
        for r in ScalarPoly::new(shifted).roots()? {
            pts.push((x, r));
        }
    }
    Ok(pts)
}

fn winding_number(f: impl Fn(C64) -> Result<C64>, z0: C64, radius: f64) -> Result<i64> {
    let steps = 256;
    let mut total = 0.0;
    let mut prev = f(z0 + radius)?;
    for k in 1..=steps {
        let t = TAU * k as f64 / steps as f64;
        let cur = f(z0 + C64::from_polar(radius, t))?;
        total += (cur / prev).arg();
        prev = cur;
    }
    Ok((total / TAU).round() as i64)
}

/// Roots of `m(p(z)) + 1/q(z) = 0` in a rectangle.
///
/// Newton from a grid of seeds; roots with `p(z0)` in the real bulk are not
/// analytic solutions and are skipped. In [`RealAxis::LimitFromAbove`] mode
/// the preimage of the bulk is additionally searched for solutions of the
/// boundary-extended equation, which are returned flagged as degenerate. In
/// strict mode a region meeting the preimage is refused.
pub fn quadratic_outliers(p: &ScalarPoly, q: &ScalarPoly, law: LimitLaw, region: Rect, mode: RealAxis) -> Result<Vec<OutlierPrediction>> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::InvalidParameter("p and q must be nonzero polynomials".into()));
    }
    if p.degree() == 0 {
        return Err(Error::InvalidParameter("p must be nonconstant".into()));
    }
    let preimage = bulk_preimage(p, law)?;
    let touching: Vec<&(f64, C64)> = preimage.iter().filter(|(_, z)| region.contains(*z)).collect();
    if mode == RealAxis::Strict && !touching.is_empty() {
        return Err(Error::Domain(format!(
            "region meets the bulk preimage (e.g. at {}); m(p(z)) is not analytic there",
            touching[0].1
        )));
    }
    let (dp, dq) = (p.derivative(), q.derivative());
    let nx = ((region.re_max - region.re_min) / SEED_SPACING).ceil().max(1.0) as usize;
    let ny = ((region.im_max - region.im_min) / SEED_SPACING).ceil().max(1.0) as usize;
    let mut roots: Vec<C64> = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let seed = C64::new(
                region.re_min + (region.re_max - region.re_min) * i as f64 / nx as f64,
                region.im_min + (region.im_max - region.im_min) * j as f64 / ny as f64,
            );
            let Some(z) = newton(seed, |z| quadratic_residual_and_derivative(p, q, &dp, &dq, law, z)) else { continue };
            if !region.contains(z) || roots.iter().any(|r| (r - z).norm() < MERGE_RADIUS) {
                continue;
            }
            if near_real_bulk(p.eval(z), law) {
                continue;
            }
            match quadratic_residual(p, q, law, z, RealAxis::Strict) {
                Ok(f) if f.norm() < ROOT_TOL => roots.push(z),
                _ => {}
            }
        }
    }
    let mut out = Vec::new();
    for z0 in roots {
        let mut radius = WINDING_RADIUS;
        let mut k = None;
        for _ in 0..6 {
            match winding_number(|z| quadratic_residual(p, q, law, z, RealAxis::Strict), z0, radius) {
                Ok(w) if w > 0 => {
                    k = Some(w as usize);
                    break;
                }
                _ => radius /= 4.0,
            }
        }
        out.push(OutlierPrediction::new(z0, k.unwrap_or(1), 1, PredictionSource::QuadraticScalar));
    }
    if mode == RealAxis::LimitFromAbove {
        for z0 in degenerate_roots(p, q, law, &preimage, region)? {
            if out.iter().all(|o| (o.z0 - z0).norm() > 1e-6) {
                let mut pred = OutlierPrediction::new(z0, 1, 1, PredictionSource::QuadraticScalar);
                pred.degenerate = true;
                out.push(pred);
            }
        }
    }
    out.sort_by(|a, b| a.z0.re.total_cmp(&b.z0.re).then(a.z0.im.total_cmp(&b.z0.im)));
    Ok(out)
}

/// Newton limits whose image lies this close to the closed bulk sit on a
/// branch point of `m` and are left to the boundary search.
const EDGE_MARGIN: f64 = 1e-6;

fn near_real_bulk(w: C64, law: LimitLaw) -> bool {
    let (lo, hi) = law.bulk();
    let dx = if w.re < lo { lo - w.re } else if w.re > hi { w.re - hi } else { 0.0 };
    dx.hypot(w.im) <= EDGE_MARGIN * (1.0 + w.re.abs())
}

fn newton(seed: C64, f: impl Fn(C64) -> Result<(C64, C64)>) -> Option<C64> {
    let mut z = seed;
    for _ in 0..NEWTON_MAX_ITER {
        let (fz, dfz) = f(z).ok()?;
        if fz.norm() < NEWTON_TOL {
            return Some(z);
        }
        if dfz.norm() == 0.0 || !dfz.re.is_finite() {
            return None;
        }
        let step = fz / dfz;
        z -= step;
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > 1e8 {
            return None;
        }
    }
    let (fz, _) = f(z).ok()?;
    (fz.norm() < ROOT_TOL).then_some(z)
}

/// Zeros of the boundary-extended residual along `p^{-1}(bulk)`.
fn degenerate_roots(p: &ScalarPoly, q: &ScalarPoly, law: LimitLaw, preimage: &[(f64, C64)], region: Rect) -> Result<Vec<C64>> {
    let eval = |x: f64, near: C64| -> Option<(C64, f64)> {
        let mut shifted = p.0.clone();
        shifted[0] -= x;
        let z = ScalarPoly::new(shifted)
            .roots()
            .ok()?
            .into_iter()
            .min_by(|a, b| (a - near).norm().total_cmp(&(b - near).norm()))?;
        let f = quadratic_residual(p, q, law, z, RealAxis::LimitFromAbove).ok()?;
        Some((z, f.norm()))
    };
    let (lo, hi) = law.bulk();
    let step = (hi - lo) / (PREIMAGE_SAMPLES - 1) as f64;
    let mut found: Vec<C64> = Vec::new();
    for &(x, z) in preimage {
        if !region.contains(z) {
            continue;
        }
        let Some((_, fx)) = eval(x, z) else { continue };
        let left = eval((x - step).max(lo), z).map_or(f64::INFINITY, |v| v.1);
        let right = eval((x + step).min(hi), z).map_or(f64::INFINITY, |v| v.1);
        if fx > left || fx > right || fx > 1e-2 {
            continue;
        }
        // golden-section refinement of |f| along the branch
        let (mut a, mut b) = ((x - step).max(lo), (x + step).min(hi));
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            if b - a < 1e-15 * (1.0 + x.abs()) {
                break;
            }
            let c1 = b - g * (b - a);
            let c2 = a + g * (b - a);
            let f1 = eval(c1, z).map_or(f64::INFINITY, |v| v.1);
            let f2 = eval(c2, z).map_or(f64::INFINITY, |v| v.1);
            if f1 <= f2 {
                b = c2;
            } else {
                a = c1;
            }
        }
        let candidates = [a, b, 0.5 * (a + b), x];
        let best = candidates
            .iter()
            .filter_map(|&xc| eval(xc, z))
            .min_by(|u, v| u.1.total_cmp(&v.1));
        if let Some((zc, fc)) = best {
            if fc < ROOT_TOL && region.contains(zc) && found.iter().all(|r| (r - zc).norm() > 1e-6) {
                found.push(zc);
            }
        }
    }
    Ok(found)
}

/// Number of spectrum points within `radius` of `z0`.
pub fn count_near(spectrum: &[C64], z0: C64, radius: f64) -> usize {
    spectrum.iter().filter(|l| (*l - z0).norm() <= radius).count()
}

/// A group of numerically close eigenvalues of `D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    pub center: C64,
    pub members: Vec<C64>,
    /// Largest distance of a member from the centre.
    pub spread: f64,
}

impl EigenCluster {
    /// More than one eigenvalue: a possible nontrivial Jordan block that the
    /// caller must resolve by supplying a [`JordanSpec`].
    pub fn is_degenerate(&self) -> bool {
        self.members.len() > 1
    }
}

/// `sigma(D)` grouped by single-linkage with threshold `tol * (1 + ||D||)`.
///
/// A Jordan block of size `p` perturbed by rounding splits into a ring of
/// radius about `eps^{1/p}`, so `tol` should be generous (e.g. `1e-4`).
pub fn d_spectrum_clusters(d: &CMatrix, tol: f64) -> Result<Vec<EigenCluster>> {
    let eig = spectrum(d)?;
    let scale = 1.0 + crate::matops::max_norm(d);
    let thr = tol * scale;
    let mut label: Vec<usize> = (0..eig.len()).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..eig.len() {
        for j in 0..i {
            if (eig[i] - eig[j]).norm() <= thr {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a] = b;
            }
        }
    }
    let mut clusters: Vec<(usize, Vec<C64>)> = Vec::new();
    for i in 0..eig.len() {
        let r = find(&mut label, i);
        match clusters.iter_mut().find(|(root, _)| *root == r) {
            Some((_, v)) => v.push(eig[i]),
            None => clusters.push((r, vec![eig[i]])),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|(_, members)| {
            let center = members.iter().sum::<C64>() / members.len() as f64;
            let spread = members.iter().map(|m| (m - center).norm()).fold(0.0, f64::max);
            EigenCluster { center, members, spread }
        })
        .collect())
}
