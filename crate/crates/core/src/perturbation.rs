//! Low-rank deformations `A(z) = P C(z) Q` of a random matrix polynomial and
//! their deterministic equivalents.
//!
//! `K(z) = C(z)^{-1} + m(z) Q P` is the small matrix whose singularities
//! predict outliers, `L(z) = C(z)^{-1} + Q X(z)^{-1} P` its random counterpart,
//! and `M~(z) = m I - m^2 P K^{-1} Q` the limit of `(X(z) + A(z))^{-1}`.

use ndarray::{s, Array2};
use ndarray_linalg::{Determinant, SVD};
use serde::{Deserialize, Serialize};

use crate::matops::{max_norm, small_inverse, sparsity_counts, spectral_norm, woodbury_inverse};
use crate::outliers::JordanSpec;
use crate::stieltjes::{in_spectral_window, LimitLaw, RealAxis, WindowParams};
use crate::{CMatrix, Error, Result, C64};

/// `C(z) = sum_i z^i C_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixPoly {
    coeffs: Vec<CMatrix>,
}

impl MatrixPoly {
    pub fn new(coeffs: Vec<CMatrix>) -> Result<Self> {
        let first = coeffs.first().ok_or_else(|| Error::InvalidParameter("matrix polynomial has no coefficients".into()))?;
        let n = first.nrows();
        if coeffs.iter().any(|c| c.dim() != (n, n)) {
            return Err(Error::Shape("coefficients must be square and of equal size".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn constant(c: CMatrix) -> Result<Self> {
        Self::new(vec![c])
    }

    /// `z C`.
    pub fn linear(c: CMatrix) -> Result<Self> {
        let zero = CMatrix::zeros(c.dim());
        Self::new(vec![zero, c])
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> CMatrix {
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc.mapv_inplace(|v| v * z);
            acc += c;
        }
        acc
    }
}

/// Norms and sparsity recorded for a model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelStats {
    pub big_n: usize,
    pub n: usize,
    pub p_norm2: f64,
    pub q_norm2: f64,
    /// Largest number of nonzeros in a column of `P`.
    pub c_p: usize,
    /// Largest number of nonzeros in a row of `Q`.
    pub r_q: usize,
    /// `n <= ln N`, the advisory bound for a growing perturbation rank.
    pub rank_within_log: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationModel {
    pub p: CMatrix,
    pub c: MatrixPoly,
    pub q: CMatrix,
}

impl PerturbationModel {
    pub fn new(p: CMatrix, c: MatrixPoly, q: CMatrix) -> Result<Self> {
        let (big_n, n) = p.dim();
        if c.dim() != n || q.dim() != (n, big_n) {
            return Err(Error::Shape(format!(
                "P {:?}, C {}x{}, Q {:?} are not compatible",
                p.dim(),
                c.dim(),
                c.dim(),
                q.dim()
            )));
        }
        Ok(Self { p, c, q })
    }

    /// `P = [I_n; 0]`, `Q = P^*`, constant `C`.
    pub fn leading_block(big_n: usize, c: CMatrix) -> Result<Self> {
        let n = c.nrows();
        if n > big_n {
            return Err(Error::Shape(format!("rank {n} exceeds N = {big_n}")));
        }
        let p = selector(big_n, &(0..n).collect::<Vec<_>>());
        let q = p.t().to_owned();
        Self::new(p, MatrixPoly::constant(c)?, q)
    }

    /// The zero perturbation with a 1x1 zero `C`.
    pub fn zero(big_n: usize) -> Self {
        let p = CMatrix::zeros((big_n, 1));
        let q = CMatrix::zeros((1, big_n));
        Self { p, c: MatrixPoly { coeffs: vec![CMatrix::zeros((1, 1))] }, q }
    }

    pub fn big_n(&self) -> usize {
        self.p.nrows()
    }

    pub fn n(&self) -> usize {
        self.p.ncols()
    }

    pub fn qp(&self) -> CMatrix {
        self.q.dot(&self.p)
    }

    pub fn is_zero(&self) -> bool {
        self.c.coeffs.iter().all(|c| c.iter().all(|v| v.norm() == 0.0))
            || self.p.iter().all(|v| v.norm() == 0.0)
            || self.q.iter().all(|v| v.norm() == 0.0)
    }

    pub fn stats(&self) -> Result<ModelStats> {
        let (_, c_p) = sparsity_counts(&self.p);
        let (r_q, _) = sparsity_counts(&self.q);
        Ok(ModelStats {
            big_n: self.big_n(),
            n: self.n(),
            p_norm2: spectral_norm(&self.p)?,
            q_norm2: spectral_norm(&self.q)?,
            c_p,
            r_q,
            rank_within_log: (self.n() as f64) <= (self.big_n() as f64).ln(),
        })
    }
}

/// `N x k` matrix whose columns are the unit vectors `e_{idx[j]}`.
pub fn selector(big_n: usize, idx: &[usize]) -> CMatrix {
    let mut p = CMatrix::zeros((big_n, idx.len()));
    for (j, &i) in idx.iter().enumerate() {
        p[[i, j]] = C64::new(1.0, 0.0);
    }
    p
}

/// `A(z) = P C(z) Q`.
pub fn eval_perturbation(model: &PerturbationModel, z: C64) -> CMatrix {
    model.p.dot(&model.c.eval(z)).dot(&model.q)
}

/// `C(z)^{-1}`, refusing a singular `C(z)`.
pub fn c_inverse(model: &PerturbationModel, z: C64) -> Result<CMatrix> {
    small_inverse(&model.c.eval(z), "C(z)").map(|(inv, _)| inv)
}

/// `K(z) = C(z)^{-1} + m(z) Q P`.
pub fn k_of_z(model: &PerturbationModel, law: LimitLaw, z: C64) -> Result<CMatrix> {
    k_of_z_with(model, law, z, RealAxis::Strict)
}

pub fn k_of_z_with(model: &PerturbationModel, law: LimitLaw, z: C64, mode: RealAxis) -> Result<CMatrix> {
    let m = law.m_with(z, mode)?;
    Ok(c_inverse(model, z)? + model.qp().mapv(|v| v * m))
}

/// `L(z) = C(z)^{-1} + Q X(z)^{-1} P` with `X(z)^{-1}` supplied by the caller.
pub fn l_of_z(model: &PerturbationModel, xres: &CMatrix, z: C64) -> Result<CMatrix> {
    let big_n = model.big_n();
    if xres.dim() != (big_n, big_n) {
        return Err(Error::Shape(format!("resolvent is {:?}, expected {big_n}x{big_n}", xres.dim())));
    }
    Ok(c_inverse(model, z)? + model.q.dot(xres).dot(&model.p))
}

/// `det L(z)` for the linear family `X(z) = X - z I`.
pub fn det_l_linear(model: &PerturbationModel, x: &CMatrix, z: C64) -> Result<C64> {
    let n = x.nrows();
    let shifted = x - &CMatrix::eye(n).mapv(|v| v * z);
    let xres = crate::matops::checked_inverse(&shifted, "X - zI")?;
    let l = l_of_z(model, &xres, z)?;
    Ok(l.det()?)
}

/// `M~(z) = m(z) I - m(z)^2 P K(z)^{-1} Q`.
pub fn limit_resolvent(model: &PerturbationModel, law: LimitLaw, z: C64) -> Result<CMatrix> {
    limit_resolvent_with(model, law, z, RealAxis::Strict)
}

pub fn limit_resolvent_with(model: &PerturbationModel, law: LimitLaw, z: C64, mode: RealAxis) -> Result<CMatrix> {
    let m = law.m_with(z, mode)?;
    let big_n = model.big_n();
    let mut out = CMatrix::eye(big_n).mapv(|v| v * m);
    if model.is_zero() {
        return Ok(out);
    }
    let k = k_of_z_with(model, law, z, mode)?;
    let (kinv, _) = small_inverse(&k, "K(z)")?;
    let corr = model.p.dot(&kinv).dot(&model.q);
    out.zip_mut_with(&corr, |o, c| *o -= m * m * c);
    Ok(out)
}

/// Axis-aligned compact set in the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) {
            return Err(Error::InvalidParameter("empty rectangle".into()));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    pub fn contains(&self, z: C64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }

    /// Regular grid of `nx * ny` points (cell centres).
    pub fn grid(&self, nx: usize, ny: usize) -> Vec<C64> {
        let mut pts = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let x = self.re_min + (i as f64 + 0.5) * (self.re_max - self.re_min) / nx as f64;
                let y = self.im_min + (j as f64 + 0.5) * (self.im_max - self.im_min) / ny as f64;
                pts.push(C64::new(x, y));
            }
        }
        pts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WindowBase {
    /// The spectral window `S_{N, omega}` of the law.
    Spectral { omega: f64 },
    /// A fixed compact set `T` off the real axis.
    Compact(Rect),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformedWindowParams {
    pub beta: f64,
    pub base: WindowBase,
}

impl DeformedWindowParams {
    pub fn new(beta: f64, base: WindowBase) -> Result<Self> {
        if !(beta > 0.0 && beta < 0.5) {
            return Err(Error::InvalidParameter(format!("beta must lie in (0, 1/2), got {beta}")));
        }
        if let WindowBase::Spectral { omega } = base {
            if !(omega > 0.0 && omega < 1.0) {
                return Err(Error::InvalidParameter(format!("omega must lie in (0, 1), got {omega}")));
            }
        }
        if let WindowBase::Compact(r) = base {
            if r.im_min <= 0.0 {
                return Err(Error::InvalidParameter("compact set must lie in the open upper half-plane".into()));
            }
        }
        Ok(Self { beta, base })
    }
}

fn in_base(law: LimitLaw, z: C64, params: &DeformedWindowParams, big_n: usize) -> bool {
    match params.base {
        WindowBase::Spectral { omega } => in_spectral_window(law, z, WindowParams { omega, n: big_n, beta: params.beta }),
        WindowBase::Compact(r) => r.contains(z),
    }
}

/// Membership in the deformed window.
///
/// Without a Jordan structure this is `||K(z)^{-1}||_2 < N^beta`; with one it
/// is `min_xi |1 + xi m(z)|^{p_xi} >= N^{-beta omega}` on a spectral base and
/// `>= N^{-beta}` on a compact base.
pub fn in_deformed_window(
    model: &PerturbationModel,
    law: LimitLaw,
    z: C64,
    params: &DeformedWindowParams,
    big_n: usize,
    jordan: Option<&JordanSpec>,
) -> bool {
    if !in_base(law, z, params, big_n) {
        return false;
    }
    if model.is_zero() {
        return true;
    }
    let nf = big_n as f64;
    let Ok(m) = law.m(z) else { return false };
    match jordan {
        Some(spec) => {
            let exponent = match params.base {
                WindowBase::Spectral { omega } => params.beta * omega,
                WindowBase::Compact(_) => params.beta,
            };
            let threshold = nf.powf(-exponent);
            spec.entries
                .iter()
                .map(|e| (C64::new(1.0, 0.0) + e.xi * m).norm().powi(e.p() as i32))
                .fold(f64::INFINITY, f64::min)
                >= threshold
        }
        None => {
            let Ok(k) = k_of_z(model, law, z) else { return false };
            match k.svd(false, false) {
                Ok((_, sv, _)) => {
                    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
                    smin > 0.0 && 1.0 / smin < nf.powf(params.beta)
                }
                Err(_) => false,
            }
        }
    }
}

/// `(X(z) + A(z))^{-1}` by the Woodbury route from `X(z)^{-1}`.
pub fn perturbed_resolvent(xres: &CMatrix, model: &PerturbationModel, z: C64) -> Result<CMatrix> {
    if model.is_zero() {
        return Ok(xres.clone());
    }
    let cinv = c_inverse(model, z)?;
    woodbury_inverse(xres, &model.p, &cinv, &model.q)
}

/// `||(X(z) + A(z))^{-1} - M~(z)||_max`.
///
/// Takes the unperturbed resolvent `X(z)^{-1}`; the perturbed inverse is
/// formed with the Woodbury identity.
pub fn resolvent_error(xres: &CMatrix, model: &PerturbationModel, law: LimitLaw, z: C64) -> Result<f64> {
    let inv = perturbed_resolvent(xres, model, z)?;
    let limit = limit_resolvent(model, law, z)?;
    Ok(max_norm(&(&inv - &limit)))
}

/// Top-left `n x n` block of the resolvent, rotated by `Q ... P`.
pub fn compressed(xres: &CMatrix, model: &PerturbationModel) -> CMatrix {
    model.q.dot(xres).dot(&model.p)
}

/// Dense `X(z) + A(z)` for the linear family `X(z) = X - z I`.
pub fn perturbed_linear(x: &CMatrix, model: &PerturbationModel, z: C64) -> CMatrix {
    let mut out = x + &eval_perturbation(model, z);
    for i in 0..out.nrows() {
        out[[i, i]] -= z;
    }
    out
}

/// Leading `n x n` block of an `N x N` matrix.
pub fn leading(a: &CMatrix, n: usize) -> CMatrix {
    a.slice(s![..n, ..n]).to_owned()
}

/// Diagonal complex matrix.
pub fn diag(values: &[C64]) -> CMatrix {
    let mut d = Array2::zeros((values.len(), values.len()));
    for (i, v) in values.iter().enumerate() {
        d[[i, i]] = *v;
    }
    d
}
