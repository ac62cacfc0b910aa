//! Closed-form Stieltjes transforms of the semicircle and Marchenko–Pastur
//! laws, their local-law rates and the spectral windows on which the local
//! laws hold.
//!
//! Branch convention: for `Im z > 0` the root of the defining quadratic that
//! is a genuine Stieltjes transform is selected (`Im m > 0`, and for MP also
//! `Im(z m) > 0`); the lower half-plane is obtained by conjugation, so
//! `m(conj z) = conj m(z)` holds exactly. On the real axis the value is the
//! limit from above.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// How real arguments are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RealAxis {
    /// Real points inside the open bulk are rejected.
    Strict,
    /// `m(x) := lim_{y -> 0+} m(x + iy)` everywhere on the real axis.
    LimitFromAbove,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LawKind {
    Wigner,
    MarchenkoPastur,
}

/// Which ensemble's isotropic local law applies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub kind: LawKind,
    /// Aspect ratio `M / N`; ignored for Wigner.
    pub phi: f64,
}

impl LimitLaw {
    pub fn wigner() -> Self {
        Self { kind: LawKind::Wigner, phi: 1.0 }
    }

    pub fn marchenko_pastur(phi: f64) -> Result<Self> {
        if !(phi.is_finite() && phi > 0.0) {
            return Err(Error::InvalidParameter(format!("aspect ratio must be positive, got {phi}")));
        }
        Ok(Self { kind: LawKind::MarchenkoPastur, phi })
    }

    /// Square MP law (`M = N`), bulk `[0, 4]`.
    pub fn square_mp() -> Self {
        Self { kind: LawKind::MarchenkoPastur, phi: 1.0 }
    }

    /// Edges of the bulk: `[-2, 2]` or `[gamma_-, gamma_+]`.
    pub fn bulk(&self) -> (f64, f64) {
        match self.kind {
            LawKind::Wigner => (-2.0, 2.0),
            LawKind::MarchenkoPastur => {
                let s = self.phi.sqrt();
                let c = s + 1.0 / s;
                (c - 2.0, c + 2.0)
            }
        }
    }

    /// Stieltjes transform with the strict real-axis convention.
    pub fn m(&self, z: C64) -> Result<C64> {
        self.m_with(z, RealAxis::Strict)
    }

    /// Stieltjes transform extended to the whole real axis by the limit from above.
    pub fn m_boundary(&self, z: C64) -> Result<C64> {
        self.m_with(z, RealAxis::LimitFromAbove)
    }

    pub fn m_with(&self, z: C64, mode: RealAxis) -> Result<C64> {
        match self.kind {
            LawKind::Wigner => m_wigner(z, mode),
            LawKind::MarchenkoPastur => m_mp_phi(z, self.phi, mode),
        }
    }

    /// `m'(z)`, from implicit differentiation of the self-consistent equation.
    pub fn dm(&self, z: C64, mode: RealAxis) -> Result<C64> {
        let m = self.m_with(z, mode)?;
        match self.kind {
            // m^2 + z m + 1 = 0  =>  m' = -m / (2m + z)
            LawKind::Wigner => Ok(-m / (2.0 * m + z)),
            // z m^2 + s (z - a) m + s = 0  =>  m' = -(m^2 + s m) / (2 z m + s (z - a))
            LawKind::MarchenkoPastur => {
                let s = self.phi.sqrt();
                let a = s - 1.0 / s;
                Ok(-(m * m + s * m) / (2.0 * z * m + s * (z - a)))
            }
        }
    }
}

fn roots_selected(z: C64, roots: impl Fn(C64) -> (C64, C64), score: impl Fn(C64, C64) -> f64) -> C64 {
    let (r1, r2) = roots(z);
    if score(z, r1) >= score(z, r2) {
        r1
    } else {
        r2
    }
}

/// Evaluates a branch-selected root pair with the conjugation and
/// real-axis conventions shared by both laws.
fn evaluate(
    z: C64,
    roots: impl Fn(C64) -> (C64, C64),
    score: impl Fn(C64, C64) -> f64,
) -> C64 {
    if z.im > 0.0 {
        return roots_selected(z, &roots, &score);
    }
    if z.im < 0.0 {
        return roots_selected(z.conj(), &roots, &score).conj();
    }
    // Real axis: pick the root continuous with the upper half-plane branch.
    let x = z.re;
    let probe = C64::new(x, 1e-7 * (1.0 + x.abs()));
    let reference = roots_selected(probe, &roots, &score);
    let (r1, r2) = roots(C64::new(x, 0.0));
    if (r1 - reference).norm() <= (r2 - reference).norm() {
        r1
    } else {
        r2
    }
}

/// Numerically stable roots of `m^2 + z m + 1 = 0` (product of roots is 1).
fn wigner_roots(z: C64) -> (C64, C64) {
    let s = ((z - 2.0) * (z + 2.0)).sqrt();
    let s = if (z.conj() * s).re >= 0.0 { s } else { -s };
    let big = -(z + s) / 2.0;
    if big.norm() == 0.0 {
        return (C64::new(0.0, 1.0), C64::new(0.0, -1.0));
    }
    (big, 1.0 / big)
}

/// Semicircle Stieltjes transform `m_W(z) = (-z + sqrt(z^2 - 4)) / 2`.
pub fn m_wigner(z: C64, mode: RealAxis) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    if z.im == 0.0 && mode == RealAxis::Strict && z.re.abs() < 2.0 {
        return Err(Error::Domain(format!("{} lies inside the semicircle bulk (-2, 2)", z.re)));
    }
    Ok(evaluate(z, wigner_roots, |_, m| m.im))
}

/// Roots of `z m^2 + s (z - a) m + s = 0`, `s = sqrt(phi)`, `a = s - 1/s`.
fn mp_roots(z: C64, phi: f64) -> (C64, C64) {
    let s = phi.sqrt();
    let a = s - 1.0 / s;
    let b = s * (z - a);
    let disc = b * b - 4.0 * z * s;
    let d = disc.sqrt();
    let d = if (b.conj() * d).re >= 0.0 { d } else { -d };
    let q = -(b + d) / 2.0;
    if q.norm() == 0.0 {
        // b = 0 and disc = 0 only if z = 0, excluded by callers.
        return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    }
    (q / z, s / q)
}

/// MP Stieltjes transform
/// `(phi^{1/2} - phi^{-1/2} - z + i sqrt((z - g-)(g+ - z))) / (2 phi^{-1/2} z)`.
pub fn m_mp(z: C64, law: LimitLaw) -> Result<C64> {
    if law.kind != LawKind::MarchenkoPastur {
        return Err(Error::InvalidParameter("m_mp requires a Marchenko-Pastur law".into()));
    }
    m_mp_phi(z, law.phi, RealAxis::Strict)
}

fn m_mp_phi(z: C64, phi: f64, mode: RealAxis) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    if z.norm() == 0.0 {
        return Err(Error::Domain("MP Stieltjes transform is undefined at z = 0".into()));
    }
    let law = LimitLaw { kind: LawKind::MarchenkoPastur, phi };
    let (lo, hi) = law.bulk();
    if z.im == 0.0 && mode == RealAxis::Strict && z.re > lo && z.re < hi {
        return Err(Error::Domain(format!("{} lies inside the MP bulk ({lo}, {hi})", z.re)));
    }
    Ok(evaluate(z, |w| mp_roots(w, phi), |w, m| (w * m).im))
}

/// `z m_MP(1/z)`: limit law of `(z Y*Y - I)^{-1}`.
///
/// Window enforcement for this variant is left to callers.
pub fn m_reciprocal_variant(z: C64, law: LimitLaw) -> Result<C64> {
    if law.kind != LawKind::MarchenkoPastur {
        return Err(Error::InvalidParameter("reciprocal variant requires a Marchenko-Pastur law".into()));
    }
    if z.norm() == 0.0 {
        return Err(Error::Domain("reciprocal variant is undefined at z = 0".into()));
    }
    Ok(z * m_mp(1.0 / z, law)?)
}

/// Local-law rate `Psi_N(z) = sqrt(Im m(z) / (N y)) + 1 / (N y)`.
pub fn rate_psi(law: LimitLaw, z: C64, n: usize) -> Result<f64> {
    let y = z.im;
    if !(y > 0.0) {
        return Err(Error::Domain(format!("rate requires Im z > 0, got {y}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    let m = law.m(z)?;
    let ny = n as f64 * y;
    Ok((m.im / ny).sqrt() + 1.0 / ny)
}

/// Parameters of the spectral window `S_{N, omega}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowParams {
    pub omega: f64,
    pub n: usize,
    pub beta: f64,
}

impl WindowParams {
    pub fn new(omega: f64, n: usize, beta: f64) -> Result<Self> {
        let p = Self { omega, n, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::InvalidParameter(format!("omega must lie in (0, 1), got {}", self.omega)));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(Error::InvalidParameter(format!("beta must lie in (0, 1/2), got {}", self.beta)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("N must be positive".into()));
        }
        Ok(())
    }
}

/// Exact membership in `S^W_{N,omega}` or `S^MP_{N,omega}`.
///
/// The MP edge-distance condition is an upper bound `kappa <= 1/omega`.
pub fn in_spectral_window(law: LimitLaw, z: C64, params: WindowParams) -> bool {
    let (x, y) = (z.re, z.im);
    let inv = 1.0 / params.omega;
    match law.kind {
        LawKind::Wigner => {
            let lower = (params.n as f64).powf(-1.0 + params.omega);
            x.abs() <= inv && lower <= y && y <= inv
        }
        LawKind::MarchenkoPastur => {
            let (lo, hi) = law.bulk();
            let kappa = (lo - x).abs().min((hi - x).abs());
            let k = params.n as f64 * law.phi.min(1.0);
            let lower = k.powf(-1.0 + params.omega);
            kappa <= inv && lower <= y && y <= inv && z.norm() >= params.omega
        }
    }
}
