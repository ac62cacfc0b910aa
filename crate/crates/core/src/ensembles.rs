//! Seeded samplers for Wigner and Marchenko–Pastur matrices.
//!
//! Entries are Gaussian. Real Wigner matrices use the GOE convention: off
//! diagonal variance `1/N`, diagonal variance `2/N`. Every sample is a pure
//! function of its [`EnsembleSpec`]; sweeps obtain per-cell seeds from
//! [`derive_seed`], which does not depend on evaluation order.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, Error, Result, C64};

/// Exponent bound `N^{1/c} <= M <= N^c` accepted for MP shapes.
pub const MP_SHAPE_EXPONENT: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleKind {
    WignerReal,
    WignerComplex,
    MarchenkoPastur,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    /// Number of rows of the MP factor `Y` (ignored for Wigner kinds).
    pub m: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn wigner_real(n: usize, seed: u64) -> Self {
        Self { kind: EnsembleKind::WignerReal, n, m: n, seed }
    }

    pub fn wigner_complex(n: usize, seed: u64) -> Self {
        Self { kind: EnsembleKind::WignerComplex, n, m: n, seed }
    }

    pub fn marchenko_pastur(n: usize, m: usize, seed: u64) -> Self {
        Self { kind: EnsembleKind::MarchenkoPastur, n, m, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if self.kind == EnsembleKind::MarchenkoPastur {
            if self.m == 0 {
                return Err(Error::InvalidParameter("M must be at least 1".into()));
            }
            let (n, m) = (self.n as f64, self.m as f64);
            if m > n.powf(MP_SHAPE_EXPONENT) || n > m.powf(MP_SHAPE_EXPONENT) {
                return Err(Error::InvalidParameter(format!(
                    "MP shape N={}, M={} violates N^(1/{c}) <= M <= N^{c}",
                    self.n,
                    self.m,
                    c = MP_SHAPE_EXPONENT
                )));
            }
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the `(n, trial)` cell of a sweep started from `base`.
pub fn derive_seed(base: u64, n: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ n as u64) ^ (trial as u64).rotate_left(32))
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Hermitian Wigner matrix with variance-`1/N` entries.
pub fn sample_wigner(spec: &EnsembleSpec) -> Result<CMatrix> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = spec.rng();
    let mut w = Array2::<C64>::zeros((n, n));
    match spec.kind {
        EnsembleKind::WignerReal => {
            let off = (1.0 / n as f64).sqrt();
            let diag = (2.0 / n as f64).sqrt();
            for i in 0..n {
                w[[i, i]] = C64::new(diag * normal(&mut rng), 0.0);
                for j in (i + 1)..n {
                    let v = C64::new(off * normal(&mut rng), 0.0);
                    w[[i, j]] = v;
                    w[[j, i]] = v;
                }
            }
        }
        EnsembleKind::WignerComplex => {
            let half = (0.5 / n as f64).sqrt();
            let diag = (1.0 / n as f64).sqrt();
            for i in 0..n {
                w[[i, i]] = C64::new(diag * normal(&mut rng), 0.0);
                for j in (i + 1)..n {
                    let v = C64::new(half * normal(&mut rng), half * normal(&mut rng));
                    w[[i, j]] = v;
                    w[[j, i]] = v.conj();
                }
            }
        }
        EnsembleKind::MarchenkoPastur => {
            return Err(Error::InvalidParameter("sample_wigner called with an MP spec".into()))
        }
    }
    Ok(w)
}

/// Real Wigner matrix as a real array (GOE convention), for solvers that
/// exploit symmetry. Draws the same numbers as [`sample_wigner`].
pub fn sample_wigner_real(spec: &EnsembleSpec) -> Result<Array2<f64>> {
    if spec.kind != EnsembleKind::WignerReal {
        return Err(Error::InvalidParameter("sample_wigner_real needs a WignerReal spec".into()));
    }
    Ok(sample_wigner(spec)?.mapv(|v| v.re))
}

/// MP factor `Y` (`M x N`, real Gaussian, variance `1/sqrt(NM)`) and the
/// product `X = Y^* Y`.
pub fn sample_mp(spec: &EnsembleSpec) -> Result<(CMatrix, CMatrix)> {
    spec.validate()?;
    if spec.kind != EnsembleKind::MarchenkoPastur {
        return Err(Error::InvalidParameter("sample_mp called with a Wigner spec".into()));
    }
    let (n, m) = (spec.n, spec.m);
    let scale = ((n as f64) * (m as f64)).powf(-0.25);
    let mut rng = spec.rng();
    let y = Array2::from_shape_simple_fn((m, n), || scale * normal(&mut rng));
    let x = y.t().dot(&y);
    Ok((y.mapv(|v| C64::new(v, 0.0)), x.mapv(|v| C64::new(v, 0.0))))
}
