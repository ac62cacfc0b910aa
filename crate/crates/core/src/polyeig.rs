//! Spectra of the perturbed objects: `X + P C Q`, products `H X`, and
//! quadratic polynomials `X - p(z) I + q(z) u u^*`.

use std::f64::consts::PI;

use ndarray::Array2;
use ndarray_linalg::{EigGeneralized, GeneralizedEigenvalue, SVD};
use serde::{Deserialize, Serialize};

use crate::matops::{checked_inverse, matching_distance, max_norm, spectrum};
use crate::outliers::ScalarPoly;
use crate::perturbation::{eval_perturbation, PerturbationModel};
use crate::stieltjes::LimitLaw;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Eigenvalues with modulus above this are treated as infinite.
pub const INFINITE_EIGENVALUE: f64 = 1e8;
/// `Im` threshold separating non-real eigenvalues from rounding noise.
pub const UPPER_HALF_THRESHOLD: f64 = 1e-6;
/// Agreement required between the two `H X` routes.
pub const HX_ROUTE_TOL: f64 = 1e-8;

/// `sigma(X + P C Q)` for a constant `C`.
pub fn spike_spectrum(x: &CMatrix, model: &PerturbationModel) -> Result<Vec<C64>> {
    if model.c.degree() != 0 {
        return Err(Error::InvalidParameter("spike_spectrum needs a constant C".into()));
    }
    if x.dim() != (model.big_n(), model.big_n()) {
        return Err(Error::Shape(format!("X is {:?}, model has N = {}", x.dim(), model.big_n())));
    }
    if model.is_zero() {
        return spectrum(x);
    }
    spectrum(&(x + &eval_perturbation(model, C64::new(0.0, 0.0))))
}

fn check_hx(c: &[f64], x: &CMatrix) -> Result<()> {
    let big_n = x.nrows();
    if x.ncols() != big_n {
        return Err(Error::Shape(format!("X is {:?}", x.dim())));
    }
    if c.len() > big_n {
        return Err(Error::Shape(format!("{} H entries for N = {big_n}", c.len())));
    }
    if let Some(bad) = c.iter().find(|&&v| !(v < 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!("H entries must be negative, got {bad}")));
    }
    Ok(())
}

/// `sigma(H X)` with `H = diag(c_1, ..., c_n, 1, ..., 1)`, computed directly.
pub fn hx_spectrum(c: &[f64], x: &CMatrix) -> Result<Vec<C64>> {
    check_hx(c, x)?;
    let mut hx = x.clone();
    for (j, &cj) in c.iter().enumerate() {
        hx.row_mut(j).mapv_inplace(|v| v * cj);
    }
    spectrum(&hx)
}

/// Eigenvalues of the pencil `X - z I + z P C Q`, `C = diag(1 - 1/c_j)`,
/// i.e. `X v = z H^{-1} v`, via the generalized QZ solver.
pub fn hx_pencil_spectrum(c: &[f64], x: &CMatrix) -> Result<Vec<C64>> {
    check_hx(c, x)?;
    let mut b = CMatrix::eye(x.nrows());
    for (j, &cj) in c.iter().enumerate() {
        b[[j, j]] -= C64::new(1.0 - 1.0 / cj, 0.0);
    }
    let (vals, _) = (x.clone(), b).eig_generalized(None)?;
    let mut out = Vec::with_capacity(vals.len());
    for v in vals {
        match v {
            GeneralizedEigenvalue::Finite(e, _) => out.push(e),
            GeneralizedEigenvalue::Indeterminate(_) => {
                return Err(Error::NonConvergence("indeterminate eigenvalue of a regular pencil".into()));
            }
        }
    }
    Ok(out)
}

/// [`hx_spectrum`] cross-checked against [`hx_pencil_spectrum`].
///
/// Returns the direct spectrum and the matching distance between the two.
pub fn hx_spectrum_verified(c: &[f64], x: &CMatrix) -> Result<(Vec<C64>, f64)> {
    let direct = hx_spectrum(c, x)?;
    let pencil = hx_pencil_spectrum(c, x)?;
    let scale = 1.0 + max_norm(x) * x.nrows() as f64;
    let d = matching_distance(&direct, &pencil);
    if !(d <= HX_ROUTE_TOL * scale) {
        return Err(Error::NonConvergence(format!("product and pencil spectra differ by {d}")));
    }
    Ok((direct, d))
}

/// Number of eigenvalues with `Im > threshold`.
pub fn count_upper(spectrum: &[C64], threshold: f64) -> usize {
    spectrum.iter().filter(|l| l.im > threshold).count()
}

/// `X - p(z) I + q(z) u u^*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticScenario {
    pub p: ScalarPoly,
    pub q: ScalarPoly,
    pub u: CVector,
    pub law: LimitLaw,
    pub zeta: Option<C64>,
}

/// Largest support of `u` accepted.
pub const MAX_U_SUPPORT: usize = 16;

impl QuadraticScenario {
    pub fn new(p: ScalarPoly, q: ScalarPoly, u: CVector, law: LimitLaw) -> Result<Self> {
        let s = Self { p, q, u, law, zeta: None };
        s.validate()?;
        Ok(s)
    }

    /// The 1-d acoustic wave problem with the tridiagonal part replaced by a
    /// Wigner matrix: `p(z) = 4 pi^2 z^2 - 2`, `q(z) = 2 pi^2 z^2 + (2 pi i/zeta) z - 1`,
    /// `u = e_N`.
    pub fn acoustic(big_n: usize, zeta: C64) -> Result<Self> {
        if big_n == 0 || zeta.norm() == 0.0 {
            return Err(Error::InvalidParameter("acoustic scenario needs N > 0 and zeta != 0".into()));
        }
        let p = ScalarPoly::real(&[-2.0, 0.0, 4.0 * PI * PI]);
        let q = ScalarPoly::new(vec![C64::new(-1.0, 0.0), C64::new(0.0, 2.0 * PI) / zeta, C64::new(2.0 * PI * PI, 0.0)]);
        let mut u = CVector::zeros(big_n);
        u[big_n - 1] = C64::new(1.0, 0.0);
        let mut s = Self::new(p, q, u, LimitLaw::wigner())?;
        s.zeta = Some(zeta);
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let norm = self.u.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("u must have unit norm, got {norm}")));
        }
        let support = self.u.iter().filter(|v| v.norm() != 0.0).count();
        if support > MAX_U_SUPPORT {
            return Err(Error::InvalidParameter(format!("u has {support} nonzeros, more than {MAX_U_SUPPORT}")));
        }
        if self.p.degree() == 0 && self.q.degree() == 0 {
            return Err(Error::InvalidParameter("p or q must be nonconstant".into()));
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.p.degree().max(self.q.degree())
    }

    /// Coefficients `A_0, ..., A_d` of the assembled polynomial.
    pub fn coefficients(&self, x: &CMatrix) -> Result<Vec<CMatrix>> {
        let big_n = self.u.len();
        if x.dim() != (big_n, big_n) {
            return Err(Error::Shape(format!("X is {:?}, u has length {big_n}", x.dim())));
        }
        let uu = outer(&self.u);
        let coef = |poly: &ScalarPoly, i: usize| poly.0.get(i).copied().unwrap_or(C64::new(0.0, 0.0));
        Ok((0..=self.degree())
            .map(|i| {
                let mut a = uu.mapv(|v| v * coef(&self.q, i));
                let pi = coef(&self.p, i);
                for k in 0..big_n {
                    a[[k, k]] -= pi;
                }
                if i == 0 {
                    a += x;
                }
                a
            })
            .collect())
    }
}

fn outer(u: &CVector) -> CMatrix {
    let n = u.len();
    Array2::from_shape_fn((n, n), |(i, j)| u[i] * u[j].conj())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolySpectrum {
    pub eigenvalues: Vec<C64>,
    /// Eigenvalues discarded as infinite.
    pub infinite: usize,
}

/// Finite eigenvalues of the assembled polynomial via the first companion
/// form reduced by the (invertible) leading coefficient.
pub fn quadratic_spectrum(scn: &QuadraticScenario, x: &CMatrix) -> Result<PolySpectrum> {
    scn.validate()?;
    let coeffs = scn.coefficients(x)?;
    let d = scn.degree();
    let big_n = x.nrows();
    let lead = &coeffs[d];
    let (_, sv, _) = lead.svd(false, false)?;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let defect = sv.iter().filter(|&&s| s <= 1e-12 * smax.max(f64::MIN_POSITIVE)).count();
    if defect > 0 || smax == 0.0 {
        return Err(Error::PolynomialDegeneracy { defect: defect.max(1) });
    }
    let lead_inv = checked_inverse(lead, "leading coefficient")?;
    let mut comp = CMatrix::zeros((d * big_n, d * big_n));
    for j in 0..d {
        // block (0, j) = -A_d^{-1} A_{d-1-j}
        let blk = lead_inv.dot(&coeffs[d - 1 - j]).mapv(|v| -v);
        comp.slice_mut(ndarray::s![..big_n, j * big_n..(j + 1) * big_n]).assign(&blk);
    }
    for i in 1..d {
        for k in 0..big_n {
            comp[[i * big_n + k, (i - 1) * big_n + k]] = C64::new(1.0, 0.0);
        }
    }
    let all = spectrum(&comp)?;
    let total = all.len();
    let eigenvalues: Vec<C64> = all.into_iter().filter(|l| l.norm() <= INFINITE_EIGENVALUE).collect();
    Ok(PolySpectrum { infinite: total - eigenvalues.len(), eigenvalues })
}

/// `1 + q(z) u^* (X - p(z) I)^{-1} u`; vanishes exactly at the eigenvalues of
/// the polynomial with `p(z)` outside `sigma(X)`.
pub fn secular_check(scn: &QuadraticScenario, x: &CMatrix, z: C64) -> Result<C64> {
    let big_n = scn.u.len();
    if x.dim() != (big_n, big_n) {
        return Err(Error::Shape(format!("X is {:?}, u has length {big_n}", x.dim())));
    }
    let qz = scn.q.eval(z);
    if qz.norm() == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let pz = scn.p.eval(z);
    let mut shifted = x.clone();
    for k in 0..big_n {
        shifted[[k, k]] -= pz;
    }
    let inv = checked_inverse(&shifted, "X - p(z) I")?;
    let w = inv.dot(&scn.u);
    let uw: C64 = scn.u.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(1.0 + qz * uw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::{diag, PerturbationModel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let mut x = CMatrix::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = c(rng.random_range(-1.0..1.0) * (3.0 / n as f64).sqrt(), 0.0);
                x[[i, j]] = v;
                x[[j, i]] = v;
            }
        }
        x
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn spike_spectrum_examples() {
        let x = CMatrix::zeros((3, 3));
        let model = PerturbationModel::leading_block(3, diag(&[c(0.0, 8.0)])).unwrap();
        let ev = sorted(spike_spectrum(&x, &model).unwrap());
        assert!(ev[0].norm() < 1e-14 && ev[1].norm() < 1e-14 && (ev[2] - c(0.0, 8.0)).norm() < 1e-14);
        let d = diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let ev = sorted(spike_spectrum(&d, &PerturbationModel::zero(2)).unwrap());
        assert!((ev[0] - c(1.0, 0.0)).norm() < 1e-15 && (ev[1] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hx_identity_h_gives_real_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_symmetric(&mut rng, 20);
        assert!(hx_spectrum(&[], &x).unwrap().iter().all(|l| l.im.abs() < 1e-12));
        assert!(hx_spectrum(&[1.0], &x).is_err());
    }

    #[test]
    fn hx_routes_agree_small() {
        let x = CMatrix::from_shape_fn((5, 5), |(i, j)| c(1.0 / (1.0 + i as f64 + j as f64), 0.0));
        let direct = hx_spectrum(&[-1.0, -2.0], &x).unwrap();
        let pencil = hx_pencil_spectrum(&[-1.0, -2.0], &x).unwrap();
        assert!(matching_distance(&direct, &pencil) < 1e-10);
    }

    #[test]
    fn hx_routes_agree_and_are_conjugate_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for big_n in [10usize, 50, 200] {
            let x = random_symmetric(&mut rng, big_n);
            let cs = [-1.0, -2.0, -2.0];
            let (ev, d) = hx_spectrum_verified(&cs, &x).unwrap();
            assert!(d < 1e-8, "N={big_n}: {d}");
            let conj: Vec<C64> = ev.iter().map(|l| l.conj()).collect();
            assert!(matching_distance(&ev, &conj) < 1e-8);
            assert!(count_upper(&ev, UPPER_HALF_THRESHOLD) <= cs.len());
        }
    }

    #[test]
    fn quadratic_linear_specialization() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_symmetric(&mut rng, 8);
        let mut u = CVector::zeros(8);
        u[0] = c(1.0, 0.0);
        let scn = QuadraticScenario::new(ScalarPoly::real(&[0.0, 1.0]), ScalarPoly::real(&[0.0]), u, LimitLaw::wigner()).unwrap();
        let got = quadratic_spectrum(&scn, &x).unwrap();
        assert_eq!(got.infinite, 0);
        assert!(matching_distance(&got.eigenvalues, &spectrum(&x).unwrap()) < 1e-12);
    }

    #[test]
    fn quadratic_hand_example() {
        let (a, b) = (0.5, 3.0);
        let x = diag(&[c(a, 0.0), c(b, 0.0)]);
        let mut u = CVector::zeros(2);
        u[0] = c(1.0, 0.0);
        let scn = QuadraticScenario::new(ScalarPoly::real(&[0.0, 0.0, 1.0]), ScalarPoly::real(&[1.0]), u, LimitLaw::wigner()).unwrap();
        let got = quadratic_spectrum(&scn, &x).unwrap();
        let r1 = (a + 1.0f64).sqrt();
        let r2 = b.sqrt();
        let expected = vec![c(r1, 0.0), c(-r1, 0.0), c(r2, 0.0), c(-r2, 0.0)];
        assert!(matching_distance(&got.eigenvalues, &expected) < 1e-12);
    }

    #[test]
    fn companion_matches_scalar_roots_for_diagonal_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for big_n in [3usize, 10, 20] {
            let vals: Vec<f64> = (0..big_n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let x = diag(&vals.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>());
            let mut scn = QuadraticScenario::acoustic(big_n, c(1.0, 0.0)).unwrap();
            scn.u = CVector::zeros(big_n);
            scn.u[0] = c(1.0, 0.0);
            let got = quadratic_spectrum(&scn, &x).unwrap();
            // each diagonal entry gives a scalar quadratic
            let mut expected = Vec::new();
            for (k, &v) in vals.iter().enumerate() {
                let mut coeffs: Vec<C64> = scn.p.0.iter().map(|w| -w).collect();
                coeffs[0] += v;
                if k == 0 {
                    for (i, qi) in scn.q.0.iter().enumerate() {
                        coeffs[i] += qi;
                    }
                }
                expected.extend(ScalarPoly::new(coeffs).roots().unwrap());
            }
            assert!(matching_distance(&got.eigenvalues, &expected) < 1e-10, "N={big_n}");
        }
    }

    #[test]
    fn acoustic_leading_coefficient_is_regular() {
        let scn = QuadraticScenario::acoustic(30, c(1.0, 0.0)).unwrap();
        let x = CMatrix::zeros((30, 30));
        let lead = &scn.coefficients(&x).unwrap()[2];
        assert!((lead[[29, 29]] - c(-2.0 * PI * PI, 0.0)).norm() < 1e-12);
        assert!((lead[[0, 0]] - c(-4.0 * PI * PI, 0.0)).norm() < 1e-12);
        let got = quadratic_spectrum(&scn, &x).unwrap();
        assert_eq!((got.eigenvalues.len(), got.infinite), (60, 0));
    }

    #[test]
    fn degenerate_leading_coefficient() {
        let mut u = CVector::zeros(4);
        u[0] = c(1.0, 0.0);
        // A_2 = u u^*, rank one
        let scn = QuadraticScenario::new(ScalarPoly::real(&[0.0, 1.0]), ScalarPoly::real(&[0.0, 0.0, 1.0]), u, LimitLaw::wigner()).unwrap();
        match quadratic_spectrum(&scn, &CMatrix::eye(4)) {
            Err(Error::PolynomialDegeneracy { defect }) => assert_eq!(defect, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn secular_function_vanishes_on_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for big_n in [10usize, 30, 50] {
            let x = random_symmetric(&mut rng, big_n);
            let scn = QuadraticScenario::acoustic(big_n, c(1.0, 0.0)).unwrap();
            let ev = quadratic_spectrum(&scn, &x).unwrap().eigenvalues;
            let xev: Vec<f64> = spectrum(&x).unwrap().iter().map(|l| l.re).collect();
            let mut checked = 0;
            for l in ev {
                let pl = scn.p.eval(l);
                let gap = xev.iter().map(|&e| (pl - e).norm()).fold(f64::INFINITY, f64::min);
                if gap < 1e-3 {
                    continue;
                }
                let s = secular_check(&scn, &x, l).unwrap();
                let scale = 1.0 + scn.q.eval(l).norm() / gap;
                assert!(s.norm() < 1e-6 * scale, "N={big_n}: {}", s.norm());
                checked += 1;
            }
            assert!(checked > 0);
        }
    }

    #[test]
    fn secular_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_symmetric(&mut rng, 6);
        let mut u = CVector::zeros(6);
        u[2] = c(1.0, 0.0);
        let scn = QuadraticScenario::new(ScalarPoly::real(&[0.0, 1.0]), ScalarPoly::real(&[0.0]), u.clone(), LimitLaw::wigner()).unwrap();
        assert_eq!(secular_check(&scn, &x, c(0.3, 0.2)).unwrap(), c(1.0, 0.0));
        let scn = QuadraticScenario::new(ScalarPoly::real(&[0.0, 1.0]), ScalarPoly::real(&[2.0]), u, LimitLaw::wigner()).unwrap();
        let far = secular_check(&scn, &x, c(0.0, 1e8)).unwrap();
        assert!((far - 1.0).norm() < 1e-7);
    }

    #[test]
    fn scenario_validation() {
        let u = CVector::from_elem(4, c(1.0, 0.0));
        assert!(QuadraticScenario::new(ScalarPoly::real(&[0.0, 1.0]), ScalarPoly::real(&[1.0]), u, LimitLaw::wigner()).is_err());
        let mut u = CVector::zeros(4);
        u[1] = c(1.0, 0.0);
        assert!(QuadraticScenario::new(ScalarPoly::real(&[1.0]), ScalarPoly::real(&[1.0]), u, LimitLaw::wigner()).is_err());
    }
}
