//! Dense complex matrix utilities: operator norms, sparsity counts, the
//! `kappa` bounds for `P`, `Q`, Woodbury updates, the determinant-difference
//! bound and a general eigensolver.

use std::cmp::Ordering;

use ndarray::{s, Array2, ArrayView2};
use ndarray_linalg::{EigVals, EigValsh, FactorizeInto, Inverse, OperationNorm, Solve, SVD, UPLO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, Error, Result, C64};

/// Reciprocal condition number below which an inversion is refused.
pub const SINGULAR_RCOND: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lp {
    One,
    Two,
    Inf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    Max,
    OneToOne,
    InfToInf,
    Spectral,
    /// Operator norm from `l^p` to `l^q`. Only `(1, inf)`, `(2, inf)` and
    /// `(1, 2)` are supported.
    Mixed(Lp, Lp),
}

pub fn max_norm(a: &CMatrix) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn column_norms(a: &CMatrix, f: impl Fn(&[f64]) -> f64) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| f(&c.iter().map(|v| v.norm()).collect::<Vec<_>>()))
        .fold(0.0, f64::max)
}

fn row_norms(a: &CMatrix, f: impl Fn(&[f64]) -> f64) -> f64 {
    a.rows()
        .into_iter()
        .map(|r| f(&r.iter().map(|v| v.norm()).collect::<Vec<_>>()))
        .fold(0.0, f64::max)
}

fn l1(v: &[f64]) -> f64 {
    v.iter().sum()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn spectral_norm(a: &CMatrix) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let (_, sv, _) = a.svd(false, false)?;
    Ok(sv.iter().copied().fold(0.0, f64::max))
}

pub fn norm(a: &CMatrix, kind: NormKind) -> Result<f64> {
    Ok(match kind {
        NormKind::Max => max_norm(a),
        NormKind::OneToOne => column_norms(a, l1),
        NormKind::InfToInf => row_norms(a, l1),
        NormKind::Spectral => spectral_norm(a)?,
        NormKind::Mixed(Lp::One, Lp::Inf) => max_norm(a),
        NormKind::Mixed(Lp::Two, Lp::Inf) => row_norms(a, l2),
        NormKind::Mixed(Lp::One, Lp::Two) => column_norms(a, l2),
        NormKind::Mixed(p, q) => {
            return Err(Error::Unsupported(format!("mixed norm ({p:?}, {q:?})")));
        }
    })
}

/// `(r, c)`: maximal number of nonzeros in a row and in a column.
pub fn sparsity_counts(a: &CMatrix) -> (usize, usize) {
    let nz = |v: &C64| v.re != 0.0 || v.im != 0.0;
    let r = a.rows().into_iter().map(|row| row.iter().filter(|v| nz(v)).count()).max().unwrap_or(0);
    let c = a.columns().into_iter().map(|col| col.iter().filter(|v| nz(v)).count()).max().unwrap_or(0);
    (r, c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaBounds {
    /// Bound on `kappa_1(Q)`.
    pub k1: f64,
    /// Bound on `kappa_inf(P)`.
    pub kinf: f64,
    /// Bound on `kappa(P, Q) = sup ||Q E P||_2 / ||E||_max`.
    pub kpq: f64,
}

pub fn kappa_bounds(p: &CMatrix, q: &CMatrix) -> Result<KappaBounds> {
    let (big_n, n) = p.dim();
    if q.dim() != (n, big_n) {
        return Err(Error::Shape(format!("P is {:?} but Q is {:?}", p.dim(), q.dim())));
    }
    let (r_q, _) = sparsity_counts(q);
    let (_, c_p) = sparsity_counts(p);
    let (pm, qm) = (max_norm(p), max_norm(q));
    let n = n as f64;
    Ok(KappaBounds {
        k1: n * r_q as f64 * qm,
        kinf: n * c_p as f64 * pm,
        kpq: n * r_q as f64 * c_p as f64 * qm * pm,
    })
}

/// Reciprocal 1-norm condition number `1 / (||A||_1 ||A^{-1}||_1)`.
pub fn rcond_of(a: &CMatrix, inv: &CMatrix) -> f64 {
    let na = norm(a, NormKind::OneToOne).unwrap_or(f64::INFINITY);
    let ni = norm(inv, NormKind::OneToOne).unwrap_or(f64::INFINITY);
    if na == 0.0 || !ni.is_finite() {
        0.0
    } else {
        1.0 / (na * ni)
    }
}

/// Inverse of a small matrix by Gauss–Jordan elimination with full pivoting.
///
/// Returns the inverse together with its reciprocal condition estimate and
/// refuses matrices whose estimate falls below [`SINGULAR_RCOND`].
pub fn small_inverse(a: &CMatrix, what: &'static str) -> Result<(CMatrix, f64)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!("{what} is not square: {:?}", a.dim())));
    }
    if n == 0 {
        return Ok((Array2::zeros((0, 0)), 1.0));
    }
    let scale = max_norm(a);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Singular { what, rcond: 0.0 });
    }
    let mut m = a.clone();
    let mut inv = Array2::<C64>::eye(n);
    let mut col_perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for i in k..n {
            for j in k..n {
                let v = m[[i, j]].norm();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= f64::EPSILON * scale * 1e-3 {
            return Err(Error::Singular { what, rcond: 0.0 });
        }
        if pi != k {
            for j in 0..n {
                m.swap([pi, j], [k, j]);
                inv.swap([pi, j], [k, j]);
            }
        }
        if pj != k {
            for i in 0..n {
                m.swap([i, pj], [i, k]);
            }
            col_perm.swap(pj, k);
        }
        let piv = m[[k, k]];
        for j in 0..n {
            m[[k, j]] /= piv;
            inv[[k, j]] /= piv;
        }
        for i in 0..n {
            if i != k {
                let f = m[[i, k]];
                if f.norm() != 0.0 {
                    for j in 0..n {
                        let (mk, ik) = (m[[k, j]], inv[[k, j]]);
                        m[[i, j]] -= f * mk;
                        inv[[i, j]] -= f * ik;
                    }
                }
            }
        }
    }
    // undo the column permutation: rows of the inverse follow the columns of A
    let mut out = Array2::<C64>::zeros((n, n));
    for (k, &orig) in col_perm.iter().enumerate() {
        out.row_mut(orig).assign(&inv.row(k));
    }
    let rcond = rcond_of(a, &out);
    if !(rcond >= SINGULAR_RCOND) {
        return Err(Error::Singular { what, rcond });
    }
    Ok((out, rcond))
}

/// Inverse of a (possibly large) matrix via LU, with a condition check.
pub fn checked_inverse(a: &CMatrix, what: &'static str) -> Result<CMatrix> {
    if a.nrows() <= 10 {
        return small_inverse(a, what).map(|(inv, _)| inv);
    }
    let inv = a.inv().map_err(|_| Error::Singular { what, rcond: 0.0 })?;
    let rcond = rcond_of(a, &inv);
    if !(rcond >= SINGULAR_RCOND) {
        return Err(Error::Singular { what, rcond });
    }
    Ok(inv)
}

/// Woodbury update: `(X + P C Q)^{-1} = X^{-1} - X^{-1} P L^{-1} Q X^{-1}`
/// with `L = C^{-1} + Q X^{-1} P`.
pub fn woodbury_inverse(xinv: &CMatrix, p: &CMatrix, cinv: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    let big_n = xinv.nrows();
    let n = cinv.nrows();
    if xinv.ncols() != big_n || p.dim() != (big_n, n) || q.dim() != (n, big_n) || cinv.ncols() != n {
        return Err(Error::Shape(format!(
            "Xinv {:?}, P {:?}, Cinv {:?}, Q {:?}",
            xinv.dim(),
            p.dim(),
            cinv.dim(),
            q.dim()
        )));
    }
    let xp = xinv.dot(p);
    let qx = q.dot(xinv);
    let l = cinv + &q.dot(&xp);
    let (linv, _) = small_or_lu_inverse(&l, "Woodbury capacitance matrix L")?;
    Ok(xinv - &xp.dot(&linv).dot(&qx))
}

fn small_or_lu_inverse(a: &CMatrix, what: &'static str) -> Result<(CMatrix, f64)> {
    if a.nrows() <= 10 {
        small_inverse(a, what)
    } else {
        let inv = checked_inverse(a, what)?;
        let r = rcond_of(a, &inv);
        Ok((inv, r))
    }
}

/// Largest size accepted by [`det_diff_bound`].
pub const DET_BOUND_MAX_K: usize = 8;

/// `k! k ||A - B||_max (||A - B||_max + ||A||_max)^{k-1}`, an upper bound on
/// `|det A - det B|`.
pub fn det_diff_bound(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let k = a.nrows();
    if a.dim() != (k, k) || b.dim() != (k, k) {
        return Err(Error::Shape(format!("A {:?}, B {:?}", a.dim(), b.dim())));
    }
    if k > DET_BOUND_MAX_K {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds the guard {DET_BOUND_MAX_K}")));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let d = max_norm(&(a - b));
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    Ok(fact * k as f64 * d * (d + max_norm(a)).powi(k as i32 - 1))
}

fn is_hermitian(a: &CMatrix) -> bool {
    let n = a.nrows();
    (0..n).all(|i| a[[i, i]].im == 0.0 && (i + 1..n).all(|j| a[[i, j]] == a[[j, i]].conj()))
}

fn check_finite(a: ArrayView2<C64>) -> Result<()> {
    if a.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain("matrix has non-finite entries".into()))
    }
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn hermitian_spectrum(a: &Array2<f64>) -> Result<Vec<f64>> {
    let ev = a.eigvalsh(UPLO::Lower).map_err(|e| Error::NonConvergence(e.to_string()))?;
    Ok(ev.to_vec())
}

/// All eigenvalues of a general complex square matrix.
///
/// Hermitian inputs go to the symmetric solver, everything else to the
/// complex Hessenberg/QR solver.
pub fn spectrum(a: &CMatrix) -> Result<Vec<C64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!("spectrum of non-square {:?}", a.dim())));
    }
    check_finite(a.view())?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let fail = |e: ndarray_linalg::error::LinalgError| Error::NonConvergence(e.to_string());
    if is_hermitian(a) {
        let ev = a.eigvalsh(UPLO::Lower).map_err(fail)?;
        return Ok(ev.iter().map(|&x| C64::new(x, 0.0)).collect());
    }
    // The real-input general eigensolver of the LAPACK bindings returns
    // wrong eigenvalues for n above ~150; real matrices go through zgeev.
    Ok(a.eigvals().map_err(fail)?.to_vec())
}

/// Extra basis vectors carried by [`eigs_near`] beyond the `k` requested.
const NEAR_GUARD: usize = 2;
const NEAR_MAX_ITER: usize = 200;
const NEAR_TOL: f64 = 1e-12;

/// In-place modified Gram-Schmidt, two passes.
fn orthonormalize(v: &mut CMatrix) -> Result<()> {
    for j in 0..v.ncols() {
        for _ in 0..2 {
            for i in 0..j {
                let (qi, mut vj) = v.multi_slice_mut((s![.., i], s![.., j]));
                let proj: C64 = qi.iter().zip(vj.iter()).map(|(a, b)| a.conj() * b).sum();
                vj.zip_mut_with(&qi, |b, a| *b -= proj * a);
            }
        }
        let nrm = v.column(j).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::NonConvergence("subspace iteration lost rank".into()));
        }
        v.column_mut(j).mapv_inplace(|x| x / nrm);
    }
    Ok(())
}

/// The `k` eigenvalues nearest `sigma`, by shift-invert subspace iteration
/// with Rayleigh-Ritz. Sorted as in [`order_by_distance`].
///
/// Meant for a few eigenvalues well separated from the rest, where one LU
/// factorization replaces a full Schur decomposition.
pub fn eigs_near(a: &CMatrix, sigma: C64, k: usize) -> Result<Vec<C64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!("eigs_near of non-square {:?}", a.dim())));
    }
    check_finite(a.view())?;
    if k == 0 {
        return Ok(Vec::new());
    }
    if k + NEAR_GUARD >= n {
        return Ok(order_by_distance(&spectrum(a)?, sigma).into_iter().take(k).collect());
    }
    let mut shifted = a.clone();
    shifted.diag_mut().mapv_inplace(|d| d - sigma);
    let lu = shifted
        .factorize_into()
        .map_err(|_| Error::Singular { what: "A - sigma I", rcond: 0.0 })?;
    let width = k + NEAR_GUARD;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut gauss = || rng.sample::<f64, _>(StandardNormal);
    let mut v = CMatrix::from_shape_simple_fn((n, width), || C64::new(gauss(), gauss()));
    orthonormalize(&mut v)?;
    let mut prev: Option<Vec<C64>> = None;
    for _ in 0..NEAR_MAX_ITER {
        let mut w = CMatrix::zeros((n, width));
        for j in 0..width {
            let x = lu.solve(&v.column(j).to_owned()).map_err(|e| Error::NonConvergence(e.to_string()))?;
            w.column_mut(j).assign(&x);
        }
        orthonormalize(&mut w)?;
        v = w;
        let h = v.t().mapv(|x| x.conj()).dot(&a.dot(&v));
        let ritz: Vec<C64> = order_by_distance(&spectrum(&h)?, sigma).into_iter().take(k).collect();
        if let Some(p) = &prev {
            let scale = 1.0 + sigma.norm() + ritz.iter().map(|r| r.norm()).fold(0.0, f64::max);
            if matching_distance(p, &ritz) <= NEAR_TOL * scale {
                return Ok(ritz);
            }
        }
        prev = Some(ritz);
    }
    Err(Error::NonConvergence(format!("eigs_near: {k} eigenvalues near {sigma} did not settle")))
}

/// Sorts by `|lambda - z0|`, ties broken by `arg(lambda - z0)` in `[0, 2 pi)`.
pub fn order_by_distance(points: &[C64], z0: C64) -> Vec<C64> {
    let key = |l: &C64| {
        let d = *l - z0;
        let mut arg = d.im.atan2(d.re);
        if arg < 0.0 {
            arg += 2.0 * std::f64::consts::PI;
        }
        (d.norm(), arg)
    };
    let mut v: Vec<(f64, f64, C64)> = points.iter().map(|l| {
        let (d, a) = key(l);
        (d, a, *l)
    }).collect();
    v.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal).then(x.1.partial_cmp(&y.1).unwrap_or(Ordering::Equal)));
    v.into_iter().map(|(_, _, l)| l).collect()
}

/// Largest distance in a greedy nearest-pair matching of two multisets
/// (pairs taken globally in order of increasing distance).
///
/// Returns infinity if the sizes differ.
pub fn matching_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|u, v| u.0.total_cmp(&v.0));
    let (mut ua, mut ub) = (vec![false; a.len()], vec![false; b.len()]);
    let mut worst: f64 = 0.0;
    let mut left = a.len();
    for (d, i, j) in pairs {
        if left == 0 {
            break;
        }
        if !ua[i] && !ub[j] {
            ua[i] = true;
            ub[j] = true;
            worst = worst.max(d);
            left -= 1;
        }
    }
    worst
}

/// Leading `rows x cols` block.
pub fn block(a: &CMatrix, rows: usize, cols: usize) -> CMatrix {
    a.slice(s![..rows, ..cols]).to_owned()
}

/// Spectral norm of the inverse via the smallest singular value.
pub fn inverse_spectral_norm(a: &CMatrix) -> Result<f64> {
    let (_, sv, _) = a.svd(false, false)?;
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(if smin == 0.0 { f64::INFINITY } else { 1.0 / smin })
}

/// 2-norm of a matrix via LAPACK (used when only an estimate is needed).
pub fn frobenius(a: &CMatrix) -> f64 {
    a.opnorm_fro().unwrap_or(f64::NAN)
}
