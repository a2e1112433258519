// SPDX-License-Identifier: Apache-2.0

//! Matrix decompositions on [`DenseTensor`] matrices: SVD, reduced RQ, rank,
//! nullspace, Hermitian and general eigenvalues, checked inversion.
//!
//! Numerical ranks are always relative: a singular value counts when it
//! exceeds `tol * s_max`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, TnsError};
use crate::tensor::{DenseTensor, C64, ZERO};

pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Condition number at which a gauge matrix is treated as singular.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `k x p` with orthonormal columns, `p = min(k, n)`.
    pub u: DenseTensor,
    /// Descending, nonnegative.
    pub s: Vec<f64>,
    /// `p x n` with orthonormal rows.
    pub vdag: DenseTensor,
    pub rank: usize,
}

impl SvdResult {
    /// `u * diag(s) * vdag`.
    pub fn recompose(&self) -> DenseTensor {
        let (k, p) = (self.u.shape()[0], self.s.len());
        let us = DenseTensor::from_fn(&[k, p], |i| self.u.get(i) * self.s[i[1]]);
        us.matmul(&self.vdag).expect("svd factors are conformal")
    }

    /// Leading `r` columns of `u`.
    pub fn u_cols(&self, r: usize) -> DenseTensor {
        let k = self.u.shape()[0];
        DenseTensor::from_fn(&[k, r], |i| self.u.get(i))
    }

    /// Leading `r` rows of `vdag`.
    pub fn vdag_rows(&self, r: usize) -> DenseTensor {
        let n = self.vdag.shape()[1];
        DenseTensor::from_fn(&[r, n], |i| self.vdag.get(i))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_nan() || tol < 0.0 {
        return Err(TnsError::Argument(format!("tolerance must be nonnegative, got {}", tol)));
    }
    Ok(())
}

fn relative_rank(s: &[f64], tol: f64) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol * smax).count()
}

pub fn svd(m: &DenseTensor, tol: f64) -> Result<SvdResult> {
    check_tol(tol)?;
    let (k, n) = m.dims2()?;
    let p = k.min(n);
    if p == 0 {
        return Ok(SvdResult {
            u: DenseTensor::zeros(&[k, 0]),
            s: vec![],
            vdag: DenseTensor::zeros(&[0, n]),
            rank: 0,
        });
    }
    let dec = m.to_matrix()?.svd_unordered(true, true);
    let u = dec.u.expect("u requested");
    let vt = dec.v_t.expect("v requested");
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let s: Vec<f64> = order.iter().map(|&i| dec.singular_values[i].max(0.0)).collect();
    let u = DenseTensor::from_fn(&[k, p], |i| u[(i[0], order[i[1]])]);
    let vdag = DenseTensor::from_fn(&[p, n], |i| vt[(order[i[0]], i[1])]);
    let rank = relative_rank(&s, tol);
    Ok(SvdResult { u, s, vdag, rank })
}

pub fn matrix_rank(m: &DenseTensor, tol: f64) -> Result<usize> {
    Ok(svd(m, tol)?.rank)
}

/// Singular values only, descending.
pub fn singular_values(m: &DenseTensor) -> Result<Vec<f64>> {
    let (k, n) = m.dims2()?;
    if k.min(n) == 0 {
        return Ok(vec![]);
    }
    let mut s: Vec<f64> = m.to_matrix()?.singular_values_unordered().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// `m = r * q` with `q q† = 1` of size `rank(m)` and `r` of shape `k x rank`.
///
/// Built from a column-pivoted Householder QR of `m†`, truncated at the SVD
/// rank under the default tolerance.
pub fn reduced_rq(m: &DenseTensor) -> Result<(DenseTensor, DenseTensor)> {
    reduced_rq_tol(m, DEFAULT_RANK_TOL)
}

pub fn reduced_rq_tol(m: &DenseTensor, tol: f64) -> Result<(DenseTensor, DenseTensor)> {
    let (k, n) = m.dims2()?;
    if k == 0 || n == 0 {
        return Err(TnsError::Dimension(format!("reduced_rq needs k, n >= 1, got {}x{}", k, n)));
    }
    let rank = matrix_rank(m, tol)?;
    let qr = m.to_matrix()?.adjoint().col_piv_qr();
    let (q, mut r, p) = qr.unpack();
    // m† P = Q R, hence m† = Q (R P^-1) and m = (R P^-1)† Q†.
    p.inv_permute_columns(&mut r);
    let rfac = DenseTensor::from_fn(&[k, rank], |i| r[(i[1], i[0])].conj());
    let qfac = DenseTensor::from_fn(&[rank, n], |i| q[(i[1], i[0])].conj());
    Ok((rfac, qfac))
}

/// Orthonormal basis (as columns, `n x nullity`) of the kernel of a `k x n`
/// matrix.
pub fn nullspace(m: &DenseTensor, tol: f64) -> Result<DenseTensor> {
    check_tol(tol)?;
    let (k, n) = m.dims2()?;
    if n == 0 {
        return Ok(DenseTensor::zeros(&[0, 0]));
    }
    // Pad wide matrices with zero rows so the SVD returns all of V.
    let padded = if k < n {
        let mut data = m.data().to_vec();
        data.resize(n * n, ZERO);
        DenseTensor::from_parts(vec![n, n], data)
    } else {
        m.clone()
    };
    let dec = svd(&padded, tol)?;
    let nullity = n - dec.rank;
    Ok(DenseTensor::from_fn(&[n, nullity], |i| {
        dec.vdag.get(&[dec.rank + i[1], i[0]]).conj()
    }))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending and
/// eigenvectors as columns.
pub fn hermitian_eigen(h: &DenseTensor) -> Result<(Vec<f64>, DenseTensor)> {
    let (r, c) = h.dims2()?;
    if r != c {
        return Err(TnsError::Dimension(format!("eigen of {}x{} matrix", r, c)));
    }
    if r == 0 {
        return Ok((vec![], DenseTensor::zeros(&[0, 0])));
    }
    let mut m = h.to_matrix()?;
    // Symmetrize to suppress roundoff asymmetry.
    m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DenseTensor::from_fn(&[r, r], |i| eig.eigenvectors[(i[0], order[i[1]])]);
    Ok((vals, vecs))
}

/// Eigenvalues of a general square matrix from its complex Schur form, sorted
/// by descending magnitude.
pub fn eigenvalues(m: &DenseTensor) -> Result<Vec<C64>> {
    let (r, c) = m.dims2()?;
    if r != c {
        return Err(TnsError::Dimension(format!("eigenvalues of {}x{} matrix", r, c)));
    }
    if r == 0 {
        return Ok(vec![]);
    }
    let schur = nalgebra::Schur::try_new(m.to_matrix()?, f64::EPSILON, 100_000)
        .ok_or_else(|| TnsError::Invariant("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut vals: Vec<C64> = (0..r).map(|i| t[(i, i)]).collect();
    vals.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(vals)
}

pub fn spectral_radius(m: &DenseTensor) -> Result<f64> {
    Ok(eigenvalues(m)?.first().map(|z| z.norm()).unwrap_or(0.0))
}

/// Inverse of a square matrix; fails when the condition number reaches
/// `max_cond`.
pub fn inverse_checked(z: &DenseTensor, max_cond: f64) -> Result<DenseTensor> {
    let (r, c) = z.dims2()?;
    if r != c || r == 0 {
        return Err(TnsError::Dimension(format!("inverse of {}x{} matrix", r, c)));
    }
    let dec = svd(z, 0.0)?;
    let smax = dec.s[0];
    let smin = dec.s[r - 1];
    if smin <= 0.0 || smax / smin >= max_cond {
        return Err(TnsError::Invertibility(format!(
            "condition number {:.3e} is not below {:.1e}",
            if smin > 0.0 { smax / smin } else { f64::INFINITY },
            max_cond
        )));
    }
    // V diag(1/s) U†
    Ok(DenseTensor::from_fn(&[r, r], |i| {
        (0..r)
            .map(|k| dec.vdag.get(&[k, i[0]]).conj() * (1.0 / dec.s[k]) * dec.u.get(&[i[1], k]).conj())
            .sum()
    }))
}

/// Largest entrywise deviation from the identity.
pub fn identity_residual(m: &DenseTensor) -> Result<f64> {
    let (r, c) = m.dims2()?;
    if r != c {
        return Ok(f64::INFINITY);
    }
    Ok(m.max_abs_diff(&DenseTensor::identity(r)))
}

/// Projects a Hermitian-ish matrix onto its Hermitian part.
pub fn hermitize(m: &DenseTensor) -> Result<DenseTensor> {
    Ok(m.add(&m.adjoint()?)?.scale_real(0.5))
}

/// Whether the Hermitian part is positive definite, judged relative to its
/// largest eigenvalue magnitude.
pub fn is_positive_definite(m: &DenseTensor, tol: f64) -> Result<bool> {
    let (vals, _) = hermitian_eigen(&hermitize(m)?)?;
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(scale > 0.0 && vals.iter().all(|&v| v > tol * scale))
}

/// `f(h)` for a Hermitian matrix via its eigen-decomposition.
pub fn hermitian_fn(h: &DenseTensor, f: impl Fn(f64) -> f64) -> Result<DenseTensor> {
    let (vals, vecs) = hermitian_eigen(h)?;
    let n = vals.len();
    Ok(DenseTensor::from_fn(&[n, n], |i| {
        (0..n)
            .map(|k| vecs.get(&[i[0], k]) * f(vals[k]) * vecs.get(&[i[1], k]).conj())
            .sum()
    }))
}

pub fn random_complex<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> DenseTensor {
    DenseTensor::from_fn(shape, |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Random `rows x cols` matrix with orthonormal rows (`rows <= cols`), from a
/// QR of a complex Gaussian matrix.
pub fn random_isometry_rows<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<DenseTensor> {
    if rows > cols {
        return Err(TnsError::Argument(format!(
            "cannot have {} orthonormal rows of length {}",
            rows, cols
        )));
    }
    let g = random_complex(&[cols, rows], rng);
    let qr = g.to_matrix()?.qr();
    let q = qr.q();
    let r = qr.r();
    // Fix column phases so the distribution is Haar.
    Ok(DenseTensor::from_fn(&[rows, cols], |i| {
        let d = r[(i[0], i[0])];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        (q[(i[1], i[0])] * ph).conj()
    }))
}
