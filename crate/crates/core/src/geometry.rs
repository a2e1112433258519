// SPDX-License-Identifier: Apache-2.0

//! Dimension counts for periodic MPS sets: stabilizer Lie algebras of
//! states under local invertible operators, the closed-form group dimensions
//! and ranks of the parametrization Jacobian. All dimensions are complex.

use rand::Rng;
use serde::Serialize;

use crate::error::{Result, TnsError};
use crate::linalg::{matrix_rank, random_complex, DEFAULT_RANK_TOL};
use crate::mps_pbc::{eval_pbc, unit_tensor, MpsPbc};
use crate::tensor::{contract, DenseTensor, ONE, ZERO};
use crate::zoo::{psi_tau_tensors, two_domain_state};

/// Largest `Σ d_i^2` accepted by [`stabilizer_lie_dim`].
pub const MAX_LIE_PARAMS: usize = 512;
/// Largest number of tensor entries accepted by [`jacobian_rank`].
pub const MAX_JACOBIAN_PARAMS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PredictedDims {
    pub dim_g: i64,
    pub dim_g_mu: i64,
    pub dim_g_tau: i64,
    pub dim_pmps: i64,
}

/// Closed forms for `N` sites, bond dimension `m` and site dimension `m^2`.
pub fn predicted_dims(n: usize, m: usize) -> PredictedDims {
    let (n, m) = (n as i64, m as i64);
    PredictedDims {
        dim_g: n * (m.pow(4) - 1) + 1,
        dim_g_mu: n * m * m - n,
        dim_g_tau: n * (m * m - 1) + m * (m - 2) + 1,
        dim_pmps: n * m * m * (m * m - 1) + 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionReport {
    pub predicted: i64,
    pub measured: i64,
    #[serde(rename = "match")]
    pub matched: bool,
    pub tolerance_used: f64,
}

impl DimensionReport {
    pub fn new(predicted: i64, measured: i64, tolerance_used: f64) -> Self {
        DimensionReport {
            predicted,
            measured,
            matched: predicted == measured,
            tolerance_used,
        }
    }
}

/// Applies the `d x d` matrix `x` to axis `site` of `psi`.
fn apply_local(psi: &DenseTensor, x: &DenseTensor, site: usize) -> Result<DenseTensor> {
    let n = psi.order();
    let moved = contract(x, psi, &[(1, site)])?;
    let mut perm: Vec<usize> = (1..n).collect();
    perm.insert(site, 0);
    moved.permute(&perm)
}

/// Nullity of `(X_1, ..., X_N) ↦ Σ_j X_j|ψ>` minus the `N - 1` directions
/// `(c_1 1, ..., c_N 1)` with `Σ c_j = 0`, which act trivially.
pub fn stabilizer_lie_dim(psi: &DenseTensor, site_dims: &[usize]) -> Result<i64> {
    stabilizer_lie_dim_tol(psi, site_dims, DEFAULT_RANK_TOL)
}

pub fn stabilizer_lie_dim_tol(psi: &DenseTensor, site_dims: &[usize], tol: f64) -> Result<i64> {
    let params: usize = site_dims.iter().map(|d| d * d).sum();
    if params > MAX_LIE_PARAMS {
        return Err(TnsError::Capacity {
            what: "stabilizer algebra".into(),
            needed: params as u128,
            cap: MAX_LIE_PARAMS,
        });
    }
    let total: usize = site_dims.iter().product();
    if total != psi.len() {
        return Err(TnsError::Dimension(format!("site dims {:?} do not match the state", site_dims)));
    }
    if psi.norm() == 0.0 {
        return Err(TnsError::Normalization("zero state".into()));
    }
    let psi = psi.reshape(site_dims)?;
    let mut columns = Vec::with_capacity(params * total);
    for (j, &d) in site_dims.iter().enumerate() {
        for ab in 0..d * d {
            let e = unit_tensor(&[d, d], ab);
            columns.extend_from_slice(apply_local(&psi, &e, j)?.data());
        }
    }
    // Rows are generators, so the rank equals the rank of the map.
    let phi = DenseTensor::new(vec![params, total], columns)?;
    let rank = matrix_rank(&phi, tol)?;
    Ok(params as i64 - rank as i64 - (site_dims.len() as i64 - 1))
}

/// Complex rank of the derivative of `(A_1, ..., A_N) ↦ Ψ` at `mps`.
pub fn jacobian_rank(mps: &MpsPbc, tol: f64) -> Result<usize> {
    matrix_rank(&jacobian(mps)?, tol)
}

/// One row per tensor entry: the state with that tensor replaced by the
/// matching unit tensor.
pub fn jacobian(mps: &MpsPbc) -> Result<DenseTensor> {
    let params: usize = mps.tensors().iter().map(|t| t.len()).sum();
    if params > MAX_JACOBIAN_PARAMS {
        return Err(TnsError::Capacity {
            what: "parametrization Jacobian".into(),
            needed: params as u128,
            cap: MAX_JACOBIAN_PARAMS,
        });
    }
    let base = MpsPbc::new(mps.tensors().to_vec(), false)?;
    let total: usize = mps.phys_dims().iter().product();
    let mut rows = Vec::with_capacity(params * total);
    for (i, t) in mps.tensors().iter().enumerate() {
        for k in 0..t.len() {
            let varied = base.with_tensor(i, unit_tensor(t.shape(), k))?;
            rows.extend_from_slice(eval_pbc(&varied)?.data());
        }
    }
    DenseTensor::new(vec![params, total], rows)
}

/// Periodic chain whose state is the ring of entangled pairs.
pub fn mu_ring(n: usize, m: usize) -> Result<MpsPbc> {
    psi_tau_tensors(n, m, 1.0)
}

/// Random point `(Â_1 ⊗ ... ⊗ Â_N)|mu>` with generic `Â_i`.
pub fn random_injective_point<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<MpsPbc> {
    let mu = mu_ring(n, m)?;
    let d = m * m;
    let tensors = mu
        .tensors()
        .iter()
        .map(|t| contract(&random_complex(&[d, d], rng), t, &[(1, 0)]))
        .collect::<Result<Vec<_>>>()?;
    MpsPbc::new(tensors, false)
}

/// Generic tensor list with given site and bond dimensions.
pub fn random_pmps<R: Rng + ?Sized>(n: usize, m: usize, d: usize, rng: &mut R) -> Result<MpsPbc> {
    MpsPbc::new((0..n).map(|_| random_complex(&[d, m, m], rng)).collect(), false)
}

/// The same point with one site tensor set to zero.
pub fn with_zero_tensor(mps: &MpsPbc, site: usize) -> Result<MpsPbc> {
    let t = &mps.tensors()[site.min(mps.len().saturating_sub(1))];
    mps.with_tensor(site, DenseTensor::zeros(t.shape()))
}

/// Which quantity a geometry report row measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryState {
    /// Stabilizer of the entangled-pair ring.
    Mu,
    /// Stabilizer of the two-domain state.
    Tau,
    /// Stabilizer at a random injective point.
    Generic,
    /// Jacobian rank at a random injective point.
    Pmps,
}

impl GeometryState {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mu" => Ok(GeometryState::Mu),
            "tau" => Ok(GeometryState::Tau),
            "generic" | "random" => Ok(GeometryState::Generic),
            "pmps" | "jacobian" => Ok(GeometryState::Pmps),
            other => Err(TnsError::Argument(format!("unknown geometry state '{}'", other))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GeometryState::Mu => "mu",
            GeometryState::Tau => "tau",
            GeometryState::Generic => "generic",
            GeometryState::Pmps => "pmps",
        }
    }
}

pub fn geometry_report<R: Rng + ?Sized>(
    state: GeometryState,
    n: usize,
    m: usize,
    tol: f64,
    rng: &mut R,
) -> Result<DimensionReport> {
    if n < 3 || m == 0 {
        return Err(TnsError::Argument("dimension counts need N >= 3 and m >= 1".into()));
    }
    let dims = vec![m * m; n];
    let pred = predicted_dims(n, m);
    let (predicted, measured) = match state {
        GeometryState::Mu => (pred.dim_g_mu, stabilizer_lie_dim_tol(&eval_pbc(&mu_ring(n, m)?)?, &dims, tol)?),
        GeometryState::Tau => (pred.dim_g_tau, stabilizer_lie_dim_tol(&two_domain_state(n, m)?, &dims, tol)?),
        GeometryState::Generic => {
            let p = random_injective_point(n, m, rng)?;
            (pred.dim_g_mu, stabilizer_lie_dim_tol(&eval_pbc(&p)?, &dims, tol)?)
        }
        GeometryState::Pmps => {
            let p = random_injective_point(n, m, rng)?;
            (pred.dim_pmps, jacobian_rank(&p, tol)? as i64)
        }
    };
    Ok(DimensionReport::new(predicted, measured, tol))
}

/// Product state `|0...0>` used as a sanity input.
pub fn basis_product_state(dims: &[usize]) -> DenseTensor {
    let total: usize = dims.iter().product();
    let mut data = vec![ZERO; total];
    if total > 0 {
        data[0] = ONE;
    }
    DenseTensor::from_parts(dims.to_vec(), data)
}
