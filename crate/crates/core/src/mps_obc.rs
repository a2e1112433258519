// SPDX-License-Identifier: Apache-2.0

//! Open-boundary matrix product states.
//!
//! Site tensor `i` has shape `(d_i, m_{i-1}, m_i)` with `m_0 = m_N = 1`. Cuts
//! and gauge bonds are numbered `1..N-1`, bond `i` sitting between sites `i`
//! and `i+1` (sites themselves are stored 0-based).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TnsError};
use crate::limits::{check_intermediate, check_state};
use crate::linalg::{identity_residual, inverse_checked, reduced_rq, svd, DEFAULT_RANK_TOL, MAX_CONDITION};
use crate::tensor::{contract, DenseTensor, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMps")]
pub struct MpsObc {
    tensors: Vec<DenseTensor>,
}

#[derive(Deserialize)]
struct RawMps {
    tensors: Vec<DenseTensor>,
}

impl TryFrom<RawMps> for MpsObc {
    type Error = TnsError;
    fn try_from(raw: RawMps) -> Result<Self> {
        MpsObc::new(raw.tensors)
    }
}

/// Schmidt data of a state across cut `[1, cut] | [cut+1, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtData {
    pub cut: usize,
    pub coefficients: Vec<f64>,
    pub rank: usize,
}

impl MpsObc {
    pub fn new(tensors: Vec<DenseTensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(TnsError::Dimension("an MPS needs at least one site".into()));
        }
        for (i, t) in tensors.iter().enumerate() {
            if t.order() != 3 {
                return Err(TnsError::Dimension(format!(
                    "site {} tensor has order {}, expected 3",
                    i,
                    t.order()
                )));
            }
        }
        if tensors[0].shape()[1] != 1 || tensors[tensors.len() - 1].shape()[2] != 1 {
            return Err(TnsError::Dimension("open boundary bonds must have dimension 1".into()));
        }
        for i in 1..tensors.len() {
            if tensors[i - 1].shape()[2] != tensors[i].shape()[1] {
                return Err(TnsError::Dimension(format!(
                    "bond {} has extents {} and {}",
                    i,
                    tensors[i - 1].shape()[2],
                    tensors[i].shape()[1]
                )));
            }
        }
        Ok(MpsObc { tensors })
    }

    pub fn tensors(&self) -> &[DenseTensor] {
        &self.tensors
    }

    pub fn into_tensors(self) -> Vec<DenseTensor> {
        self.tensors
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.tensors.iter().map(|t| t.shape()[0]).collect()
    }

    /// Interior bond dimensions `m_1, ..., m_{N-1}`.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.shape()[2]).collect()
    }

    /// Replaces one site tensor, revalidating all bonds.
    pub fn with_tensor(&self, site: usize, t: DenseTensor) -> Result<Self> {
        let mut tensors = self.tensors.clone();
        if site >= tensors.len() {
            return Err(TnsError::Argument(format!("site {} out of range", site)));
        }
        tensors[site] = t;
        MpsObc::new(tensors)
    }
}

/// Full state with shape `(d_1, ..., d_N)`.
pub fn eval_obc(mps: &MpsObc) -> Result<DenseTensor> {
    let dims = mps.phys_dims();
    check_state("OBC-MPS state", &dims)?;
    let first = &mps.tensors[0];
    let mut left = first.reshape(&[first.shape()[0], first.shape()[2]])?;
    for a in &mps.tensors[1..] {
        let (rows, d, mr) = (left.shape()[0], a.shape()[0], a.shape()[2]);
        check_intermediate("OBC-MPS contraction", (rows * d * mr) as u128)?;
        left = contract(&left, a, &[(1, 1)])?.into_reshaped(&[rows * d, mr])?;
    }
    left.into_reshaped(&dims)
}

fn check_normalized(psi: &DenseTensor, dims: &[usize]) -> Result<()> {
    if dims.iter().product::<usize>() != psi.len() {
        return Err(TnsError::Dimension(format!(
            "site dims {:?} do not match {} amplitudes",
            dims,
            psi.len()
        )));
    }
    let n = psi.norm();
    if (n - 1.0).abs() > 1e-8 {
        return Err(TnsError::Normalization(format!("state has norm {}, expected 1", n)));
    }
    Ok(())
}

/// Exact MPS of a normalized state by a right-to-left sweep of reduced RQ
/// decompositions. Bond `i` ends up with the Schmidt rank of cut `i`.
pub fn from_state_obc(psi: &DenseTensor, dims: &[usize], max_bond: Option<usize>) -> Result<MpsObc> {
    check_normalized(psi, dims)?;
    check_state("state vector", dims)?;
    let n = dims.len();
    if n == 0 {
        return Err(TnsError::Dimension("need at least one site".into()));
    }
    let mut tensors = vec![DenseTensor::zeros(&[0]); n];
    let mut right = 1usize;
    let mut rows: usize = psi.len();
    let mut c = psi.reshape(&[1, psi.len()])?;
    for i in (1..n).rev() {
        rows /= dims[i];
        c = c.into_reshaped(&[rows, dims[i] * right])?;
        let (r, q) = reduced_rq(&c)?;
        let rank = q.shape()[0];
        if let Some(cap) = max_bond {
            if rank > cap {
                return Err(TnsError::Rank {
                    location: format!("cut {}", i),
                    rank,
                    allowed: cap,
                });
            }
        }
        tensors[i] = q.into_reshaped(&[rank, dims[i], right])?.permute(&[1, 0, 2])?;
        c = r;
        right = rank;
    }
    tensors[0] = c.into_reshaped(&[dims[0], 1, right])?;
    MpsObc::new(tensors)
}

/// `A` as the `(m_left, d * m_right)` matrix whose rows are the left bond.
fn as_right_matrix(a: &DenseTensor) -> Result<DenseTensor> {
    let (d, ml, mr) = (a.shape()[0], a.shape()[1], a.shape()[2]);
    a.permute(&[1, 0, 2])?.into_reshaped(&[ml, d * mr])
}

fn from_right_matrix(m: &DenseTensor, d: usize) -> Result<DenseTensor> {
    let (ml, cols) = m.dims2()?;
    m.reshape(&[ml, d, cols / d])?.permute(&[1, 0, 2])
}

/// `max |sum_s A^s A^s† - 1|` for a `(d, m, m')` tensor.
pub fn right_isometry_residual(a: &DenseTensor) -> Result<f64> {
    let m = as_right_matrix(a)?;
    identity_residual(&m.matmul(&m.adjoint()?)?)
}

/// `max |sum_s A^s† A^s - 1|` for a `(d, m, m')` tensor.
pub fn left_isometry_residual(a: &DenseTensor) -> Result<f64> {
    let (d, ml, mr) = (a.shape()[0], a.shape()[1], a.shape()[2]);
    let m = a.reshape(&[d * ml, mr])?;
    identity_residual(&m.adjoint()?.matmul(&m)?)
}

/// Multiplies `(d, m, m')` by a matrix on the right bond.
fn times_right(a: &DenseTensor, r: &DenseTensor) -> Result<DenseTensor> {
    contract(a, r, &[(2, 0)])
}

/// Multiplies a matrix onto the left bond of `(d, m, m')`.
fn times_left(l: &DenseTensor, a: &DenseTensor) -> Result<DenseTensor> {
    contract(l, a, &[(1, 1)])?.permute(&[1, 0, 2])
}

/// Right-canonical form: every tensor satisfies `sum_s B^s B^s† = 1` and each
/// bond dimension equals the Schmidt rank of its cut. The state is normalized
/// and, when it fits the state cap, phased so its largest amplitude is real
/// positive.
pub fn right_canonicalize(mps: &MpsObc) -> Result<MpsObc> {
    let n = mps.len();
    let mut t = mps.tensors.clone();
    let zero_state = || TnsError::Normalization("zero state has no canonical form".into());

    // Left sweep: A = Q R, pushing R right. Bonds shrink to left-side ranks.
    for i in 0..n.saturating_sub(1) {
        let (d, ml, mr) = (t[i].shape()[0], t[i].shape()[1], t[i].shape()[2]);
        let m = t[i].reshape(&[d * ml, mr])?;
        // m = q r with q isometric columns, from the RQ of m†.
        let (rt, qt) = reduced_rq(&m.adjoint()?)?;
        let rank = qt.shape()[0];
        if rank == 0 {
            return Err(zero_state());
        }
        t[i] = qt.adjoint()?.into_reshaped(&[d, ml, rank])?;
        t[i + 1] = times_left(&rt.adjoint()?, &t[i + 1])?;
    }
    // Right sweep: A = R Q, pushing R left. Bonds become Schmidt ranks.
    for i in (1..n).rev() {
        let d = t[i].shape()[0];
        let (r, q) = reduced_rq(&as_right_matrix(&t[i])?)?;
        if q.shape()[0] == 0 {
            return Err(zero_state());
        }
        t[i] = from_right_matrix(&q, d)?;
        t[i - 1] = times_right(&t[i - 1], &r)?;
    }
    let norm = t[0].norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(zero_state());
    }
    t[0] = t[0].scale_real(1.0 / norm);
    let mut out = MpsObc::new(t)?;

    if check_state("phase normalization", &out.phys_dims()).is_ok() {
        let psi = eval_obc(&out)?;
        if let Some(z) = leading_amplitude(&psi) {
            let phase = z.conj() / z.norm();
            out.tensors[0] = out.tensors[0].scale(phase);
        }
    }
    Ok(out)
}

/// First amplitude whose magnitude is within roundoff of the maximum.
pub(crate) fn leading_amplitude(psi: &DenseTensor) -> Option<C64> {
    let max = psi.max_abs();
    if max == 0.0 {
        return None;
    }
    psi.data().iter().copied().find(|z| z.norm() >= max * (1.0 - 1e-12))
}

/// Schmidt coefficients across cut `cut` (between sites `cut` and `cut+1`,
/// counting from 1).
pub fn schmidt(psi: &DenseTensor, dims: &[usize], cut: usize) -> Result<SchmidtData> {
    let n = dims.len();
    if cut < 1 || cut + 1 > n {
        return Err(TnsError::Argument(format!("cut {} outside 1..={}", cut, n.saturating_sub(1))));
    }
    if dims.iter().product::<usize>() != psi.len() {
        return Err(TnsError::Dimension(format!(
            "site dims {:?} do not match {} amplitudes",
            dims,
            psi.len()
        )));
    }
    let left: usize = dims[..cut].iter().product();
    let dec = svd(&psi.reshape(&[left, psi.len() / left])?, DEFAULT_RANK_TOL)?;
    Ok(SchmidtData {
        cut,
        coefficients: dec.s[..dec.rank].to_vec(),
        rank: dec.rank,
    })
}

/// Inserts `z z^-1` on bond `bond` (1-based): `A_bond <- A_bond z`,
/// `A_{bond+1} <- z^-1 A_{bond+1}`.
pub fn gauge_transform(mps: &MpsObc, bond: usize, z: &DenseTensor) -> Result<MpsObc> {
    let n = mps.len();
    if bond < 1 || bond >= n {
        return Err(TnsError::Argument(format!("bond {} outside 1..={}", bond, n.saturating_sub(1))));
    }
    let m = mps.tensors[bond - 1].shape()[2];
    let (r, c) = z.dims2()?;
    if r != m || c != m {
        return Err(TnsError::Dimension(format!(
            "gauge matrix is {}x{} but bond {} has dimension {}",
            r, c, bond, m
        )));
    }
    let zinv = inverse_checked(z, MAX_CONDITION)?;
    let mut t = mps.tensors.clone();
    t[bond - 1] = times_right(&t[bond - 1], z)?;
    t[bond] = times_left(&zinv, &t[bond])?;
    MpsObc::new(t)
}

/// Random complex Gaussian tensors with the given physical and interior bond
/// dimensions.
pub fn random_mps_obc<R: Rng + ?Sized>(dims: &[usize], bonds: &[usize], rng: &mut R) -> Result<MpsObc> {
    if bonds.len() + 1 != dims.len() {
        return Err(TnsError::Dimension(format!(
            "{} sites need {} interior bonds, got {}",
            dims.len(),
            dims.len().saturating_sub(1),
            bonds.len()
        )));
    }
    let mut full = vec![1];
    full.extend_from_slice(bonds);
    full.push(1);
    let tensors = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| crate::linalg::random_complex(&[d, full[i], full[i + 1]], rng))
        .collect();
    MpsObc::new(tensors)
}
