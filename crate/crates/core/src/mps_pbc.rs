// SPDX-License-Identifier: Apache-2.0

//! Periodic-boundary and translation-invariant matrix product states:
//! trace evaluation, transfer matrices, injectivity, primitivity and the
//! block canonical form of a translation-invariant tensor.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TnsError};
use crate::limits::{check_intermediate, check_state, product};
use crate::linalg::{
    eigenvalues, hermitian_eigen, hermitian_fn, hermitize, inverse_checked, is_positive_definite,
    random_isometry_rows, svd, DEFAULT_RANK_TOL, MAX_CONDITION,
};
use crate::mps_obc::right_isometry_residual;
use crate::tensor::{contract, DenseTensor, C64, ONE, ZERO};

/// Tolerance for clustering unit-modulus eigenvalues and splitting
/// invariant subspaces.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPbc")]
pub struct MpsPbc {
    translation_invariant: bool,
    tensors: Vec<DenseTensor>,
}

#[derive(Deserialize)]
struct RawPbc {
    translation_invariant: bool,
    tensors: Vec<DenseTensor>,
}

impl TryFrom<RawPbc> for MpsPbc {
    type Error = TnsError;
    fn try_from(raw: RawPbc) -> Result<Self> {
        MpsPbc::new(raw.tensors, raw.translation_invariant)
    }
}

impl MpsPbc {
    pub fn new(tensors: Vec<DenseTensor>, translation_invariant: bool) -> Result<Self> {
        let first = tensors
            .first()
            .ok_or_else(|| TnsError::Dimension("a PBC-MPS needs at least one site".into()))?;
        if first.order() != 3 {
            return Err(TnsError::Dimension(format!("site tensor has shape {:?}", first.shape())));
        }
        let m = first.shape()[1];
        for (i, t) in tensors.iter().enumerate() {
            if t.order() != 3 || t.shape()[1] != m || t.shape()[2] != m {
                return Err(TnsError::Dimension(format!(
                    "site {} has shape {:?}, expected (d, {}, {})",
                    i,
                    t.shape(),
                    m,
                    m
                )));
            }
            if translation_invariant && t != first {
                return Err(TnsError::Invariant(format!(
                    "translation-invariant MPS has differing tensor at site {}",
                    i
                )));
            }
        }
        Ok(MpsPbc {
            tensors,
            translation_invariant,
        })
    }

    /// Translation-invariant chain of `n` copies of `a`.
    pub fn uniform(a: &DenseTensor, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(TnsError::Argument("chain length must be positive".into()));
        }
        MpsPbc::new(vec![a.clone(); n], true)
    }

    pub fn tensors(&self) -> &[DenseTensor] {
        &self.tensors
    }

    pub fn translation_invariant(&self) -> bool {
        self.translation_invariant
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn bond_dim(&self) -> usize {
        self.tensors[0].shape()[1]
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.tensors.iter().map(|t| t.shape()[0]).collect()
    }

    /// Replaces one tensor; the result is no longer flagged translation
    /// invariant unless all tensors stay equal.
    pub fn with_tensor(&self, site: usize, t: DenseTensor) -> Result<Self> {
        if site >= self.len() {
            return Err(TnsError::Argument(format!("site {} out of range", site)));
        }
        let mut tensors = self.tensors.clone();
        tensors[site] = t;
        let ti = tensors.iter().all(|x| x == &tensors[0]);
        MpsPbc::new(tensors, ti && self.translation_invariant)
    }
}

/// Products `A^{s_1} ... A^{s_k}` of a run of site tensors, shape `(D, m, m)`
/// with the physical multi-index in row-major order.
pub(crate) fn chain_product<'a>(tensors: impl IntoIterator<Item = &'a DenseTensor>, what: &str) -> Result<DenseTensor> {
    let mut it = tensors.into_iter();
    let mut acc = it
        .next()
        .ok_or_else(|| TnsError::Argument("empty tensor chain".into()))?
        .clone();
    for a in it {
        let (rows, m) = (acc.shape()[0], acc.shape()[1]);
        let (d, mr) = (a.shape()[0], a.shape()[2]);
        check_intermediate(what, product(&[rows, d, m, mr]))?;
        acc = contract(&acc, a, &[(2, 1)])?
            .permute(&[0, 2, 1, 3])?
            .into_reshaped(&[rows * d, m, mr])?;
    }
    Ok(acc)
}

/// Amplitudes `Tr(A_1^{s_1} ... A_N^{s_N})`, shape `(d_1, ..., d_N)`.
pub fn eval_pbc(mps: &MpsPbc) -> Result<DenseTensor> {
    let dims = mps.phys_dims();
    check_state("PBC-MPS state", &dims)?;
    let prod = chain_product(&mps.tensors, "PBC-MPS contraction")?;
    let (rows, m) = (prod.shape()[0], prod.shape()[1]);
    let data = prod.data();
    let amps = (0..rows)
        .map(|r| (0..m).map(|k| data[r * m * m + k * m + k]).sum())
        .collect();
    DenseTensor::new(dims, amps)
}

/// `E = sum_s conj(A^s) (x) A^s`, row index `(i, j) -> i * m + j`.
pub fn transfer_matrix(a: &DenseTensor) -> Result<DenseTensor> {
    if a.order() != 3 {
        return Err(TnsError::Dimension(format!("site tensor has shape {:?}", a.shape())));
    }
    let (d, ml, mr) = (a.shape()[0], a.shape()[1], a.shape()[2]);
    let mut e = DenseTensor::zeros(&[ml * ml, mr * mr]);
    for s in 0..d {
        let asig = a.slice_first(s);
        e = e.add(&asig.conj().kron(&asig)?)?;
    }
    Ok(e)
}

/// `E_1 E_2 ... E_N`; its trace is `<Psi|Psi>`.
pub fn transfer_product(tensors: &[DenseTensor]) -> Result<DenseTensor> {
    let mut acc = transfer_matrix(
        tensors
            .first()
            .ok_or_else(|| TnsError::Argument("empty tensor chain".into()))?,
    )?;
    for a in &tensors[1..] {
        acc = acc.matmul(&transfer_matrix(a)?)?;
    }
    Ok(acc)
}

/// `B_l^{s_1..s_l} = A^{s_1} ... A^{s_l}`, shape `(d^l, m, m)`.
pub fn block_tensor(a: &DenseTensor, ell: usize) -> Result<DenseTensor> {
    if ell == 0 {
        return Err(TnsError::Argument("block length must be at least 1".into()));
    }
    if a.order() != 3 {
        return Err(TnsError::Dimension(format!("site tensor has shape {:?}", a.shape())));
    }
    let (d, m) = (a.shape()[0], a.shape()[1]);
    let needed = (d as u128)
        .checked_pow(ell as u32)
        .map(|x| x.saturating_mul((m * m) as u128))
        .unwrap_or(u128::MAX);
    check_intermediate("block tensor", needed)?;
    chain_product(std::iter::repeat_n(a, ell), "block tensor")
}

fn check_square_site(a: &DenseTensor) -> Result<(usize, usize)> {
    if a.order() != 3 || a.shape()[1] != a.shape()[2] {
        return Err(TnsError::Dimension(format!(
            "expected a (d, m, m) tensor, got {:?}",
            a.shape()
        )));
    }
    Ok((a.shape()[0], a.shape()[1]))
}

/// Smallest `l <= ell_max` whose block matrices span all `m x m` matrices.
///
/// Tracks an orthonormal basis of `span{A^{s_1} ... A^{s_l}}` and extends it
/// one site at a time, so long blocks never materialize `d^l` matrices.
pub fn injectivity_length(a: &DenseTensor, ell_max: usize) -> Result<Option<usize>> {
    if ell_max == 0 {
        return Err(TnsError::Argument("ell_max must be at least 1".into()));
    }
    let (d, m) = check_square_site(a)?;
    let full = m * m;
    let mut basis = span_basis(&a.reshape(&[d, full])?)?;
    for ell in 1..=ell_max {
        if basis.shape()[0] == full {
            return Ok(Some(ell));
        }
        if ell == ell_max || basis.shape()[0] == 0 {
            break;
        }
        let r = basis.shape()[0];
        let xs = basis.reshape(&[r, m, m])?;
        // Rows X_k A^s for every basis element and physical index.
        let next = contract(&xs, a, &[(2, 1)])?
            .permute(&[0, 2, 1, 3])?
            .into_reshaped(&[r * d, full])?;
        basis = span_basis(&next)?;
    }
    Ok(None)
}

fn span_basis(rows: &DenseTensor) -> Result<DenseTensor> {
    let dec = svd(rows, DEFAULT_RANK_TOL)?;
    Ok(dec.vdag_rows(dec.rank))
}

/// Dimension of `span{B_l^{s}}` from the flattened `d^l x m^2` matrix.
pub fn block_span_dim(a: &DenseTensor, ell: usize) -> Result<usize> {
    let (_, m) = check_square_site(a)?;
    let b = block_tensor(a, ell)?;
    let rows = b.shape()[0];
    crate::linalg::matrix_rank(&b.into_reshaped(&[rows, m * m])?, DEFAULT_RANK_TOL)
}

/// Quantum Wielandt bound `ceil(2 m^2 (6 + log2 m))`.
pub fn wielandt_bound(m: usize) -> usize {
    assert!(m >= 1, "bond dimension must be positive");
    let mf = m as f64;
    let value = 2.0 * mf * mf * (6.0 + mf.log2());
    // Guard exact integers against log2 roundoff.
    let rounded = value.round();
    if (value - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        value.ceil() as usize
    }
}

/// Matrix of `X -> sum_s A^s† X A^s` acting on row-major `vec(X)`.
fn adjoint_channel_matrix(a: &DenseTensor) -> Result<DenseTensor> {
    let (d, m) = check_square_site(a)?;
    let mut out = DenseTensor::zeros(&[m * m, m * m]);
    for s in 0..d {
        let asig = a.slice_first(s);
        out = out.add(&asig.adjoint()?.kron(&asig.transpose()?)?)?;
    }
    Ok(out)
}

/// Matrix of `X -> sum_s A^s X A^s†` acting on row-major `vec(X)`.
fn channel_matrix(a: &DenseTensor) -> Result<DenseTensor> {
    let (d, m) = check_square_site(a)?;
    let mut out = DenseTensor::zeros(&[m * m, m * m]);
    for s in 0..d {
        let asig = a.slice_first(s);
        out = out.add(&asig.kron(&asig.conj())?)?;
    }
    Ok(out)
}

/// Fixed space of a superoperator matrix, as `m x m` matrices. Null
/// directions of `S - 1` are judged against the scale of `S` itself, since
/// the shifted matrix may vanish entirely.
fn fixed_space(superop: &DenseTensor, m: usize, tol: f64) -> Result<Vec<DenseTensor>> {
    let shifted = superop.sub(&DenseTensor::identity(m * m))?;
    let dec = svd(&shifted, 0.0)?;
    let scale = svd(superop, 0.0)?.s[0].max(1.0);
    let rank = dec.s.iter().filter(|&&x| x > tol * scale).count();
    Ok((rank..m * m)
        .map(|k| DenseTensor::from_fn(&[m, m], |i| dec.vdag.get(&[k, i[0] * m + i[1]]).conj()))
        .collect())
}

/// Rotates a fixed point so its trace is real positive, then Hermitizes.
fn positive_phase(x: &DenseTensor) -> Result<DenseTensor> {
    let tr = x.trace()?;
    let y = if tr.norm() > 1e-300 { x.scale(tr.conj() / tr.norm()) } else { x.clone() };
    hermitize(&y)
}

/// Whether the transfer channel of an isometric tensor is primitive: a single
/// eigenvalue on the spectral circle and a positive definite fixed point.
pub fn is_primitive(a: &DenseTensor, tol: f64) -> Result<bool> {
    let (_, m) = check_square_site(a)?;
    let residual = right_isometry_residual(a)?;
    if residual > tol {
        return Err(TnsError::Precondition(format!(
            "tensor is not isometric: residual {:.3e} exceeds {:.1e}",
            residual, tol
        )));
    }
    let ev = eigenvalues(&transfer_matrix(a)?)?;
    let rho = ev[0].norm();
    if rho == 0.0 {
        return Ok(false);
    }
    let on_circle = ev.iter().filter(|z| z.norm() >= rho * (1.0 - tol)).count();
    if on_circle != 1 {
        return Ok(false);
    }
    let adj = adjoint_channel_matrix(a)?.scale_real(1.0 / rho);
    let fixed = fixed_space(&adj, m, tol.max(DEFAULT_RANK_TOL))?;
    if fixed.len() != 1 {
        return Ok(false);
    }
    is_positive_definite(&positive_phase(&fixed[0])?, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalBlock {
    /// Relative weight in `(0, 1]`.
    pub alpha: f64,
    /// Isometric `(d, m_j, m_j)` tensor.
    pub tensor: DenseTensor,
    /// Positive diagonal fixed point of the adjoint channel, unit trace.
    pub fixed_point: DenseTensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalBlocks {
    pub blocks: Vec<CanonicalBlock>,
    /// Largest absolute block weight; the input state equals `scale^N` times
    /// the state of [`CanonicalBlocks::assemble`].
    pub scale: f64,
}

impl CanonicalBlocks {
    pub fn total_bond_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.tensor.shape()[1]).sum()
    }

    /// Block-diagonal tensor `(+)_j alpha_j A_j`.
    pub fn assemble(&self) -> Result<DenseTensor> {
        let d = self
            .blocks
            .first()
            .ok_or_else(|| TnsError::Degeneracy("no blocks: the state vanishes".into()))?
            .tensor
            .shape()[0];
        let total = self.total_bond_dim();
        let mut out = DenseTensor::zeros(&[d, total, total]);
        let mut data = out.data().to_vec();
        let mut off = 0;
        for b in &self.blocks {
            let mj = b.tensor.shape()[1];
            for s in 0..d {
                for i in 0..mj {
                    for j in 0..mj {
                        data[s * total * total + (off + i) * total + off + j] = b.tensor.get(&[s, i, j]) * b.alpha;
                    }
                }
            }
            off += mj;
        }
        out = DenseTensor::new(vec![d, total, total], data)?;
        Ok(out)
    }
}

/// `V† A^s W` for every `s`.
fn sandwich(a: &DenseTensor, v: &DenseTensor, w: &DenseTensor) -> Result<DenseTensor> {
    let d = a.shape()[0];
    let vd = v.adjoint()?;
    let parts: Result<Vec<_>> = (0..d).map(|s| vd.matmul(&a.slice_first(s))?.matmul(w)).collect();
    DenseTensor::stack(&parts?)
}

fn columns(m: &DenseTensor, cols: &[usize]) -> DenseTensor {
    let r = m.shape()[0];
    DenseTensor::from_fn(&[r, cols.len()], |i| m.get(&[i[0], cols[i[1]]]))
}

struct RawBlock {
    scale: f64,
    tensor: DenseTensor,
    fixed_point: DenseTensor,
}

/// Splits `a` along an invariant subspace spanned by `inv` (columns), with
/// `rest` its orthogonal complement, and recurses on both diagonal blocks.
fn split_invariant(a: &DenseTensor, inv: &DenseTensor, rest: &DenseTensor, scale: f64, out: &mut Vec<RawBlock>, depth: usize) -> Result<()> {
    let leak = sandwich(a, rest, inv)?;
    let size = a.norm().max(1.0);
    if leak.max_abs() > CLUSTER_TOL.sqrt() * size {
        return Err(TnsError::Degeneracy(format!(
            "invariant subspace is not numerically invariant (leakage {:.3e})",
            leak.max_abs()
        )));
    }
    decompose(&sandwich(a, inv, inv)?, scale, out, depth + 1)?;
    decompose(&sandwich(a, rest, rest)?, scale, out, depth + 1)
}

fn decompose(a: &DenseTensor, scale: f64, out: &mut Vec<RawBlock>, depth: usize) -> Result<()> {
    let (_, m) = check_square_site(a)?;
    if depth > 4 * m + 8 {
        return Err(TnsError::Degeneracy("block recursion did not terminate".into()));
    }
    let e = transfer_matrix(a)?;
    let rho = eigenvalues(&e)?[0].norm();
    let nilpotent_scale = 1e-10 * e.norm().max(1e-300);
    if rho <= nilpotent_scale {
        return Ok(());
    }
    let at = a.scale_real(1.0 / rho.sqrt());
    let block_scale = scale * rho.sqrt();

    let right = fixed_space(&channel_matrix(&at)?, m, CLUSTER_TOL)?;
    match right.len() {
        0 if rho < 1e-6 * e.norm() => return Ok(()),
        0 => {
            return Err(TnsError::Degeneracy(
                "no fixed point found on the spectral circle".into(),
            ))
        }
        1 => {}
        k => {
            return Err(TnsError::Degeneracy(format!(
                "fixed space of dimension {}: equal-weight blocks cannot be split uniquely",
                k
            )))
        }
    }
    let r = positive_phase(&right[0])?;
    let (vals, vecs) = hermitian_eigen(&r)?;
    let top = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let support: Vec<usize> = (0..m).filter(|&k| vals[k] > CLUSTER_TOL * top).collect();
    if support.len() < m {
        let kernel: Vec<usize> = (0..m).filter(|&k| vals[k] <= CLUSTER_TOL * top).collect();
        return split_invariant(&at, &columns(&vecs, &support), &columns(&vecs, &kernel), scale, out, depth);
    }

    // Unital gauge: B = R^{-1/2} A R^{1/2}.
    let rs = hermitian_fn(&r, |x| x.max(0.0).sqrt())?;
    let rsi = inverse_checked(&rs, 1e12)?;
    let b = sandwich(&at, &rsi.adjoint()?, &rs)?;

    let left = fixed_space(&adjoint_channel_matrix(&b)?, m, CLUSTER_TOL)?;
    if left.len() != 1 {
        return Err(TnsError::Degeneracy(format!(
            "dual fixed space of dimension {}",
            left.len()
        )));
    }
    let lam = positive_phase(&left[0])?;
    let (lvals, lvecs) = hermitian_eigen(&lam)?;
    let ltop = lvals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let kernel: Vec<usize> = (0..m).filter(|&k| lvals[k] <= CLUSTER_TOL * ltop).collect();
    if !kernel.is_empty() {
        let support: Vec<usize> = (0..m).filter(|&k| lvals[k] > CLUSTER_TOL * ltop).collect();
        // The kernel of the dual fixed point is invariant.
        return split_invariant(&b, &columns(&lvecs, &kernel), &columns(&lvecs, &support), scale, out, depth);
    }

    let tensor = sandwich(&b, &lvecs, &lvecs)?;
    let tr: f64 = lvals.iter().sum();
    let fixed_point = DenseTensor::from_fn(&[m, m], |i| {
        if i[0] == i[1] {
            C64::new(lvals[i[0]] / tr, 0.0)
        } else {
            ZERO
        }
    });
    out.push(RawBlock {
        scale: block_scale,
        tensor,
        fixed_point,
    });
    Ok(())
}

/// Block canonical form `A ~ (+)_j alpha_j A_j` of a translation-invariant
/// tensor: isometric blocks with positive diagonal dual fixed points.
pub fn ti_canonical_blocks(a: &DenseTensor) -> Result<CanonicalBlocks> {
    check_square_site(a)?;
    let mut raw = Vec::new();
    decompose(a, 1.0, &mut raw, 0)?;
    if raw.is_empty() {
        return Err(TnsError::Degeneracy(
            "transfer matrix is nilpotent: the state vanishes for every N".into(),
        ));
    }
    let scale = raw.iter().map(|b| b.scale).fold(0.0, f64::max);
    raw.sort_by(|x, y| y.scale.total_cmp(&x.scale));
    let blocks: Vec<CanonicalBlock> = raw
        .into_iter()
        .map(|b| CanonicalBlock {
            alpha: b.scale / scale,
            tensor: b.tensor,
            fixed_point: b.fixed_point,
        })
        .collect();
    for (j, b) in blocks.iter().enumerate() {
        let iso = right_isometry_residual(&b.tensor)?;
        let fp = adjoint_apply(&b.tensor, &b.fixed_point)?.max_abs_diff(&b.fixed_point);
        if iso > CLUSTER_TOL || fp > CLUSTER_TOL {
            return Err(TnsError::Invariant(format!(
                "block {} residuals: isometry {:.3e}, fixed point {:.3e}",
                j, iso, fp
            )));
        }
    }
    Ok(CanonicalBlocks { blocks, scale })
}

/// `sum_s A^s† X A^s`.
pub fn adjoint_apply(a: &DenseTensor, x: &DenseTensor) -> Result<DenseTensor> {
    let (d, m) = check_square_site(a)?;
    let mut out = DenseTensor::zeros(&[m, m]);
    for s in 0..d {
        let asig = a.slice_first(s);
        out = out.add(&asig.adjoint()?.matmul(x)?.matmul(&asig)?)?;
    }
    Ok(out)
}

/// Gauge transform on bond `bond` in `1..=N`; bond `N` joins site `N` to
/// site 1.
pub fn gauge_transform(mps: &MpsPbc, bond: usize, z: &DenseTensor) -> Result<MpsPbc> {
    let n = mps.len();
    if bond < 1 || bond > n {
        return Err(TnsError::Argument(format!("bond {} outside 1..={}", bond, n)));
    }
    let m = mps.bond_dim();
    let (r, c) = z.dims2()?;
    if r != m || c != m {
        return Err(TnsError::Dimension(format!(
            "gauge matrix is {}x{} but bond dimension is {}",
            r, c, m
        )));
    }
    let zinv = inverse_checked(z, MAX_CONDITION)?;
    let mut t = mps.tensors.clone();
    let (i, j) = (bond - 1, bond % n);
    t[i] = contract(&t[i], z, &[(2, 0)])?;
    t[j] = contract(&zinv, &t[j], &[(1, 1)])?.permute(&[1, 0, 2])?;
    let ti = t.iter().all(|x| x == &t[0]) && mps.translation_invariant;
    MpsPbc::new(t, ti)
}

/// Random `(d, m, m)` tensor with `sum_s A^s A^s† = 1`.
pub fn random_isometric_tensor<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Result<DenseTensor> {
    random_isometry_rows(m, d * m, rng)?
        .into_reshaped(&[m, d, m])?
        .permute(&[1, 0, 2])
}

/// Block-diagonal direct sum of `(d, m_j, m_j)` tensors with weights.
pub fn direct_sum(parts: &[(f64, DenseTensor)]) -> Result<DenseTensor> {
    let blocks = CanonicalBlocks {
        blocks: parts
            .iter()
            .map(|(alpha, t)| CanonicalBlock {
                alpha: *alpha,
                tensor: t.clone(),
                fixed_point: DenseTensor::identity(t.shape()[1]),
            })
            .collect(),
        scale: 1.0,
    };
    blocks.assemble()
}

pub(crate) fn unit_tensor(shape: &[usize], flat: usize) -> DenseTensor {
    let n: usize = shape.iter().product();
    let mut data = vec![ZERO; n];
    data[flat] = ONE;
    DenseTensor::from_parts(shape.to_vec(), data)
}
