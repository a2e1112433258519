// SPDX-License-Identifier: Apache-2.0

//! Dense complex tensors in row-major order.
//!
//! A [`DenseTensor`] is the universal value of the crate: state vectors,
//! network tensors, operators and Hamiltonians are all stored this way. All
//! operations are pure and return new tensors.
//!
//! The JSON form is `{"shape":[...],"data":[[re,im],...]}`; doubles round-trip
//! exactly.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TnsError};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorJson", into = "TensorJson")]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    shape: Vec<usize>,
    data: Vec<[f64; 2]>,
}

impl TryFrom<TensorJson> for DenseTensor {
    type Error = TnsError;

    fn try_from(value: TensorJson) -> Result<Self> {
        let data = value.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        DenseTensor::new(value.shape, data)
    }
}

impl From<DenseTensor> for TensorJson {
    fn from(t: DenseTensor) -> Self {
        TensorJson {
            shape: t.shape,
            data: t.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl fmt::Debug for DenseTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseTensor{:?}", self.shape)?;
        if self.data.len() <= 16 {
            write!(f, " {:?}", self.data)?;
        }
        Ok(())
    }
}

fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

impl DenseTensor {
    /// Builds a tensor, checking that `data` matches `shape` and is finite.
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(TnsError::Dimension(format!(
                "shape {:?} needs {} entries, got {}",
                shape,
                expected,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TnsError::NonFinite(pos));
        }
        Ok(DenseTensor { shape, data })
    }

    // Internal constructor for data produced by our own arithmetic on finite
    // inputs.
    pub(crate) fn from_parts(shape: Vec<usize>, data: Vec<C64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        DenseTensor { shape, data }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        DenseTensor::from_parts(shape.to_vec(), vec![ZERO; n])
    }

    pub fn scalar(value: C64) -> Self {
        DenseTensor::from_parts(vec![], vec![value])
    }

    pub fn from_real(shape: &[usize], data: &[f64]) -> Result<Self> {
        DenseTensor::new(shape.to_vec(), data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Fills a tensor from a function of the multi-index.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let n: usize = shape.iter().product();
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..n {
            data.push(f(&idx));
            for k in (0..shape.len()).rev() {
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        DenseTensor::from_parts(shape.to_vec(), data)
    }

    pub fn identity(n: usize) -> Self {
        DenseTensor::from_fn(&[n, n], |i| if i[0] == i[1] { ONE } else { ZERO })
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        DenseTensor::new(vec![rows, cols], data)
    }

    /// Standard basis vector of length `n`.
    pub fn basis_vector(n: usize, k: usize) -> Self {
        let mut data = vec![ZERO; n];
        data[k] = ONE;
        DenseTensor::from_parts(vec![n], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of axes.
    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.shape)
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut off = 0;
        for (k, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.shape[k]);
            off = off * self.shape[k] + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    /// Rows and columns when the tensor is a matrix.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape.as_slice() {
            &[r, c] => Ok((r, c)),
            _ => Err(TnsError::Dimension(format!(
                "expected a matrix, got shape {:?}",
                self.shape
            ))),
        }
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Self> {
        if shape.iter().product::<usize>() != self.data.len() {
            return Err(TnsError::Dimension(format!(
                "cannot reshape {:?} into {:?}",
                self.shape, shape
            )));
        }
        Ok(DenseTensor::from_parts(shape.to_vec(), self.data.clone()))
    }

    pub fn into_reshaped(self, shape: &[usize]) -> Result<Self> {
        if shape.iter().product::<usize>() != self.data.len() {
            return Err(TnsError::Dimension(format!(
                "cannot reshape {:?} into {:?}",
                self.shape, shape
            )));
        }
        Ok(DenseTensor::from_parts(shape.to_vec(), self.data))
    }

    /// Reorders axes: output axis `k` is input axis `axes[k]`.
    pub fn permute(&self, axes: &[usize]) -> Result<Self> {
        let n = self.shape.len();
        let mut seen = vec![false; n];
        if axes.len() != n || axes.iter().any(|&a| a >= n || std::mem::replace(&mut seen[a], true)) {
            return Err(TnsError::Dimension(format!(
                "{:?} is not a permutation of {} axes",
                axes, n
            )));
        }
        if axes.iter().enumerate().all(|(k, &a)| k == a) {
            return Ok(self.clone());
        }
        let in_strides = self.strides();
        let out_shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let strides: Vec<usize> = axes.iter().map(|&a| in_strides[a]).collect();
        let total = self.data.len();
        let mut data = Vec::with_capacity(total);
        let mut idx = vec![0usize; n];
        let mut off = 0usize;
        for _ in 0..total {
            data.push(self.data[off]);
            for k in (0..n).rev() {
                idx[k] += 1;
                off += strides[k];
                if idx[k] < out_shape[k] {
                    break;
                }
                off -= strides[k] * out_shape[k];
                idx[k] = 0;
            }
        }
        Ok(DenseTensor::from_parts(out_shape, data))
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        DenseTensor::from_parts(self.shape.clone(), self.data.iter().map(|&z| f(z)).collect())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|z| z * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map(|z| z * c)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(TnsError::Dimension(format!(
                "shapes {:?} and {:?} differ",
                self.shape, other.shape
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(DenseTensor::from_parts(self.shape.clone(), data))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape != other.shape {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `<self|other>` with the first argument conjugated.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.data.len() != other.data.len() {
            return Err(TnsError::Dimension(format!(
                "inner product of {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(TnsError::Normalization("zero state cannot be normalized".into()));
        }
        Ok(self.scale_real(1.0 / n))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let (r, k) = self.dims2()?;
        let (k2, c) = other.dims2()?;
        if k != k2 {
            return Err(TnsError::Dimension(format!(
                "matmul {}x{} by {}x{}",
                r, k, k2, c
            )));
        }
        Ok(DenseTensor::from_parts(vec![r, c], gemm(&self.data, &other.data, r, k, c)))
    }

    /// Conjugate transpose of a matrix.
    pub fn adjoint(&self) -> Result<Self> {
        let (r, c) = self.dims2()?;
        Ok(DenseTensor::from_fn(&[c, r], |i| self.data[i[1] * c + i[0]].conj()))
    }

    pub fn transpose(&self) -> Result<Self> {
        self.dims2()?;
        self.permute(&[1, 0])
    }

    /// Kronecker product of two matrices, row index `(i, j) -> i * rows_b + j`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let (ra, ca) = self.dims2()?;
        let (rb, cb) = other.dims2()?;
        Ok(DenseTensor::from_fn(&[ra * rb, ca * cb], |i| {
            let (ia, ib) = (i[0] / rb, i[0] % rb);
            let (ja, jb) = (i[1] / cb, i[1] % cb);
            self.data[ia * ca + ja] * other.data[ib * cb + jb]
        }))
    }

    pub fn trace(&self) -> Result<C64> {
        let (r, c) = self.dims2()?;
        if r != c {
            return Err(TnsError::Dimension(format!("trace of {}x{} matrix", r, c)));
        }
        Ok((0..r).map(|i| self.data[i * c + i]).sum())
    }

    /// Slice `t[k, ..]` along the first axis as a tensor of the remaining shape.
    pub fn slice_first(&self, k: usize) -> Self {
        let inner: usize = self.shape[1..].iter().product();
        DenseTensor::from_parts(
            self.shape[1..].to_vec(),
            self.data[k * inner..(k + 1) * inner].to_vec(),
        )
    }

    /// Stacks equally shaped tensors along a new leading axis.
    pub fn stack(parts: &[DenseTensor]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| TnsError::Argument("cannot stack zero tensors".into()))?;
        let mut shape = vec![parts.len()];
        shape.extend_from_slice(&first.shape);
        let mut data = Vec::with_capacity(parts.len() * first.len());
        for p in parts {
            if p.shape != first.shape {
                return Err(TnsError::Dimension("stacked tensors differ in shape".into()));
            }
            data.extend_from_slice(&p.data);
        }
        Ok(DenseTensor::from_parts(shape, data))
    }

    pub fn to_matrix(&self) -> Result<DMatrix<C64>> {
        let (r, c) = self.dims2()?;
        Ok(DMatrix::from_row_slice(r, c, &self.data))
    }

    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        let (r, c) = m.shape();
        DenseTensor::from_fn(&[r, c], |i| m[(i[0], i[1])])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Row-major `r x k` times `k x c`.
pub(crate) fn gemm(a: &[C64], b: &[C64], r: usize, k: usize, c: usize) -> Vec<C64> {
    let mut out = vec![ZERO; r * c];
    for i in 0..r {
        let row = &mut out[i * c..(i + 1) * c];
        for l in 0..k {
            let x = a[i * k + l];
            if x == ZERO {
                continue;
            }
            let brow = &b[l * c..(l + 1) * c];
            for (o, &y) in row.iter_mut().zip(brow) {
                *o += x * y;
            }
        }
    }
    out
}

/// Contracts `a` with `b` over the listed `(axis_of_a, axis_of_b)` pairs.
///
/// The result carries the unpaired axes of `a` followed by the unpaired axes
/// of `b`, each in their original order.
pub fn contract(a: &DenseTensor, b: &DenseTensor, axis_pairs: &[(usize, usize)]) -> Result<DenseTensor> {
    let mut used_a = vec![false; a.order()];
    let mut used_b = vec![false; b.order()];
    for &(i, j) in axis_pairs {
        if i >= a.order() || j >= b.order() {
            return Err(TnsError::Dimension(format!(
                "axis pair ({}, {}) out of range for orders {} and {}",
                i,
                j,
                a.order(),
                b.order()
            )));
        }
        if used_a[i] || used_b[j] {
            return Err(TnsError::Dimension(format!("axis pair ({}, {}) repeats an axis", i, j)));
        }
        if a.shape[i] != b.shape[j] {
            return Err(TnsError::Dimension(format!(
                "paired axes ({}, {}) have extents {} and {}",
                i, j, a.shape[i], b.shape[j]
            )));
        }
        used_a[i] = true;
        used_b[j] = true;
    }
    let free_a: Vec<usize> = (0..a.order()).filter(|&i| !used_a[i]).collect();
    let free_b: Vec<usize> = (0..b.order()).filter(|&j| !used_b[j]).collect();

    let mut perm_a = free_a.clone();
    perm_a.extend(axis_pairs.iter().map(|p| p.0));
    let mut perm_b: Vec<usize> = axis_pairs.iter().map(|p| p.1).collect();
    perm_b.extend(&free_b);

    let rows: usize = free_a.iter().map(|&i| a.shape[i]).product();
    let inner: usize = axis_pairs.iter().map(|p| a.shape[p.0]).product();
    let cols: usize = free_b.iter().map(|&j| b.shape[j]).product();

    let pa = a.permute(&perm_a)?;
    let pb = b.permute(&perm_b)?;
    let mut shape: Vec<usize> = free_a.iter().map(|&i| a.shape[i]).collect();
    shape.extend(free_b.iter().map(|&j| b.shape[j]));
    Ok(DenseTensor::from_parts(shape, gemm(&pa.data, &pb.data, rows, inner, cols)))
}

/// Squared normalized overlap `|<a|b>|^2 / (|a|^2 |b|^2)`.
pub fn fidelity(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if na == 0.0 || nb == 0.0 {
        return Err(TnsError::Normalization("fidelity with a zero state".into()));
    }
    Ok(a.inner(b)?.norm_sqr() / (na * nb))
}

/// Reduced density matrix `Tr_rest |psi><psi|` on the listed sites, in the
/// order given, normalized to unit trace.
pub fn reduced_density_matrix(psi: &DenseTensor, dims: &[usize], sites: &[usize]) -> Result<DenseTensor> {
    if dims.iter().product::<usize>() != psi.len() {
        return Err(TnsError::Dimension(format!(
            "site dims {:?} do not match {} amplitudes",
            dims,
            psi.len()
        )));
    }
    let mut keep = vec![false; dims.len()];
    for &s in sites {
        if s >= dims.len() || keep[s] {
            return Err(TnsError::Argument(format!("invalid site list {:?}", sites)));
        }
        keep[s] = true;
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|&s| !keep[s]).collect();
    let mut perm = sites.to_vec();
    perm.extend(&rest);
    let a: usize = sites.iter().map(|&s| dims[s]).product();
    let b: usize = rest.iter().map(|&s| dims[s]).product();
    let m = psi.reshape(dims)?.permute(&perm)?.into_reshaped(&[a, b])?;
    let rho = m.matmul(&m.adjoint()?)?;
    let tr = rho.trace()?.re;
    if tr <= 0.0 {
        return Err(TnsError::Normalization("zero state has no density matrix".into()));
    }
    Ok(rho.scale_real(1.0 / tr))
}
