// SPDX-License-Identifier: Apache-2.0

//! Binary MERA on a periodic chain of `L = 2^T` sites.
//!
//! Layer `l` (0-based, counted upward from the physical sites) sees `L / 2^l`
//! sites. Its disentanglers act on site pairs `(2k+1, 2k+2 mod n)` and are
//! stored as unitary `in^2 x in^2` matrices; its isometries merge pairs
//! `(2k, 2k+1)` and are stored as `m x in^2` matrices `W` with `W W† = 1`.
//! The top tensor is a `1 x m` row of unit norm. The state is obtained by
//! applying the adjoints from the top down.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TnsError};
use crate::limits::{check_intermediate, check_state, product};
use crate::linalg::{identity_residual, random_isometry_rows};
use crate::tensor::{contract, reduced_density_matrix, DenseTensor, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeraLayer {
    pub disentanglers: Vec<DenseTensor>,
    pub isometries: Vec<DenseTensor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMera")]
pub struct Mera {
    #[serde(rename = "L")]
    l: usize,
    m: usize,
    d: usize,
    layers: Vec<MeraLayer>,
    top: DenseTensor,
}

#[derive(Deserialize)]
struct RawMera {
    #[serde(rename = "L")]
    l: usize,
    m: usize,
    d: usize,
    layers: Vec<MeraLayer>,
    top: DenseTensor,
}

impl TryFrom<RawMera> for Mera {
    type Error = TnsError;
    fn try_from(raw: RawMera) -> Result<Self> {
        Mera::new(raw.l, raw.m, raw.d, raw.layers, raw.top)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TensorId {
    Disentangler { layer: usize, index: usize },
    Isometry { layer: usize, index: usize },
    Top,
}

impl Mera {
    /// Checks layer counts and tensor shapes; isometry constraints are
    /// checked separately by [`validate_isometries`].
    pub fn new(l: usize, m: usize, d: usize, layers: Vec<MeraLayer>, top: DenseTensor) -> Result<Self> {
        if l < 2 || !l.is_power_of_two() {
            return Err(TnsError::Argument(format!("system size {} is not a power of two", l)));
        }
        if m == 0 || d == 0 {
            return Err(TnsError::Argument("dimensions must be positive".into()));
        }
        let t = l.trailing_zeros() as usize;
        if layers.len() != t {
            return Err(TnsError::Dimension(format!("{} sites need {} layers, got {}", l, t, layers.len())));
        }
        for (k, layer) in layers.iter().enumerate() {
            let n = l >> k;
            let inp = if k == 0 { d } else { m };
            if layer.disentanglers.len() != n / 2 || layer.isometries.len() != n / 2 {
                return Err(TnsError::Dimension(format!("layer {} needs {} tensors of each kind", k, n / 2)));
            }
            if let Some(u) = layer.disentanglers.iter().find(|u| u.shape() != [inp * inp, inp * inp]) {
                return Err(TnsError::Dimension(format!("layer {} disentangler has shape {:?}", k, u.shape())));
            }
            if let Some(w) = layer.isometries.iter().find(|w| w.shape() != [m, inp * inp]) {
                return Err(TnsError::Dimension(format!("layer {} isometry has shape {:?}", k, w.shape())));
            }
        }
        if top.shape() != [1, m] {
            return Err(TnsError::Dimension(format!("top tensor has shape {:?}", top.shape())));
        }
        Ok(Mera { l, m, d, layers, top })
    }

    pub fn system_size(&self) -> usize {
        self.l
    }

    pub fn bond_dim(&self) -> usize {
        self.m
    }

    pub fn phys_dim(&self) -> usize {
        self.d
    }

    pub fn layers(&self) -> &[MeraLayer] {
        &self.layers
    }

    pub fn top(&self) -> &DenseTensor {
        &self.top
    }

    pub fn tensor(&self, id: TensorId) -> Option<&DenseTensor> {
        match id {
            TensorId::Top => Some(&self.top),
            TensorId::Disentangler { layer, index } => self.layers.get(layer)?.disentanglers.get(index),
            TensorId::Isometry { layer, index } => self.layers.get(layer)?.isometries.get(index),
        }
    }

    pub fn tensor_ids(&self) -> Vec<TensorId> {
        let mut ids = Vec::new();
        for (layer, l) in self.layers.iter().enumerate() {
            ids.extend((0..l.disentanglers.len()).map(|index| TensorId::Disentangler { layer, index }));
            ids.extend((0..l.isometries.len()).map(|index| TensorId::Isometry { layer, index }));
        }
        ids.push(TensorId::Top);
        ids
    }

    /// Copy with one tensor replaced by another of the same shape.
    pub fn with_tensor(&self, id: TensorId, t: DenseTensor) -> Result<Self> {
        let old = self
            .tensor(id)
            .ok_or_else(|| TnsError::Argument(format!("no tensor {:?}", id)))?;
        if old.shape() != t.shape() {
            return Err(TnsError::Dimension(format!("replacement for {:?} has shape {:?}", id, t.shape())));
        }
        let mut out = self.clone();
        match id {
            TensorId::Top => out.top = t,
            TensorId::Disentangler { layer, index } => out.layers[layer].disentanglers[index] = t,
            TensorId::Isometry { layer, index } => out.layers[layer].isometries[index] = t,
        }
        Ok(out)
    }
}

fn random_tensor_for(id: TensorId, m: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<DenseTensor> {
    let inp = |layer: usize| if layer == 0 { d } else { m };
    match id {
        TensorId::Top => random_isometry_rows(1, m, rng),
        TensorId::Disentangler { layer, .. } => {
            let n = inp(layer) * inp(layer);
            random_isometry_rows(n, n, rng)
        }
        TensorId::Isometry { layer, .. } => random_isometry_rows(m, inp(layer) * inp(layer), rng),
    }
}

/// Haar-like random MERA, deterministic in `seed`.
pub fn random_mera(l: usize, m: usize, d: usize, seed: u64) -> Result<Mera> {
    if ![4, 8, 16].contains(&l) {
        return Err(TnsError::Argument(format!("system size must be 4, 8 or 16, got {}", l)));
    }
    if m == 0 || d == 0 || m > d * d {
        return Err(TnsError::Argument(format!("need 1 <= m <= d^2, got m = {}, d = {}", m, d)));
    }
    let big = d.max(m);
    check_intermediate("MERA tensor", product(&[big, big, big, big]))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = l.trailing_zeros() as usize;
    let mut layers = Vec::with_capacity(t);
    for layer in 0..t {
        let n = (l >> layer) / 2;
        let disentanglers = (0..n)
            .map(|index| random_tensor_for(TensorId::Disentangler { layer, index }, m, d, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let isometries = (0..n)
            .map(|index| random_tensor_for(TensorId::Isometry { layer, index }, m, d, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        layers.push(MeraLayer { disentanglers, isometries });
    }
    let top = random_tensor_for(TensorId::Top, m, d, &mut rng)?;
    Mera::new(l, m, d, layers, top)
}

/// Fresh random isometric tensor with the shape expected at `id`.
pub fn random_tensor_like(mera: &Mera, id: TensorId, seed: u64) -> Result<DenseTensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tensor_for(id, mera.m, mera.d, &mut rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometryReport {
    pub residuals: Vec<(TensorId, f64)>,
    pub tolerance: f64,
    pub pass: bool,
}

impl IsometryReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

/// `‖W W† − 1‖_max` for every tensor.
pub fn validate_isometries(mera: &Mera, tol: f64) -> Result<IsometryReport> {
    let mut residuals = Vec::new();
    for id in mera.tensor_ids() {
        let w = mera.tensor(id).ok_or_else(|| TnsError::Invariant("missing tensor".into()))?;
        residuals.push((id, identity_residual(&w.matmul(&w.adjoint()?)?)?));
    }
    let pass = residuals.iter().all(|r| r.1 <= tol);
    Ok(IsometryReport {
        residuals,
        tolerance: tol,
        pass,
    })
}

/// Replaces axis `k` of `psi` (extent `m`) by two axes using `W†`.
fn expand_site(psi: &DenseTensor, w: &DenseTensor, k: usize, inp: usize) -> Result<DenseTensor> {
    let m = w.shape()[0];
    let wd = w.adjoint()?.into_reshaped(&[inp, inp, m])?;
    let r = contract(&wd, psi, &[(2, k)])?;
    // Axes now: (a, b, rest...); move (a, b) to positions k, k+1.
    let n = r.order();
    let mut perm: Vec<usize> = (2..n).collect();
    perm.splice(k..k, [0, 1]);
    r.permute(&perm)
}

/// Applies `U†` to sites `(i, j)`.
fn apply_pair(psi: &DenseTensor, u: &DenseTensor, i: usize, j: usize, inp: usize) -> Result<DenseTensor> {
    let ud = u.adjoint()?.into_reshaped(&[inp, inp, inp, inp])?;
    let r = contract(&ud, psi, &[(2, i), (3, j)])?;
    // Axes: (out_i, out_j, rest...) with the rest in original order.
    let n = psi.order();
    let mut position = Vec::with_capacity(n);
    let mut rest = 2;
    for s in 0..n {
        if s == i {
            position.push(0);
        } else if s == j {
            position.push(1);
        } else {
            position.push(rest);
            rest += 1;
        }
    }
    r.permute(&position)
}

/// Amplitudes on `L` sites, shape `(d, ..., d)`.
pub fn eval_mera(mera: &Mera) -> Result<DenseTensor> {
    check_state("MERA state", &vec![mera.d; mera.l])?;
    let mut psi = DenseTensor::new(vec![mera.m], mera.top.conj().into_data())?;
    for layer in (0..mera.layers.len()).rev() {
        let inp = if layer == 0 { mera.d } else { mera.m };
        let n = mera.l >> layer;
        for (k, w) in mera.layers[layer].isometries.iter().enumerate().rev() {
            psi = expand_site(&psi, w, k, inp)?;
        }
        for (k, u) in mera.layers[layer].disentanglers.iter().enumerate() {
            psi = apply_pair(&psi, u, 2 * k + 1, (2 * k + 2) % n, inp)?;
        }
    }
    Ok(psi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CausalCone {
    pub tensors: BTreeSet<TensorId>,
    /// Number of sites in the cone above each layer's isometries.
    pub cross_sections: Vec<usize>,
}

/// Tensors on which the reduced density matrix of `sites` can depend:
/// disentanglers touching the current site set, then isometries touching
/// the widened set, layer by layer, plus the top.
pub fn causal_cone(mera: &Mera, sites: &[usize]) -> Result<CausalCone> {
    if sites.is_empty() {
        return Err(TnsError::Argument("causal cone of an empty site set".into()));
    }
    if let Some(&s) = sites.iter().find(|&&s| s >= mera.l) {
        return Err(TnsError::Argument(format!("site {} out of range", s)));
    }
    let mut current: BTreeSet<usize> = sites.iter().copied().collect();
    let mut tensors = BTreeSet::new();
    let mut cross_sections = Vec::new();
    for layer in 0..mera.layers.len() {
        let n = mera.l >> layer;
        let mut widened = current.clone();
        for k in 0..n / 2 {
            let (a, b) = (2 * k + 1, (2 * k + 2) % n);
            if current.contains(&a) || current.contains(&b) {
                tensors.insert(TensorId::Disentangler { layer, index: k });
                widened.insert(a);
                widened.insert(b);
            }
        }
        let mut next = BTreeSet::new();
        for k in 0..n / 2 {
            if widened.contains(&(2 * k)) || widened.contains(&(2 * k + 1)) {
                tensors.insert(TensorId::Isometry { layer, index: k });
                next.insert(k);
            }
        }
        cross_sections.push(next.len());
        current = next;
    }
    tensors.insert(TensorId::Top);
    Ok(CausalCone {
        tensors,
        cross_sections,
    })
}

/// Trace-normalized density matrix of `sites`.
pub fn mera_rho(mera: &Mera, sites: &[usize]) -> Result<DenseTensor> {
    let psi = eval_mera(mera)?;
    reduced_density_matrix(&psi, &vec![mera.d; mera.l], sites)
}

/// MERA whose state is `|0...0>`: bond dimension 1 and basis-embedding
/// isometries.
pub fn product_mera(l: usize, d: usize) -> Result<Mera> {
    if l < 2 || !l.is_power_of_two() {
        return Err(TnsError::Argument(format!("system size {} is not a power of two", l)));
    }
    let t = l.trailing_zeros() as usize;
    let layers = (0..t)
        .map(|layer| {
            let n = (l >> layer) / 2;
            let inp = if layer == 0 { d } else { 1 };
            let mut w = DenseTensor::zeros(&[1, inp * inp]).into_data();
            w[0] = C64::new(1.0, 0.0);
            Ok(MeraLayer {
                disentanglers: vec![DenseTensor::identity(inp * inp); n],
                isometries: vec![DenseTensor::new(vec![1, inp * inp], w)?; n],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Mera::new(l, 1, d, layers, DenseTensor::identity(1))
}
