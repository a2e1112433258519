// SPDX-License-Identifier: Apache-2.0

//! Concrete states, tensor families and Hamiltonians: the W family, the
//! two-domain family and its fine-grained decomposition, the AKLT tensor and
//! the bilinear-biquadratic spin-1 chain.
//!
//! Basis label `|1>` is index 0 and `|2>` is index 1.

use std::f64::consts::PI;

use crate::error::{Result, TnsError};
use crate::limits::{check_intermediate, check_state, product};
use crate::mps_obc::MpsObc;
use crate::mps_pbc::{chain_product, MpsPbc};
use crate::tensor::{DenseTensor, C64, ONE, ZERO};

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(TnsError::Argument(format!("eps must be positive and finite, got {}", eps)))
    }
}

/// Number of sites in state `|1>` counted via the digit 1 in base `d`.
fn excitations(mut flat: usize, n: usize, d: usize) -> (usize, bool) {
    let mut count = 0;
    let mut only_01 = true;
    for _ in 0..n {
        match flat % d {
            0 => {}
            1 => count += 1,
            _ => only_01 = false,
        }
        flat /= d;
    }
    (count, only_01)
}

/// Normalized W state on `n` sites of dimension `d`.
pub fn w_state(n: usize, d: usize) -> Result<DenseTensor> {
    if n < 2 || d < 2 {
        return Err(TnsError::Argument("W state needs N >= 2 and d >= 2".into()));
    }
    let dims = vec![d; n];
    let total = check_state("W state", &dims)?;
    let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    let data = (0..total)
        .map(|s| match excitations(s, n, d) {
            (1, true) => amp,
            _ => ZERO,
        })
        .collect();
    DenseTensor::new(dims, data)
}

/// `sqrt((1 + eps^2)^N - 1)`, evaluated without cancellation.
pub fn psi_w_norm(n: usize, eps: f64) -> f64 {
    ((n as f64) * (eps * eps).ln_1p()).exp_m1().sqrt()
}

/// `(phi^{⊗N} - 1^{⊗N}) / norm` with `phi = |1> + eps |2>`.
pub fn psi_w(n: usize, eps: f64) -> Result<DenseTensor> {
    check_eps(eps)?;
    if n < 2 {
        return Err(TnsError::Argument("psi_W needs N >= 2".into()));
    }
    let dims = vec![2; n];
    let total = check_state("psi_W", &dims)?;
    let norm = psi_w_norm(n, eps);
    let data = (0..total)
        .map(|s| {
            let (k, _) = excitations(s, n, 2);
            if k == 0 {
                ZERO
            } else {
                C64::new(eps.powi(k as i32) / norm, 0.0)
            }
        })
        .collect();
    DenseTensor::new(dims, data)
}

/// Closed form of `|<W|psi_W(eps)>|`.
pub fn psi_w_overlap(n: usize, eps: f64) -> f64 {
    (n as f64).sqrt() * eps / psi_w_norm(n, eps)
}

/// Translation-invariant tensor `(2, 2, 2)` whose periodic chain of length
/// `n` is `psi_w(n, eps)`.
pub fn psi_w_timps_tensor(n: usize, eps: f64) -> Result<DenseTensor> {
    check_eps(eps)?;
    if n < 2 {
        return Err(TnsError::Argument("psi_W needs N >= 2".into()));
    }
    let c = psi_w_norm(n, eps).powf(-1.0 / n as f64);
    let phase = C64::from_polar(c, PI / n as f64);
    let data = [
        C64::new(c, 0.0),
        ZERO,
        ZERO,
        phase,
        C64::new(c * eps, 0.0),
        ZERO,
        ZERO,
        ZERO,
    ];
    DenseTensor::new(vec![2, 2, 2], data.to_vec())
}

/// Largest Euclidean norm among the physical vectors `A[:, i, j]`.
pub fn max_element_norm(a: &DenseTensor) -> f64 {
    let (d, rows, cols) = (a.shape()[0], a.shape()[1], a.shape()[2]);
    let mut best: f64 = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let s: f64 = (0..d).map(|s| a.get(&[s, i, j]).norm_sqr()).sum();
            best = best.max(s.sqrt());
        }
    }
    best
}

/// Closed form of [`max_element_norm`] for [`psi_w_timps_tensor`].
pub fn psi_w_max_element(n: usize, eps: f64) -> f64 {
    (1.0 + eps * eps).sqrt() * psi_w_norm(n, eps).powf(-1.0 / n as f64)
}

/// Bond-dimension-2 open chain for the W state.
pub fn w_obc_mps(n: usize) -> Result<MpsObc> {
    if n < 2 {
        return Err(TnsError::Argument("W state needs N >= 2".into()));
    }
    let r = 1.0 / (n as f64).sqrt();
    // Bond value 0 means the excitation was already placed.
    let first = DenseTensor::from_real(&[2, 1, 2], &[0.0, r, r, 0.0])?;
    let bulk = DenseTensor::from_real(&[2, 2, 2], &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0])?;
    let last = DenseTensor::from_real(&[2, 2, 1], &[1.0, 0.0, 0.0, 1.0])?;
    let mut tensors = vec![first];
    tensors.extend(std::iter::repeat_n(bulk, n - 2));
    tensors.push(last);
    MpsObc::new(tensors)
}

/// Site tensor `A[(a,b), a, b] = w(a == b)` of dimension `(m^2, m, m)`.
fn pair_site(m: usize, diag: f64, off: f64) -> DenseTensor {
    DenseTensor::from_fn(&[m * m, m, m], |i| {
        let (a, b) = (i[0] / m, i[0] % m);
        if a == i[1] && b == i[2] {
            C64::new(if a == b { diag } else { off }, 0.0)
        } else {
            ZERO
        }
    })
}

/// Periodic chain `(A^{⊗N-1} ⊗ B)|mu>` with `A = P_d + eps P_o` and
/// `B = P_d + P_o / eps`.
pub fn psi_tau_tensors(n: usize, m: usize, eps: f64) -> Result<MpsPbc> {
    check_eps(eps)?;
    if n < 3 || m == 0 {
        return Err(TnsError::Argument("psi_tau needs N >= 3 and m >= 1".into()));
    }
    let mut tensors = vec![pair_site(m, 1.0, eps); n - 1];
    tensors.push(pair_site(m, 1.0, 1.0 / eps));
    MpsPbc::new(tensors, false)
}

/// Unnormalized two-domain state on `n` sites of dimension `m^2`: unit
/// coefficients on the uniform configurations and on those with one domain
/// wall before site `N` and one at site `N`.
pub fn two_domain_state(n: usize, m: usize) -> Result<DenseTensor> {
    if n < 3 || m == 0 {
        return Err(TnsError::Argument("two-domain state needs N >= 3 and m >= 1".into()));
    }
    let dims = vec![m * m; n];
    let total = check_state("two-domain state", &dims)?;
    let mut data = vec![ZERO; total];
    // Enumerate bond values; bond i sits between sites i and i+1 (mod N),
    // so site i sees (left, right) = (bond i-1, bond i).
    let configs = m.pow(n as u32);
    let mut bonds = vec![0; n];
    for c in 0..configs {
        let mut x = c;
        for b in bonds.iter_mut() {
            *b = x % m;
            x /= m;
        }
        let walls: Vec<usize> = (0..n).filter(|&i| bonds[(i + n - 1) % n] != bonds[i]).collect();
        let keep = walls.is_empty() || (walls.len() == 2 && walls[1] == n - 1);
        if keep {
            let flat = (0..n).fold(0, |acc, i| acc * m * m + bonds[(i + n - 1) % n] * m + bonds[i]);
            data[flat] = ONE;
        }
    }
    DenseTensor::new(dims, data)
}

/// Factorization `m = d_1 ... d_p` with real diagonal orthonormal operator
/// bases; row `k` of `bases[i]` is the diagonal of `D^(i)_k`, and row 0 is
/// constant.
#[derive(Debug, Clone, PartialEq)]
pub struct FineGrainSpec {
    m: usize,
    factors: Vec<usize>,
    bases: Vec<Vec<Vec<f64>>>,
}

/// Orthonormal rows completing the constant row, by Gram–Schmidt over the
/// standard basis.
fn diagonal_basis(d: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0 / (d as f64).sqrt(); d]];
    for j in 0..d {
        if rows.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[j] = 1.0;
        for r in rows.iter().chain(rows.iter()) {
            let c: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(r) {
                *x -= c * y;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            rows.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    rows
}

impl FineGrainSpec {
    pub fn new(factors: &[usize]) -> Result<Self> {
        let bases = factors.iter().map(|&d| diagonal_basis(d)).collect();
        FineGrainSpec::with_bases(factors, bases)
    }

    pub fn with_bases(factors: &[usize], bases: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if factors.is_empty() || factors.contains(&0) {
            return Err(TnsError::Invariant(format!("invalid factorization {:?}", factors)));
        }
        let spec = FineGrainSpec {
            m: factors.iter().product(),
            factors: factors.to_vec(),
            bases,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn bases(&self) -> &[Vec<Vec<f64>>] {
        &self.bases
    }

    pub fn validate(&self) -> Result<()> {
        if self.bases.len() != self.factors.len() {
            return Err(TnsError::Invariant("one operator basis per factor required".into()));
        }
        for (i, (&d, basis)) in self.factors.iter().zip(&self.bases).enumerate() {
            if basis.len() != d || basis.iter().any(|r| r.len() != d) {
                return Err(TnsError::Invariant(format!("basis {} must be {} x {}", i, d, d)));
            }
            let c = 1.0 / (d as f64).sqrt();
            if basis[0].iter().any(|&x| x != c) {
                return Err(TnsError::Invariant(format!("basis {} does not start with 1/sqrt(d)", i)));
            }
            for k in 0..d {
                for l in 0..d {
                    let g: f64 = basis[k].iter().zip(&basis[l]).map(|(a, b)| a * b).sum();
                    let want = if k == l { 1.0 } else { 0.0 };
                    if (g - want).abs() > 1e-12 {
                        return Err(TnsError::Invariant(format!(
                            "basis {} is not orthonormal at ({}, {})",
                            i, k, l
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Factors of `αP_d + βP_o = U diag(s) V`: the `U` and `V` chains with one
/// `(d_i, m, m)` tensor per factor, the singular values and the bond-2
/// operator chain for `diag(s)` with entries `(left, right, d_i, d_i)`.
#[derive(Debug, Clone)]
pub struct FineGrainedA {
    pub u_chain: Vec<DenseTensor>,
    pub singular_values: Vec<f64>,
    pub s_mpo: Vec<DenseTensor>,
    pub v_chain: Vec<DenseTensor>,
}

/// `(d_i, m, m)` tensor `1 ⊗ Δ^{n_i} ⊗ 1` with `Δ[n', k] = δ(n, n') D_k[n]`
/// (or its transpose when `transpose` is set).
fn kron_factor(spec: &FineGrainSpec, i: usize, transpose: bool) -> Result<DenseTensor> {
    let d = spec.factors[i];
    let before: usize = spec.factors[..i].iter().product();
    let after: usize = spec.factors[i + 1..].iter().product();
    let basis = &spec.bases[i];
    let slices = (0..d)
        .map(|n| {
            let delta = DenseTensor::from_fn(&[d, d], |ix| {
                let (row, col) = (ix[0], ix[1]);
                let (np, k) = if transpose { (col, row) } else { (row, col) };
                if np == n {
                    C64::new(basis[k][n], 0.0)
                } else {
                    ZERO
                }
            });
            DenseTensor::identity(before).kron(&delta)?.kron(&DenseTensor::identity(after))
        })
        .collect::<Result<Vec<_>>>()?;
    DenseTensor::stack(&slices)
}

pub fn fine_grain_a(alpha: f64, beta: f64, spec: &FineGrainSpec) -> Result<FineGrainedA> {
    spec.validate()?;
    let m = spec.m;
    let p = spec.factors.len();
    let s1 = m as f64 * beta + alpha - beta;
    let s_rest = alpha - beta;
    let mut singular_values = vec![s_rest; m];
    singular_values[0] = s1;
    let u_chain = (0..p).map(|i| kron_factor(spec, i, false)).collect::<Result<Vec<_>>>()?;
    let v_chain = (0..p).map(|i| kron_factor(spec, i, true)).collect::<Result<Vec<_>>>()?;
    let proj = |d: usize| DenseTensor::from_fn(&[d, d], |i| if i == [0, 0] { ONE } else { ZERO });
    let s_mpo = if p == 1 {
        let d = spec.factors[0];
        let op = proj(d)
            .scale_real(s1 - s_rest)
            .add(&DenseTensor::identity(d).scale_real(s_rest))?;
        vec![op.into_reshaped(&[1, 1, d, d])?]
    } else {
        (0..p)
            .map(|i| {
                let d = spec.factors[i];
                let (pr, id) = (proj(d), DenseTensor::identity(d));
                let entries: Vec<DenseTensor> = if i == 0 {
                    vec![pr.scale_real(s1 - s_rest), id.scale_real(s_rest)]
                } else if i + 1 == p {
                    vec![pr, id]
                } else {
                    vec![pr, DenseTensor::zeros(&[d, d]), DenseTensor::zeros(&[d, d]), id]
                };
                let (bl, br) = match (i == 0, i + 1 == p) {
                    (true, _) => (1, 2),
                    (_, true) => (2, 1),
                    _ => (2, 2),
                };
                DenseTensor::stack(&entries)?.into_reshaped(&[bl, br, d, d])
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(FineGrainedA {
        u_chain,
        singular_values,
        s_mpo,
        v_chain,
    })
}

/// Contracts an operator chain with entries `(left, right, d, d)` into one
/// operator.
pub fn mpo_to_matrix(chain: &[DenseTensor]) -> Result<DenseTensor> {
    let first = chain.first().ok_or_else(|| TnsError::Argument("empty operator chain".into()))?;
    let mut acc = first.clone();
    for w in &chain[1..] {
        let (bl, bm, x, _) = (acc.shape()[0], acc.shape()[1], acc.shape()[2], acc.shape()[3]);
        let (bm2, br, u, _) = (w.shape()[0], w.shape()[1], w.shape()[2], w.shape()[3]);
        if bm != bm2 {
            return Err(TnsError::Dimension("operator chain bonds do not match".into()));
        }
        acc = DenseTensor::from_fn(&[bl, br, x * u, x * u], |i| {
            let (xi, ui) = (i[2] / u, i[2] % u);
            let (yi, vi) = (i[3] / u, i[3] % u);
            (0..bm)
                .map(|b| acc.get(&[i[0], b, xi, yi]) * w.get(&[b, i[1], ui, vi]))
                .sum()
        });
    }
    let (bl, br, x) = (acc.shape()[0], acc.shape()[1], acc.shape()[2]);
    if bl != 1 || br != 1 {
        return Err(TnsError::Dimension("operator chain must have unit boundary bonds".into()));
    }
    acc.into_reshaped(&[x, x])
}

impl FineGrainedA {
    /// The operator `⟨n,ñ|Â|n',ñ'⟩` rebuilt from all factors, as an
    /// `m^2 x m^2` matrix.
    pub fn recontract(&self) -> Result<DenseTensor> {
        let u = chain_product(&self.u_chain, "fine-grained U")?;
        let v = chain_product(&self.v_chain, "fine-grained V")?;
        let s = mpo_to_matrix(&self.s_mpo)?;
        let m = u.shape()[0];
        let us = crate::tensor::contract(&u, &s, &[(2, 0)])?; // (n, n', k')
        let full = crate::tensor::contract(&us, &v, &[(2, 1)])?; // (n, n', ñ, ñ')
        full.permute(&[0, 2, 1, 3])?.into_reshaped(&[m * m, m * m])
    }
}

/// Contracts the consecutive tensors `group` of a chain with axes
/// `(d, left, right)` into one tensor with a row-major grouped physical index.
pub fn block_cluster(tensors: &[DenseTensor], group: &[usize]) -> Result<DenseTensor> {
    if group.is_empty() || group.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(TnsError::Argument(format!("group {:?} is not contiguous", group)));
    }
    if *group.last().unwrap_or(&0) >= tensors.len() {
        return Err(TnsError::Argument(format!("group {:?} out of range", group)));
    }
    chain_product(group.iter().map(|&i| &tensors[i]), "cluster blocking")
}

/// Fine-grained periodic chain for `psi_tau`: each site becomes `2p` sites
/// (the `U` chain with `diag(s)` absorbed into its last tensor, then the `V`
/// chain), all with bond dimension `m`.
pub fn psi_tau_fine_grained(n: usize, eps: f64, spec: &FineGrainSpec) -> Result<MpsPbc> {
    check_eps(eps)?;
    if n < 3 {
        return Err(TnsError::Argument("psi_tau needs N >= 3".into()));
    }
    let site = |alpha: f64, beta: f64| -> Result<Vec<DenseTensor>> {
        let f = fine_grain_a(alpha, beta, spec)?;
        let m = spec.m;
        let s = DenseTensor::from_fn(&[m, m], |i| {
            if i[0] == i[1] {
                C64::new(f.singular_values[i[0]], 0.0)
            } else {
                ZERO
            }
        });
        let mut out = f.u_chain.clone();
        let last = out.pop().unwrap_or_else(|| DenseTensor::zeros(&[1, m, m]));
        out.push(crate::tensor::contract(&last, &s, &[(2, 0)])?);
        out.extend(f.v_chain);
        Ok(out)
    };
    let bulk = site(1.0, eps)?;
    let mut tensors = Vec::new();
    for _ in 0..n - 1 {
        tensors.extend(bulk.iter().cloned());
    }
    tensors.extend(site(1.0, 1.0 / eps)?);
    MpsPbc::new(tensors, false)
}

/// Spin-1 AKLT tensor in the basis `(+1, 0, -1)`.
pub fn aklt_tensor() -> DenseTensor {
    let r = 2f64.sqrt();
    DenseTensor::from_real(&[3, 2, 2], &[0.0, r, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, -r, 0.0])
        .expect("fixed shape")
}

/// `S·S` on two spin-1 sites, basis `(+1, 0, -1)` per site.
pub fn spin1_heisenberg_bond() -> DenseTensor {
    let r = 2f64.sqrt();
    let sz = DenseTensor::from_real(&[3, 3], &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]).expect("3x3");
    let sp = DenseTensor::from_real(&[3, 3], &[0.0, r, 0.0, 0.0, 0.0, r, 0.0, 0.0, 0.0]).expect("3x3");
    let sm = sp.transpose().expect("matrix");
    let zz = sz.kron(&sz).expect("kron");
    let pm = sp.kron(&sm).expect("kron").add(&sm.kron(&sp).expect("kron")).expect("add");
    zz.add(&pm.scale_real(0.5)).expect("add")
}

/// Dense `Σ_i [cos θ S_i·S_{i+1} + sin θ (S_i·S_{i+1})^2]` on `n` spin-1
/// sites, with the wrap-around bond iff `pbc`.
pub fn blbq_hamiltonian(n: usize, theta: f64, pbc: bool) -> Result<DenseTensor> {
    if n < 2 {
        return Err(TnsError::Argument("the chain needs at least 2 sites".into()));
    }
    let dim = 3usize
        .checked_pow(n as u32)
        .ok_or_else(|| TnsError::Capacity {
            what: "spin-1 Hamiltonian".into(),
            needed: u128::MAX,
            cap: crate::limits::limits().max_intermediate,
        })?;
    check_intermediate("spin-1 Hamiltonian", product(&[dim, dim]))?;
    let ss = spin1_heisenberg_bond();
    let h2 = ss
        .scale_real(theta.cos())
        .add(&ss.matmul(&ss)?.scale_real(theta.sin()))?;
    let mut bonds: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if pbc && n > 2 {
        bonds.push((n - 1, 0));
    }
    let pow3: Vec<usize> = (0..n).map(|i| 3usize.pow((n - 1 - i) as u32)).collect();
    let mut data = vec![ZERO; dim * dim];
    for col in 0..dim {
        for &(i, j) in &bonds {
            let (a, b) = ((col / pow3[i]) % 3, (col / pow3[j]) % 3);
            let base = col - a * pow3[i] - b * pow3[j];
            for a2 in 0..3 {
                for b2 in 0..3 {
                    let h = h2.get(&[a2 * 3 + b2, a * 3 + b]);
                    if h != ZERO {
                        let row = base + a2 * pow3[i] + b2 * pow3[j];
                        data[row * dim + col] += h;
                    }
                }
            }
        }
    }
    DenseTensor::new(vec![dim, dim], data)
}
