// SPDX-License-Identifier: Apache-2.0

//! Overlap maximization and energy minimization over MPS parametrizations
//! by alternating single-site updates, with tensor-norm and transfer-product
//! regularization and monitoring of tensor-entry growth.
//!
//! Iterates are kept at `‖Ψ‖ = 1`. Each single-site problem is solved on the
//! unit sphere of the site's metric `G = L†L`, where `Ψ = L a` is the state
//! as a linear function of the site tensor `a`; directions in the kernel of
//! `G` do not affect the state and are dropped.

use serde::Serialize;

use crate::error::{Result, TnsError};
use crate::linalg::hermitian_eigen;
use crate::mps_obc::{eval_obc, MpsObc};
use crate::mps_pbc::{eval_pbc, transfer_matrix, transfer_product, unit_tensor, MpsPbc};
use crate::tensor::{DenseTensor, C64, ZERO};
use crate::zoo::{max_element_norm, psi_w_overlap, psi_w_timps_tensor};

/// Default bound on `max |entry|` beyond which a run is flagged divergent.
pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e6;
/// Change of the regularized objective over one sweep that counts as
/// converged.
pub const CONVERGENCE_TOL: f64 = 1e-10;
/// Relative cutoff on metric eigenvalues below which directions are dropped.
const METRIC_TOL: f64 = 1e-12;
const MAX_HALVINGS: u32 = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveKind {
    /// `‖Ψ/‖Ψ‖ − ψ0‖²` for a normalized target.
    Distance(DenseTensor),
    /// `<Ψ|H|Ψ> / <Ψ|Ψ>` for a Hermitian matrix.
    Energy(DenseTensor),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Regularization {
    None,
    /// `Σ_i λ_i ‖A_i‖_F²`; a single value applies to every site.
    TensorNorm(Vec<f64>),
    /// `λ ‖E_1 ... E_N‖_F²`.
    TransferProduct(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub regularization: Regularization,
}

impl Objective {
    pub fn distance(target: DenseTensor, regularization: Regularization) -> Result<Self> {
        if (target.norm() - 1.0).abs() > 1e-10 {
            return Err(TnsError::Normalization(format!("target has norm {}", target.norm())));
        }
        Objective::checked(ObjectiveKind::Distance(target), regularization)
    }

    pub fn energy(hamiltonian: DenseTensor, regularization: Regularization) -> Result<Self> {
        let (r, c) = hamiltonian.dims2()?;
        if r != c {
            return Err(TnsError::Dimension("Hamiltonian must be square".into()));
        }
        if hamiltonian.max_abs_diff(&hamiltonian.adjoint()?) > 1e-10 {
            return Err(TnsError::Invariant("Hamiltonian is not Hermitian".into()));
        }
        Objective::checked(ObjectiveKind::Energy(hamiltonian), regularization)
    }

    fn checked(kind: ObjectiveKind, regularization: Regularization) -> Result<Self> {
        let bad = match &regularization {
            Regularization::None => false,
            Regularization::TensorNorm(l) => l.is_empty() || l.iter().any(|&x| !(x >= 0.0 && x.is_finite())),
            Regularization::TransferProduct(l) => !(*l >= 0.0 && l.is_finite()),
        };
        if bad {
            return Err(TnsError::Argument("regularization weights must be finite and >= 0".into()));
        }
        Ok(Objective { kind, regularization })
    }

    fn state_len(&self) -> usize {
        match &self.kind {
            ObjectiveKind::Distance(t) => t.len(),
            ObjectiveKind::Energy(h) => h.shape()[0],
        }
    }

    fn tensor_weight(&self, site: usize) -> f64 {
        match &self.regularization {
            Regularization::TensorNorm(l) if l.len() == 1 => l[0],
            Regularization::TensorNorm(l) => l.get(site).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }
}

/// Open, periodic or translation-invariant chain.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Obc(MpsObc),
    Pbc(MpsPbc),
}

impl Params {
    pub fn tensors(&self) -> &[DenseTensor] {
        match self {
            Params::Obc(m) => m.tensors(),
            Params::Pbc(m) => m.tensors(),
        }
    }

    pub fn len(&self) -> usize {
        self.tensors().len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors().is_empty()
    }

    pub fn translation_invariant(&self) -> bool {
        matches!(self, Params::Pbc(m) if m.translation_invariant())
    }

    pub fn eval(&self) -> Result<DenseTensor> {
        match self {
            Params::Obc(m) => eval_obc(m),
            Params::Pbc(m) => eval_pbc(m),
        }
    }

    /// Replaces one tensor, giving up translation invariance.
    fn with_site(&self, site: usize, t: DenseTensor) -> Result<Params> {
        Ok(match self {
            Params::Obc(m) => Params::Obc(m.with_tensor(site, t)?),
            Params::Pbc(m) => {
                let mut ts = m.tensors().to_vec();
                ts[site] = t;
                Params::Pbc(MpsPbc::new(ts, false)?)
            }
        })
    }

    fn with_tensors(&self, tensors: Vec<DenseTensor>) -> Result<Params> {
        Ok(match self {
            Params::Obc(_) => Params::Obc(MpsObc::new(tensors)?),
            Params::Pbc(m) => Params::Pbc(MpsPbc::new(tensors, m.translation_invariant())?),
        })
    }

    /// Scales every tensor by the same factor so that `‖Ψ‖ = 1`.
    pub fn normalized(&self) -> Result<Params> {
        let norm = self.eval()?.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(TnsError::Normalization("parameters give the zero state".into()));
        }
        let c = norm.powf(-1.0 / self.len() as f64);
        self.with_tensors(self.tensors().iter().map(|t| t.scale_real(c)).collect())
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.tensors().iter().map(|t| t.max_abs()).fold(0.0, f64::max)
    }

    pub fn frobenius_norms(&self) -> Vec<f64> {
        self.tensors().iter().map(|t| t.norm()).collect()
    }
}

/// `‖E_1 ... E_N‖_F`.
pub fn transfer_product_norm(tensors: &[DenseTensor]) -> Result<f64> {
    Ok(transfer_product(tensors)?.norm())
}

fn regularization_value(obj: &Objective, tensors: &[DenseTensor]) -> Result<f64> {
    Ok(match &obj.regularization {
        Regularization::None => 0.0,
        Regularization::TensorNorm(_) => tensors
            .iter()
            .enumerate()
            .map(|(i, t)| obj.tensor_weight(i) * t.norm_sqr())
            .sum(),
        Regularization::TransferProduct(l) => l * transfer_product(tensors)?.norm_sqr(),
    })
}

fn check_len(obj: &Objective, psi: &DenseTensor) -> Result<()> {
    if obj.state_len() != psi.len() {
        return Err(TnsError::Dimension(format!(
            "objective acts on {} amplitudes, parameters give {}",
            obj.state_len(),
            psi.len()
        )));
    }
    Ok(())
}

/// Unregularized value of the objective for a state vector.
fn state_value(obj: &Objective, psi: &DenseTensor) -> Result<f64> {
    check_len(obj, psi)?;
    let n2 = psi.norm_sqr();
    if n2.is_nan() || n2 <= 0.0 {
        return Err(TnsError::Normalization("zero state".into()));
    }
    let flat = psi.reshape(&[psi.len()])?;
    Ok(match &obj.kind {
        ObjectiveKind::Distance(t) => {
            let ov = t.reshape(&[t.len()])?.inner(&flat)?;
            2.0 - 2.0 * ov.re / n2.sqrt()
        }
        ObjectiveKind::Energy(h) => {
            let hp = h.matmul(&flat.reshape(&[flat.len(), 1])?)?;
            flat.reshape(&[flat.len(), 1])?.inner(&hp)?.re / n2
        }
    })
}

/// `(f, f_reg)`: `f` is evaluated on the normalized state, the penalty on the
/// raw tensors.
pub fn objective_value(obj: &Objective, params: &Params) -> Result<(f64, f64)> {
    let psi = params.eval()?;
    let f = state_value(obj, &psi)?;
    Ok((f, f + regularization_value(obj, params.tensors())?))
}

/// `|<ψ0|Ψ>| / ‖Ψ‖` for distance objectives, NaN otherwise.
pub fn target_overlap(obj: &Objective, params: &Params) -> Result<f64> {
    match &obj.kind {
        ObjectiveKind::Distance(t) => {
            let psi = params.eval()?;
            Ok(t.reshape(&[t.len()])?.inner(&psi.reshape(&[psi.len()])?)?.norm() / psi.norm())
        }
        ObjectiveKind::Energy(_) => Ok(f64::NAN),
    }
}

/// Rows `k` hold the state with the site tensor replaced by unit tensor `k`,
/// so `Ψ = rowsᵀ a`.
fn site_rows(params: &Params, site: usize) -> Result<DenseTensor> {
    let shape = params.tensors()[site].shape().to_vec();
    let p: usize = shape.iter().product();
    let mut data = Vec::new();
    for k in 0..p {
        let varied = params.with_site(site, unit_tensor(&shape, k))?;
        data.extend_from_slice(varied.eval()?.data());
    }
    let total = data.len() / p.max(1);
    DenseTensor::new(vec![p, total], data)
}

fn column(v: &[C64]) -> Result<DenseTensor> {
    DenseTensor::new(vec![v.len(), 1], v.to_vec())
}

/// `Σ_s conj(U^s) ⊗ V^s`.
fn bilinear_transfer(u: &DenseTensor, v: &DenseTensor) -> Result<DenseTensor> {
    let (d, ml, mr) = (u.shape()[0], u.shape()[1], u.shape()[2]);
    let mut e = DenseTensor::zeros(&[ml * ml, mr * mr]);
    for s in 0..d {
        e = e.add(&u.slice_first(s).conj().kron(&v.slice_first(s))?)?;
    }
    Ok(e)
}

/// Products of transfer matrices left and right of `site`.
fn transfer_envs(tensors: &[DenseTensor], site: usize) -> Result<(DenseTensor, DenseTensor)> {
    let left_dim = tensors[site].shape()[1].pow(2);
    let right_dim = tensors[site].shape()[2].pow(2);
    let mut left = DenseTensor::identity(tensors[0].shape()[1].pow(2));
    for t in &tensors[..site] {
        left = left.matmul(&transfer_matrix(t)?)?;
    }
    let mut right = DenseTensor::identity(right_dim);
    for t in &tensors[site + 1..] {
        right = right.matmul(&transfer_matrix(t)?)?;
    }
    debug_assert_eq!(left.shape()[1], left_dim);
    Ok((left, right))
}

/// Quadratic penalty `a† R a` agreeing with the true penalty at the current
/// tensor; for the transfer product the conjugated slot is frozen.
fn penalty_matrix(obj: &Objective, tensors: &[DenseTensor], site: usize) -> Result<DenseTensor> {
    let shape = tensors[site].shape().to_vec();
    let p: usize = shape.iter().product();
    match &obj.regularization {
        Regularization::None => Ok(DenseTensor::zeros(&[p, p])),
        Regularization::TensorNorm(_) => Ok(DenseTensor::identity(p).scale_real(obj.tensor_weight(site))),
        Regularization::TransferProduct(l) => {
            let (left, right) = transfer_envs(tensors, site)?;
            let mut cols = Vec::new();
            for k in 0..p {
                let x = left
                    .matmul(&bilinear_transfer(&tensors[site], &unit_tensor(&shape, k))?)?
                    .matmul(&right)?;
                cols.push(x.into_data());
            }
            let q = cols[0].len();
            let j = DenseTensor::from_fn(&[q, p], |i| cols[i[1]][i[0]]);
            Ok(j.adjoint()?.matmul(&j)?.scale_real(*l))
        }
    }
}

/// Wirtinger gradient `∂f_reg/∂conj(a)` with respect to the tensor at `site`,
/// all other tensors fixed.
pub fn site_gradient(obj: &Objective, params: &Params, site: usize) -> Result<DenseTensor> {
    let tensors = params.tensors();
    let hetero = params.with_site(site, tensors[site].clone())?;
    let rows = site_rows(&hetero, site)?;
    let a = column(tensors[site].data())?;
    let lc = rows.conj();
    let psi = rows.transpose()?.matmul(&a)?;
    check_len(obj, &psi)?;
    let ga = lc.matmul(&psi)?;
    let n2 = psi.norm_sqr();
    let mut grad = match &obj.kind {
        ObjectiveKind::Distance(t) => {
            let b = lc.matmul(&t.reshape(&[t.len(), 1])?)?;
            let re = b.inner(&a)?.re;
            let s = n2.sqrt();
            b.scale_real(-1.0 / s).add(&ga.scale_real(re / (s * s * s)))?
        }
        ObjectiveKind::Energy(h) => {
            let ka = lc.matmul(&h.matmul(&psi)?)?;
            let e = psi.inner(&h.matmul(&psi)?)?.re;
            ka.scale_real(1.0 / n2).sub(&ga.scale_real(e / (n2 * n2)))?
        }
    };
    match &obj.regularization {
        Regularization::None => {}
        Regularization::TensorNorm(_) => grad = grad.add(&a.scale_real(obj.tensor_weight(site)))?,
        Regularization::TransferProduct(l) => {
            let (left, right) = transfer_envs(tensors, site)?;
            let x = transfer_product(tensors)?;
            let shape = tensors[site].shape();
            let p = a.len();
            let mut g = Vec::with_capacity(p);
            for k in 0..p {
                let e = unit_tensor(shape, k);
                let t = left.matmul(&bilinear_transfer(&e, &tensors[site])?)?.matmul(&right)?;
                let s = left.matmul(&bilinear_transfer(&tensors[site], &e)?)?.matmul(&right)?;
                g.push((t.inner(&x)?.conj() + s.inner(&x)?) * *l);
            }
            grad = grad.add(&column(&g)?)?;
        }
    }
    grad.into_reshaped(shape_of(tensors, site))
}

fn shape_of(tensors: &[DenseTensor], site: usize) -> &[usize] {
    tensors[site].shape()
}

/// Minimizes `y† H y − 2 Re(c† y)` over unit vectors `y`.
fn sphere_quadratic_min(h: &DenseTensor, c: &DenseTensor) -> Result<DenseTensor> {
    let (vals, vecs) = hermitian_eigen(h)?;
    let r = vals.len();
    let cp = vecs.adjoint()?.matmul(c)?;
    let cn = cp.norm();
    let y = if cn == 0.0 {
        DenseTensor::from_fn(&[r, 1], |i| vecs.get(&[i[0], 0]))
    } else {
        let h0 = vals[0];
        let scale = vals.iter().fold(cn, |acc, v| acc.max(v.abs()));
        let gap = 1e-13 * scale;
        let bottom: Vec<bool> = vals.iter().map(|&v| v - h0 <= gap).collect();
        let bottom_weight: f64 = (0..r).filter(|&k| bottom[k]).map(|k| cp.data()[k].norm_sqr()).sum();
        let coords = |nu: f64, skip_bottom: bool| -> Vec<C64> {
            (0..r)
                .map(|k| {
                    if skip_bottom && bottom[k] {
                        ZERO
                    } else {
                        cp.data()[k] / (vals[k] - nu)
                    }
                })
                .collect()
        };
        let norm2 = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let hard = coords(h0, true);
        let yp = if bottom_weight <= (1e-14 * cn).powi(2) && norm2(&hard) <= 1.0 {
            let mut v = hard;
            let extra = (1.0 - norm2(&v)).max(0.0).sqrt();
            v[0] += C64::new(extra, 0.0);
            v
        } else {
            let (mut lo, mut hi) = (h0 - cn, h0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if norm2(&coords(mid, false)) > 1.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            coords(lo, false)
        };
        vecs.matmul(&column(&yp)?)?
    };
    let n = y.norm();
    Ok(y.scale_real(1.0 / n))
}

/// Outcome of one single-site update.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteUpdate {
    pub params: Params,
    pub f_reg_before: f64,
    pub f_reg_after: f64,
    /// Metric was singular and the solve was restricted to its range.
    pub restricted: bool,
    /// No trial step decreased the objective; the tensor was kept.
    pub rejected: bool,
}

/// Proposed tensor at `site` from the quadratic model on the metric sphere.
fn propose(obj: &Objective, params: &Params, site: usize) -> Result<(DenseTensor, bool)> {
    let tensors = params.tensors();
    let rows = site_rows(params, site)?;
    let lc = rows.conj();
    let lt = rows.transpose()?;
    let g = lc.matmul(&lt)?;
    let (gv, gq) = hermitian_eigen(&g)?;
    let gmax = gv.iter().fold(0.0f64, |a, &v| a.max(v));
    if gmax.is_nan() || gmax <= 0.0 {
        return Err(TnsError::Degeneracy(format!("site {} does not affect the state", site)));
    }
    let keep: Vec<usize> = (0..gv.len()).filter(|&k| gv[k] > METRIC_TOL * gmax).collect();
    let restricted = keep.len() < gv.len();
    let p = gv.len();
    // a = W y with W = Q_r g_r^{-1/2}, so that a† G a = y† y.
    let w = DenseTensor::from_fn(&[p, keep.len()], |i| gq.get(&[i[0], keep[i[1]]]) / gv[keep[i[1]]].sqrt());
    let wd = w.adjoint()?;
    let r = penalty_matrix(obj, tensors, site)?;
    let mut h = wd.matmul(&r)?.matmul(&w)?;
    let c = match &obj.kind {
        ObjectiveKind::Distance(t) => {
            check_len(obj, &DenseTensor::zeros(&[rows.shape()[1]]))?;
            wd.matmul(&lc.matmul(&t.reshape(&[t.len(), 1])?)?)?
        }
        ObjectiveKind::Energy(hm) => {
            check_len(obj, &DenseTensor::zeros(&[rows.shape()[1]]))?;
            let k = lc.matmul(&hm.matmul(&lt)?)?;
            h = h.add(&wd.matmul(&k)?.matmul(&w)?)?;
            DenseTensor::zeros(&[keep.len(), 1])
        }
    };
    let h = crate::linalg::hermitize(&h)?;
    let y = sphere_quadratic_min(&h, &c)?;
    let a = w.matmul(&y)?;
    Ok((a.into_reshaped(tensors[site].shape())?, restricted))
}

/// One update of the tensor at `site` (for translation-invariant chains, of
/// the shared tensor through a damped step). The regularized objective never
/// increases.
pub fn als_sweep(obj: &Objective, params: &Params, site: usize) -> Result<SiteUpdate> {
    if site >= params.len() {
        return Err(TnsError::Argument(format!("site {} out of range", site)));
    }
    let (_, before) = objective_value(obj, params)?;
    let ti = params.translation_invariant();
    let hetero = if ti {
        params.with_site(site, params.tensors()[site].clone())?
    } else {
        params.clone()
    };
    let (proposal, restricted) = propose(obj, &hetero, site)?;
    let old = &params.tensors()[site];
    let mut t = 1.0;
    for _ in 0..=MAX_HALVINGS {
        let blend = old.scale_real(1.0 - t).add(&proposal.scale_real(t))?;
        let candidate = if ti {
            params.with_tensors(vec![blend; params.len()])?.normalized()
        } else {
            params.with_site(site, blend)?.normalized_at(site)
        };
        if let Ok(candidate) = candidate {
            let (_, after) = objective_value(obj, &candidate)?;
            if after <= before {
                return Ok(SiteUpdate {
                    params: candidate,
                    f_reg_before: before,
                    f_reg_after: after,
                    restricted,
                    rejected: false,
                });
            }
        }
        t *= 0.5;
    }
    Ok(SiteUpdate {
        params: params.clone(),
        f_reg_before: before,
        f_reg_after: before,
        restricted,
        rejected: true,
    })
}

impl Params {
    /// Rescales only the tensor at `site` so that `‖Ψ‖ = 1`.
    fn normalized_at(&self, site: usize) -> Result<Params> {
        let norm = self.eval()?.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(TnsError::Normalization("parameters give the zero state".into()));
        }
        let t = self.tensors()[site].scale_real(1.0 / norm);
        self.with_site(site, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    IterationCap,
    DivergenceFlag,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::IterationCap => "iteration_cap",
            Termination::DivergenceFlag => "divergence_flag",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub f: f64,
    pub f_reg: f64,
    pub overlap: f64,
    pub max_abs_entry: f64,
    pub frobenius_norms: Vec<f64>,
    pub transfer_product_norm: f64,
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
    pub final_params: Params,
}

fn record(obj: &Objective, params: &Params, iteration: usize, flag: &str) -> Result<TraceRecord> {
    let (f, f_reg) = objective_value(obj, params)?;
    Ok(TraceRecord {
        iteration,
        f,
        f_reg,
        overlap: target_overlap(obj, params)?,
        max_abs_entry: params.max_abs_entry(),
        frobenius_norms: params.frobenius_norms(),
        transfer_product_norm: transfer_product_norm(params.tensors())?,
        flag: flag.to_string(),
    })
}

/// Sites visited in one sweep: left to right and back for heterogeneous
/// chains, the shared tensor once for translation-invariant ones.
fn sweep_order(params: &Params) -> Vec<usize> {
    let n = params.len();
    if params.translation_invariant() {
        vec![0]
    } else {
        (0..n).chain((1..n.saturating_sub(1)).rev()).collect()
    }
}

/// Repeated sweeps from the normalized `init` until the regularized
/// objective changes by less than [`CONVERGENCE_TOL`] over a sweep, the
/// budget is spent, or an entry exceeds `divergence_threshold`.
pub fn run_experiment(obj: &Objective, init: &Params, budget: usize, divergence_threshold: f64) -> Result<RunTrace> {
    if budget == 0 {
        return Err(TnsError::Argument("budget must be at least 1".into()));
    }
    let mut params = init.normalized()?;
    let mut records = vec![record(obj, &params, 0, "init")?];
    let mut termination = Termination::IterationCap;
    for it in 1..=budget {
        let before = records.last().map(|r| r.f_reg).unwrap_or(f64::INFINITY);
        let mut restricted = false;
        let mut rejected = true;
        for site in sweep_order(&params) {
            let up = als_sweep(obj, &params, site)?;
            restricted |= up.restricted;
            rejected &= up.rejected;
            params = up.params;
        }
        let flag = match (restricted, rejected) {
            (_, true) => "stalled",
            (true, false) => "restricted",
            _ => "ok",
        };
        let rec = record(obj, &params, it, flag)?;
        let delta = (before - rec.f_reg).abs();
        let entry = rec.max_abs_entry;
        records.push(rec);
        if entry > divergence_threshold {
            termination = Termination::DivergenceFlag;
            break;
        }
        if delta < CONVERGENCE_TOL {
            termination = Termination::Converged;
            break;
        }
    }
    // The final record carries the termination reason.
    if let Some(last) = records.last_mut() {
        last.flag = termination.name().to_string();
    }
    Ok(RunTrace {
        records,
        termination,
        final_params: params,
    })
}

/// Entry bound for translation-invariant chains under a uniform tensor-norm
/// penalty `λ`: `N λ ‖A‖² ≤ f_reg(initial)` since `f ≥ 0`.
pub fn sublevel_entry_bound(f_reg_initial: f64, n: usize, lambda: f64) -> f64 {
    (f_reg_initial / (n as f64 * lambda)).sqrt()
}

/// One point of a family curve; `max_abs_entry` is the largest
/// `‖A[:, i, j]‖₂` over bond indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub eps: f64,
    pub f: f64,
    pub overlap: f64,
    pub max_abs_entry: f64,
}

/// Distance to the W state and tensor-entry size along the explicit
/// translation-invariant family approaching it.
pub fn psi_w_family_curve(n: usize, eps_grid: &[f64]) -> Result<Vec<CurvePoint>> {
    eps_grid
        .iter()
        .map(|&eps| {
            let a = psi_w_timps_tensor(n, eps)?;
            let overlap = psi_w_overlap(n, eps);
            Ok(CurvePoint {
                eps,
                f: 2.0 - 2.0 * overlap,
                overlap,
                max_abs_entry: max_element_norm(&a),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_complex;
    use crate::mps_obc::{from_state_obc, random_mps_obc};
    use crate::mps_pbc::gauge_transform;
    use crate::zoo::{aklt_tensor, blbq_hamiltonian, w_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_state(dims: &[usize], seed: u64) -> DenseTensor {
        random_complex(dims, &mut rng(seed)).normalized().unwrap()
    }

    #[test]
    fn trivial_values() {
        let target = random_state(&[2, 2, 2], 1);
        let mps = from_state_obc(&target, &[2, 2, 2], None).unwrap();
        let params = Params::Obc(mps);
        let obj = Objective::distance(target.clone(), Regularization::None).unwrap();
        assert!(objective_value(&obj, &params).unwrap().0.abs() < 1e-12);
        let flat = target.reshape(&[8, 1]).unwrap();
        let h = flat.matmul(&flat.adjoint().unwrap()).unwrap().scale_real(-1.0);
        let e = Objective::energy(h, Regularization::None).unwrap();
        assert!((objective_value(&e, &params).unwrap().0 + 1.0).abs() < 1e-12);
        let up = als_sweep(&obj, &params, 1).unwrap();
        assert!(up.params.eval().unwrap().max_abs_diff(&target) < 1e-10);
    }

    #[test]
    fn transfer_penalty_matches_direct_product() {
        let a = psi_w_timps_tensor(3, 0.5).unwrap();
        let params = Params::Pbc(MpsPbc::uniform(&a, 3).unwrap());
        let w = w_state(3, 2).unwrap();
        let obj = Objective::distance(w, Regularization::TransferProduct(0.3)).unwrap();
        let (f, freg) = objective_value(&obj, &params).unwrap();
        let e = transfer_matrix(&a).unwrap();
        let direct = e.matmul(&e).unwrap().matmul(&e).unwrap().norm_sqr();
        assert!((freg - f - 0.3 * direct).abs() < 1e-12);
    }

    fn fd_check(obj: &Objective, params: &Params, site: usize, seed: u64) {
        let g = site_gradient(obj, params, site).unwrap();
        let shape = params.tensors()[site].shape().to_vec();
        let dir = random_complex(&shape, &mut rng(seed));
        let h = 1e-5;
        let at = |s: f64| {
            let t = params.tensors()[site].add(&dir.scale_real(s)).unwrap();
            objective_value(obj, &params.with_site(site, t).unwrap()).unwrap().1
        };
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let an = 2.0 * g.inner(&dir).unwrap().re;
        assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "fd {} vs {}", fd, an);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let dims = [2, 2, 2, 2];
        let target = random_state(&dims, 3);
        let mut r = rng(4);
        let obc = Params::Obc(random_mps_obc(&dims, &[2, 2, 2], &mut r).unwrap());
        let pbc = Params::Pbc(MpsPbc::new((0..4).map(|_| random_complex(&[2, 2, 2], &mut r)).collect(), false).unwrap());
        let flat = random_complex(&[16, 16], &mut r);
        let h = flat.add(&flat.adjoint().unwrap()).unwrap();
        for reg in [
            Regularization::None,
            Regularization::TensorNorm(vec![0.1, 0.2, 0.3, 0.4]),
            Regularization::TransferProduct(0.05),
        ] {
            let d = Objective::distance(target.clone(), reg.clone()).unwrap();
            let e = Objective::energy(h.clone(), reg).unwrap();
            for (k, p) in [&obc, &pbc].iter().enumerate() {
                for site in 0..4 {
                    fd_check(&d, p, site, 10 + site as u64 + 7 * k as u64);
                    fd_check(&e, p, site, 20 + site as u64 + 7 * k as u64);
                }
            }
        }
    }

    #[test]
    fn obc_fits_random_target() {
        let dims = [2; 5];
        let target = random_state(&dims, 8);
        let init = Params::Obc(random_mps_obc(&dims, &[2, 4, 4, 2], &mut rng(9)).unwrap());
        let obj = Objective::distance(target, Regularization::None).unwrap();
        let trace = run_experiment(&obj, &init, 10, DEFAULT_DIVERGENCE_THRESHOLD).unwrap();
        let last = trace.records.last().unwrap();
        assert!(last.overlap.powi(2) >= 0.999, "fidelity {}", last.overlap.powi(2));
        for w in trace.records.windows(2) {
            assert!(w[1].f_reg <= w[0].f_reg + 1e-12);
        }
    }

    #[test]
    fn obc_w_state_converges() {
        let w = w_state(6, 2).unwrap();
        let init = Params::Obc(random_mps_obc(&[2; 6], &[2; 5], &mut rng(2)).unwrap());
        let obj = Objective::distance(w, Regularization::None).unwrap();
        let trace = run_experiment(&obj, &init, 200, DEFAULT_DIVERGENCE_THRESHOLD).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        let last = trace.records.last().unwrap();
        assert!(last.overlap.powi(2) >= 1.0 - 1e-8, "fidelity {}", last.overlap.powi(2));
    }

    #[test]
    fn pbc_penalized_descent_is_monotone() {
        let dims = [2; 4];
        let target = random_state(&dims, 5);
        let mut r = rng(6);
        let init = Params::Pbc(MpsPbc::new((0..4).map(|_| random_complex(&[2, 2, 2], &mut r)).collect(), false).unwrap());
        for reg in [Regularization::TensorNorm(vec![1e-2]), Regularization::TransferProduct(1e-2)] {
            let obj = Objective::distance(target.clone(), reg).unwrap();
            let trace = run_experiment(&obj, &init, 30, DEFAULT_DIVERGENCE_THRESHOLD).unwrap();
            for w in trace.records.windows(2) {
                assert!(w[1].f_reg <= w[0].f_reg + 1e-12);
            }
            assert!(trace.records.last().unwrap().f_reg < trace.records[0].f_reg);
        }
    }

    #[test]
    fn aklt_is_stationary() {
        let theta = (1.0f64 / 3.0).atan();
        let n = 4;
        let h = blbq_hamiltonian(n, theta, true).unwrap();
        let obj = Objective::energy(h, Regularization::None).unwrap();
        let params = Params::Pbc(MpsPbc::new(vec![aklt_tensor(); n], false).unwrap()).normalized().unwrap();
        let (f0, _) = objective_value(&obj, &params).unwrap();
        let mut p = params;
        for site in 0..n {
            p = als_sweep(&obj, &p, site).unwrap().params;
        }
        let (f1, _) = objective_value(&obj, &p).unwrap();
        assert!((f1 - f0).abs() <= 1e-10);
    }

    #[test]
    fn energy_sweeps_reach_ground_state() {
        let theta = (1.0f64 / 3.0).atan();
        let n = 4;
        let h = blbq_hamiltonian(n, theta, true).unwrap();
        let (vals, _) = hermitian_eigen(&h).unwrap();
        let obj = Objective::energy(h, Regularization::None).unwrap();
        let mut r = rng(21);
        let tensors = (0..n)
            .map(|_| aklt_tensor().add(&random_complex(&[3, 2, 2], &mut r).scale_real(0.3)).unwrap())
            .collect();
        let init = Params::Pbc(MpsPbc::new(tensors, false).unwrap());
        let trace = run_experiment(&obj, &init, 200, DEFAULT_DIVERGENCE_THRESHOLD).unwrap();
        let last = trace.records.last().unwrap();
        assert!(trace.records[0].f > vals[0] + 1e-3);
        assert!(last.f - vals[0] < 1e-8, "energy {} vs {}", last.f, vals[0]);
    }

    #[test]
    fn ti_regularized_run_is_bounded() {
        let n = 7;
        let w = w_state(n, 2).unwrap();
        let lambda = 1e-3;
        let obj = Objective::distance(w, Regularization::TensorNorm(vec![lambda])).unwrap();
        let a = random_complex(&[2, 2, 2], &mut rng(12));
        let init = Params::Pbc(MpsPbc::uniform(&a, n).unwrap());
        let trace = run_experiment(&obj, &init, 3000, DEFAULT_DIVERGENCE_THRESHOLD).unwrap();
        assert_eq!(trace.termination, Termination::Converged, "{} records", trace.records.len());
        let bound = sublevel_entry_bound(trace.records[0].f_reg, n, lambda);
        for w in trace.records.windows(2) {
            assert!(w[1].f_reg <= w[0].f_reg + 1e-12);
        }
        for r in &trace.records {
            assert!(r.max_abs_entry <= bound);
            let pen: f64 = r.frobenius_norms.iter().map(|x| lambda * x * x).sum();
            assert!(pen <= trace.records[0].f_reg + 1e-12);
        }
        assert!(trace.final_params.translation_invariant());
    }

    #[test]
    fn transfer_penalty_gauge_invariance() {
        let mut r = rng(13);
        let mps = MpsPbc::new((0..4).map(|_| random_complex(&[2, 2, 2], &mut r)).collect(), false).unwrap();
        let base = transfer_product_norm(mps.tensors()).unwrap();
        for bond in 1..4 {
            let z = random_complex(&[2, 2], &mut r).add(&DenseTensor::identity(2).scale_real(2.0)).unwrap();
            let g = gauge_transform(&mps, bond, &z).unwrap();
            assert!((transfer_product_norm(g.tensors()).unwrap() - base).abs() < 1e-10 * base.max(1.0));
        }
    }

    #[test]
    fn family_curve_is_monotone() {
        let grid = [1e-1, 1e-2, 1e-3, 1e-4];
        let curve = psi_w_family_curve(5, &grid).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].f < w[0].f);
            assert!(w[1].max_abs_entry > w[0].max_abs_entry);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = DenseTensor::from_real(&[2], &[1.0, 1.0]).unwrap();
        assert!(Objective::distance(t, Regularization::None).is_err());
        let h = DenseTensor::from_real(&[2, 2], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(Objective::energy(h, Regularization::None).is_err());
        let w = w_state(3, 2).unwrap();
        assert!(Objective::distance(w, Regularization::TensorNorm(vec![-1.0])).is_err());
    }
}
