// SPDX-License-Identifier: Apache-2.0

//! Projected entangled-pair states on graphs with loops.
//!
//! Tensors follow the axis convention of [`crate::network`]. Entangled-pair
//! tensors carry one physical factor per incident edge, in the same order as
//! the bond axes.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TnsError};
use crate::mps_pbc::MpsPbc;
use crate::network::{contract_network, Network};
use crate::tensor::{reduced_density_matrix, DenseTensor, C64, ONE, ZERO};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPeps")]
pub struct Peps {
    network: Network,
    tensors: Vec<DenseTensor>,
}

#[derive(Deserialize)]
struct RawPeps {
    network: Network,
    tensors: Vec<DenseTensor>,
}

impl TryFrom<RawPeps> for Peps {
    type Error = TnsError;
    fn try_from(raw: RawPeps) -> Result<Self> {
        Peps::new(raw.network, raw.tensors)
    }
}

impl Peps {
    pub fn new(network: Network, tensors: Vec<DenseTensor>) -> Result<Self> {
        network.check_tensors(&tensors)?;
        Ok(Peps { network, tensors })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn tensors(&self) -> &[DenseTensor] {
        &self.tensors
    }

    pub fn into_tensors(self) -> Vec<DenseTensor> {
        self.tensors
    }
}

pub fn eval_peps(p: &Peps) -> Result<DenseTensor> {
    contract_network(&p.network, &p.tensors)
}

/// Bond dimensions of the edges at `v`, in axis order.
fn incident_bonds(net: &Network, v: usize) -> Vec<usize> {
    net.incident(v).iter().map(|&(k, _)| net.edges()[k].2).collect()
}

fn check_pair_dims(net: &Network) -> Result<()> {
    for v in 0..net.num_vertices() {
        let want: usize = incident_bonds(net, v).iter().product();
        if net.dims()[v] != want {
            return Err(TnsError::Argument(format!(
                "vertex {} has site dimension {}, entangled pairs need {}",
                v,
                net.dims()[v],
                want
            )));
        }
    }
    Ok(())
}

/// Row-major digits of `flat` in the mixed radix `radix`.
fn digits(mut flat: usize, radix: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radix.len()];
    for k in (0..radix.len()).rev() {
        out[k] = flat % radix[k];
        flat /= radix[k];
    }
    out
}

/// Vertex tensors of `|mu>` with an entry weight depending on the bond
/// multi-index of each vertex.
fn pair_tensors(net: &Network, weight: impl Fn(usize, &[usize]) -> C64) -> Result<Vec<DenseTensor>> {
    check_pair_dims(net)?;
    Ok((0..net.num_vertices())
        .map(|v| {
            let bonds = incident_bonds(net, v);
            let d = net.dims()[v];
            let shape = net.tensor_shape(v);
            let total: usize = shape.iter().product();
            let mut data = vec![ZERO; total];
            // The bond multi-index equals the physical multi-index, so the
            // nonzero entry for physical index `s` sits at `s * d + s`.
            for s in 0..d {
                data[s * d + s] = weight(v, &digits(s, &bonds));
            }
            DenseTensor::from_parts(shape, data)
        })
        .collect())
}

/// Entangled-pair state `⊗_e Σ_n |n,n>_e`; site dimensions must equal the
/// product of incident bond dimensions.
pub fn mu_peps(net: &Network) -> Result<Peps> {
    let tensors = pair_tensors(net, |_, _| ONE)?;
    Peps::new(net.clone(), tensors)
}

/// A loop vertex together with the axis positions (among its bond factors)
/// of the edges entering and leaving it.
#[derive(Debug, Clone, Copy)]
struct LoopSite {
    vertex: usize,
    inbound: usize,
    outbound: usize,
    last: bool,
}

fn edge_between(net: &Network, a: usize, b: usize) -> Option<usize> {
    net.edges()
        .iter()
        .position(|&(i, j, _)| (i == a && j == b) || (i == b && j == a))
}

fn loop_sites(net: &Network, cycle: &[usize]) -> Result<Vec<LoopSite>> {
    let n = cycle.len();
    if n < 3 {
        return Err(TnsError::Argument("a loop needs at least 3 vertices".into()));
    }
    let mut seen = vec![false; net.num_vertices()];
    for &v in cycle {
        if v >= seen.len() || seen[v] {
            return Err(TnsError::Argument(format!("loop {:?} is not a simple cycle", cycle)));
        }
        seen[v] = true;
    }
    let mut edges = Vec::with_capacity(n);
    for j in 0..n {
        let (a, b) = (cycle[j], cycle[(j + 1) % n]);
        let e = edge_between(net, a, b)
            .ok_or_else(|| TnsError::Argument(format!("loop step {} -> {} is not an edge", a, b)))?;
        edges.push(e);
    }
    let m = net.edges()[edges[0]].2;
    if edges.iter().any(|&e| net.edges()[e].2 != m) {
        return Err(TnsError::Argument("bond dimensions along the loop must agree".into()));
    }
    Ok((0..n)
        .map(|j| {
            let v = cycle[j];
            let inc = net.incident(v);
            let pos = |e: usize| inc.iter().position(|&(k, _)| k == e).unwrap_or(0);
            LoopSite {
                vertex: v,
                inbound: pos(edges[(j + n - 1) % n]),
                outbound: pos(edges[j]),
                last: j + 1 == n,
            }
        })
        .collect())
}

/// `|mu>` with `P_d + eps P_o` applied to the (in, out) bond factors of every
/// loop vertex except the last, which gets `P_d + P_o / eps`.
pub fn psi_t_peps(net: &Network, cycle: &[usize], eps: f64) -> Result<Peps> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(TnsError::Argument(format!("eps must be positive, got {}", eps)));
    }
    let sites = loop_sites(net, cycle)?;
    let mut role = vec![None; net.num_vertices()];
    for s in &sites {
        role[s.vertex] = Some(*s);
    }
    let tensors = pair_tensors(net, |v, idx| match role[v] {
        Some(s) if idx[s.inbound] != idx[s.outbound] => C64::new(if s.last { 1.0 / eps } else { eps }, 0.0),
        _ => ONE,
    })?;
    Peps::new(net.clone(), tensors)
}

/// The `eps -> 0` limit of [`psi_t_peps`] as a dense state: configurations
/// with no off-diagonal loop factor, or exactly one besides the last vertex,
/// keep weight 1 and all others vanish.
pub fn limit_state_t(net: &Network, cycle: &[usize]) -> Result<DenseTensor> {
    let sites = loop_sites(net, cycle)?;
    let mu = eval_peps(&mu_peps(net)?)?;
    let dims = net.dims().to_vec();
    let radices: Vec<Vec<usize>> = (0..net.num_vertices()).map(|v| incident_bonds(net, v)).collect();
    let mut out = mu.into_data();
    for (flat, amp) in out.iter_mut().enumerate() {
        if *amp == ZERO {
            continue;
        }
        let phys = digits(flat, &dims);
        let mut power: i64 = 0;
        for s in &sites {
            let idx = digits(phys[s.vertex], &radices[s.vertex]);
            if idx[s.inbound] != idx[s.outbound] {
                power += if s.last { -1 } else { 1 };
            }
        }
        if power != 0 {
            *amp = ZERO;
        }
    }
    DenseTensor::new(dims, out)
}

/// Ring PEPS with the same amplitudes as a periodic MPS of length at least 3.
/// Vertices 0 and N-1 see their bond axes in swapped order.
pub fn from_ring_mps(mps: &MpsPbc) -> Result<Peps> {
    let n = mps.len();
    let net = Network::ring(n, 1, mps.bond_dim())?;
    let dims = mps.phys_dims();
    let net = Network::new(dims, net.edges().to_vec())?;
    let tensors = mps
        .tensors()
        .iter()
        .enumerate()
        .map(|(i, t)| if i == 0 || i + 1 == n { t.permute(&[0, 2, 1]) } else { Ok(t.clone()) })
        .collect::<Result<Vec<_>>>()?;
    Peps::new(net, tensors)
}

/// Trace-normalized density matrix of one vertex.
pub fn single_site_rho(p: &Peps, vertex: usize) -> Result<DenseTensor> {
    let psi = eval_peps(p)?;
    reduced_density_matrix(&psi, p.network.dims(), &[vertex])
}
