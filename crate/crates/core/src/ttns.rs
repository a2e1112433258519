// SPDX-License-Identifier: Apache-2.0

//! Tree tensor network states: evaluation, exact decomposition of a state by
//! root-directed RQ sweeps, and the orthonormal form.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TnsError};
use crate::limits::check_state;
use crate::linalg::{random_complex, reduced_rq, svd, DEFAULT_RANK_TOL};
use crate::network::{contract_network, Network};
use crate::tensor::{contract, DenseTensor, C64, ZERO};

/// A loop-free connected [`Network`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Network", into = "Network")]
pub struct TreeNetwork(Network);

impl TryFrom<Network> for TreeNetwork {
    type Error = TnsError;
    fn try_from(net: Network) -> Result<Self> {
        if !net.is_tree() {
            return Err(TnsError::Invariant(format!(
                "{} edges on {} vertices is not a tree",
                net.edges().len(),
                net.num_vertices()
            )));
        }
        Ok(TreeNetwork(net))
    }
}

impl From<TreeNetwork> for Network {
    fn from(t: TreeNetwork) -> Self {
        t.0
    }
}

impl TreeNetwork {
    pub fn new(dims: Vec<usize>, edges: Vec<(usize, usize, usize)>) -> Result<Self> {
        Network::new(dims, edges)?.try_into()
    }

    pub fn network(&self) -> &Network {
        &self.0
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        v < self.0.num_vertices() && self.0.degree(v) <= 1
    }

    /// Smallest-id leaf.
    pub fn first_leaf(&self) -> usize {
        (0..self.0.num_vertices()).find(|&v| self.is_leaf(v)).unwrap_or(0)
    }

    /// Random tree on `dims.len()` vertices: vertex `v > 0` attaches to a
    /// uniformly chosen earlier vertex.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], bond: usize, rng: &mut R) -> Result<Self> {
        let edges = (1..dims.len()).map(|v| (rng.random_range(0..v), v, bond)).collect();
        TreeNetwork::new(dims.to_vec(), edges)
    }
}

/// Root-directed structure: distance order and the parent edge of each
/// non-root vertex.
struct Rooted {
    /// Non-root vertices by decreasing distance, ties by smallest id.
    order: Vec<usize>,
    /// `(edge, parent)` for every non-root vertex.
    parent: Vec<Option<(usize, usize)>>,
    /// Breadth-first order from the root.
    top_down: Vec<usize>,
}

fn rooted(net: &Network, root: usize) -> Result<Rooted> {
    let n = net.num_vertices();
    if root >= n {
        return Err(TnsError::Argument(format!("root {} out of range", root)));
    }
    if net.degree(root) > 1 {
        return Err(TnsError::Precondition(format!("root {} is not a leaf", root)));
    }
    let dist: Vec<usize> = net.distances(root).into_iter().map(|d| d.unwrap_or(0)).collect();
    let mut parent = vec![None; n];
    for v in 0..n {
        if v != root {
            parent[v] = net.incident(v).into_iter().find(|&(_, nb)| dist[nb] + 1 == dist[v]);
        }
    }
    let mut order: Vec<usize> = (0..n).filter(|&v| v != root).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(dist[v]), v));
    let mut top_down: Vec<usize> = (0..n).collect();
    top_down.sort_by_key(|&v| (dist[v], v));
    Ok(Rooted { order, parent, top_down })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTtns")]
pub struct Ttns {
    network: TreeNetwork,
    tensors: Vec<DenseTensor>,
}

#[derive(Deserialize)]
struct RawTtns {
    network: TreeNetwork,
    tensors: Vec<DenseTensor>,
}

impl TryFrom<RawTtns> for Ttns {
    type Error = TnsError;
    fn try_from(raw: RawTtns) -> Result<Self> {
        Ttns::new(raw.network, raw.tensors)
    }
}

impl Ttns {
    pub fn new(network: TreeNetwork, tensors: Vec<DenseTensor>) -> Result<Self> {
        network.network().check_tensors(&tensors)?;
        Ok(Ttns { network, tensors })
    }

    pub fn network(&self) -> &TreeNetwork {
        &self.network
    }

    pub fn tensors(&self) -> &[DenseTensor] {
        &self.tensors
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.network.network().bond_dims()
    }

    pub fn random<R: Rng + ?Sized>(network: TreeNetwork, rng: &mut R) -> Result<Self> {
        let tensors = (0..network.network().num_vertices())
            .map(|v| random_complex(&network.network().tensor_shape(v), rng))
            .collect();
        Ttns::new(network, tensors)
    }
}

pub fn eval_ttns(t: &Ttns) -> Result<DenseTensor> {
    contract_network(t.network.network(), &t.tensors)
}

/// Vertices on the far side of `edge` as seen from `root`.
pub fn subtree(net: &Network, root: usize, edge: usize) -> Result<Vec<usize>> {
    let r = rooted(net, root)?;
    let (i, j, _) = net.edges()[edge];
    let child = if r.parent[i].map(|p| p.0) == Some(edge) { i } else { j };
    let mut out = vec![child];
    let mut k = 0;
    while k < out.len() {
        let v = out[k];
        for (e, nb) in net.incident(v) {
            if r.parent[nb] == Some((e, v)) {
                out.push(nb);
            }
        }
        k += 1;
    }
    out.sort_unstable();
    Ok(out)
}

/// Axis labels of the remaining state during the upward sweep.
#[derive(Clone, Copy, PartialEq)]
enum Leg {
    Phys(usize),
    Edge(usize),
}

/// Exact TTNS of a normalized state: vertices are visited by decreasing
/// distance from the (leaf) root and split off by reduced RQ decompositions.
/// The returned network carries the realized bond dimensions.
pub fn from_state_ttns(psi: &DenseTensor, net: &TreeNetwork, root: usize) -> Result<Ttns> {
    let g = net.network();
    let dims = g.dims();
    if dims.iter().product::<usize>() != psi.len() {
        return Err(TnsError::Dimension(format!(
            "site dims {:?} do not match {} amplitudes",
            dims,
            psi.len()
        )));
    }
    let nrm = psi.norm();
    if (nrm - 1.0).abs() > 1e-8 {
        return Err(TnsError::Normalization(format!("state has norm {}, expected 1", nrm)));
    }
    check_state("state vector", dims)?;
    let r = rooted(g, root)?;
    let n = g.num_vertices();

    let mut legs: Vec<Leg> = (0..n).map(Leg::Phys).collect();
    let mut rest = psi.reshape(dims)?;
    let mut realized = g.bond_dims();
    // Per vertex: Q reshaped to (rank, d, child extents...) plus child edges.
    let mut pieces: Vec<Option<(DenseTensor, Vec<usize>)>> = vec![None; n];

    for &v in &r.order {
        let (pedge, _) = r.parent[v].expect("non-root vertex has a parent");
        let children: Vec<usize> = g
            .incident(v)
            .into_iter()
            .filter(|&(e, _)| e != pedge)
            .map(|(e, _)| e)
            .collect();
        let mut own = vec![legs.iter().position(|l| *l == Leg::Phys(v)).expect("leg present")];
        for &c in &children {
            own.push(legs.iter().position(|l| *l == Leg::Edge(c)).expect("child leg present"));
        }
        let others: Vec<usize> = (0..legs.len()).filter(|k| !own.contains(k)).collect();
        let mut perm = others.clone();
        perm.extend(&own);
        let shape = rest.shape().to_vec();
        let rows: usize = others.iter().map(|&k| shape[k]).product();
        let own_shape: Vec<usize> = own.iter().map(|&k| shape[k]).collect();
        let cols: usize = own_shape.iter().product();
        let mat = rest.permute(&perm)?.into_reshaped(&[rows, cols])?;
        let (rf, q) = reduced_rq(&mat)?;
        let rank = q.shape()[0];
        let allowed = g.edges()[pedge].2;
        if rank > allowed {
            return Err(TnsError::Rank {
                location: format!("edge {}", pedge),
                rank,
                allowed,
            });
        }
        realized[pedge] = rank;
        let mut qshape = vec![rank];
        qshape.extend(&own_shape);
        pieces[v] = Some((q.into_reshaped(&qshape)?, children));

        let mut new_shape: Vec<usize> = others.iter().map(|&k| shape[k]).collect();
        new_shape.push(rank);
        rest = rf.into_reshaped(&new_shape)?;
        let mut new_legs: Vec<Leg> = others.iter().map(|&k| legs[k]).collect();
        new_legs.push(Leg::Edge(pedge));
        legs = new_legs;
    }

    let out_net = TreeNetwork(g.with_bond_dims(&realized)?);
    let on = out_net.network();
    let mut tensors = Vec::with_capacity(n);
    for v in 0..n {
        // Target axis order: physical, then incident edges in network order.
        let inc = on.incident(v);
        let t = if v == root {
            let mut order = vec![legs.iter().position(|l| *l == Leg::Phys(v)).expect("root leg")];
            for &(e, _) in &inc {
                order.push(legs.iter().position(|l| *l == Leg::Edge(e)).expect("root edge leg"));
            }
            rest.permute(&order)?
        } else {
            let (q, children) = pieces[v].take().expect("vertex processed");
            let (pedge, _) = r.parent[v].expect("parent");
            // q axes: (parent, phys, children...).
            let mut order = vec![1];
            for &(e, _) in &inc {
                order.push(if e == pedge {
                    0
                } else {
                    2 + children.iter().position(|&c| c == e).expect("child edge")
                });
            }
            q.permute(&order)?
        };
        tensors.push(t);
    }
    Ttns::new(out_net, tensors)
}

/// Moves axis `from` of `t` to position `to`.
fn move_axis(t: &DenseTensor, from: usize, to: usize) -> Result<DenseTensor> {
    let mut order: Vec<usize> = (0..t.order()).filter(|&k| k != from).collect();
    order.insert(to, from);
    t.permute(&order)
}

/// `t` with axis `axis` multiplied by matrix `m`: `t'[.., b, ..] = sum_a t[.., a, ..] m[a, b]`.
fn apply_on_axis(t: &DenseTensor, axis: usize, m: &DenseTensor) -> Result<DenseTensor> {
    let out = contract(t, m, &[(axis, 0)])?;
    move_axis(&out, out.order() - 1, axis)
}

/// Matrix of `t` with axis `axis` as rows.
fn axis_rows(t: &DenseTensor, axis: usize) -> Result<DenseTensor> {
    let moved = move_axis(t, axis, 0)?;
    let rows = moved.shape()[0];
    let cols = moved.len() / rows.max(1);
    moved.into_reshaped(&[rows, cols])
}

/// Orthonormal form with respect to a leaf root: every non-root tensor,
/// read with its root-directed edge as rows, has orthonormal rows, and every
/// bond dimension equals the Schmidt rank of its edge bipartition.
pub fn orthonormalize_ttns(t: &Ttns, root: usize) -> Result<Ttns> {
    let g = t.network.network();
    let r = rooted(g, root)?;
    let zero_state = || TnsError::Normalization("zero state has no orthonormal form".into());
    let mut tensors = t.tensors.clone();
    let mut bonds = g.bond_dims();

    // Upward: B_v = R Q on the parent axis; R moves into the parent.
    for &v in &r.order {
        let (pedge, p) = r.parent[v].expect("parent");
        let ax = g.axis_of(v, pedge).expect("parent axis");
        let (rf, q) = reduced_rq(&axis_rows(&tensors[v], ax)?)?;
        let rank = q.shape()[0];
        if rank == 0 {
            return Err(zero_state());
        }
        let mut moved_shape = move_axis(&tensors[v], ax, 0)?.shape().to_vec();
        moved_shape[0] = rank;
        tensors[v] = move_axis(&q.into_reshaped(&moved_shape)?, 0, ax)?;
        let pax = g.axis_of(p, pedge).expect("parent side axis");
        tensors[p] = apply_on_axis(&tensors[p], pax, &rf)?;
        bonds[pedge] = rank;
    }

    // Downward: shrink each bond to the support of its root-side
    // environment. With F the environment factor (Gram matrix F†F) and
    // F = U S V†, the parent axis gets V and the child axis conj(V), which
    // keeps the child isometric. The environment of a child edge is the
    // parent tensor with its own parent axis scaled by S.
    let mut env: Vec<Vec<f64>> = vec![Vec::new(); g.edges().len()];
    for &v in &r.top_down {
        let parent_edge = r.parent[v].map(|p| p.0);
        for (e, child) in g.incident(v) {
            if Some(e) == parent_edge {
                continue;
            }
            let ax = g.axis_of(v, e).expect("child axis");
            let scaled = match parent_edge {
                None => tensors[v].clone(),
                Some(pe) => {
                    let pax = g.axis_of(v, pe).expect("parent axis");
                    let s = &env[pe];
                    let diag = DenseTensor::from_fn(&[s.len(), s.len()], |i| {
                        if i[0] == i[1] {
                            C64::new(s[i[0]], 0.0)
                        } else {
                            ZERO
                        }
                    });
                    apply_on_axis(&tensors[v], pax, &diag)?
                }
            };
            let f = axis_rows(&scaled, ax)?.transpose()?;
            let dec = svd(&f, DEFAULT_RANK_TOL)?;
            if dec.rank == 0 {
                return Err(zero_state());
            }
            let w = dec.vdag_rows(dec.rank).adjoint()?;
            tensors[v] = apply_on_axis(&tensors[v], ax, &w)?;
            let cax = g.axis_of(child, e).expect("child side axis");
            tensors[child] = apply_on_axis(&tensors[child], cax, &w.conj())?;
            env[e] = dec.s[..dec.rank].to_vec();
            bonds[e] = dec.rank;
        }
    }
    let out_net = TreeNetwork(g.with_bond_dims(&bonds)?);
    Ttns::new(out_net, tensors)
}

/// Largest deviation from `B B† = 1` over non-root tensors, rows on the
/// root-directed edge.
pub fn orthonormality_residual(t: &Ttns, root: usize) -> Result<f64> {
    let g = t.network.network();
    let r = rooted(g, root)?;
    let mut worst: f64 = 0.0;
    for &v in &r.order {
        let (pedge, _) = r.parent[v].expect("parent");
        let m = axis_rows(&t.tensors[v], g.axis_of(v, pedge).expect("axis"))?;
        worst = worst.max(crate::linalg::identity_residual(&m.matmul(&m.adjoint()?)?)?);
    }
    Ok(worst)
}
