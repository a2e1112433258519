// SPDX-License-Identifier: Apache-2.0

//! Graphs with site and bond dimensions, and exact contraction of one tensor
//! per vertex.
//!
//! Vertices are numbered from 0. The tensor of vertex `v` carries its
//! physical axis first, then one axis per incident edge ordered by
//! `(neighbor id, edge index)`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TnsError};
use crate::limits::{check_intermediate, check_state, product};
use crate::tensor::{contract, DenseTensor};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork")]
pub struct Network {
    dims: Vec<usize>,
    edges: Vec<(usize, usize, usize)>,
}

#[derive(Deserialize)]
struct RawNetwork {
    dims: Vec<usize>,
    edges: Vec<(usize, usize, usize)>,
}

impl TryFrom<RawNetwork> for Network {
    type Error = TnsError;
    fn try_from(raw: RawNetwork) -> Result<Self> {
        Network::new(raw.dims, raw.edges)
    }
}

impl Network {
    /// Checks ranges, positivity and connectivity.
    pub fn new(dims: Vec<usize>, edges: Vec<(usize, usize, usize)>) -> Result<Self> {
        if dims.is_empty() {
            return Err(TnsError::Dimension("a network needs at least one vertex".into()));
        }
        if let Some(v) = dims.iter().position(|&d| d == 0) {
            return Err(TnsError::Dimension(format!("vertex {} has site dimension 0", v)));
        }
        for (k, &(i, j, m)) in edges.iter().enumerate() {
            if i >= dims.len() || j >= dims.len() {
                return Err(TnsError::Dimension(format!("edge {} joins missing vertices ({}, {})", k, i, j)));
            }
            if i == j {
                return Err(TnsError::Dimension(format!("edge {} is a self-loop at {}", k, i)));
            }
            if m == 0 {
                return Err(TnsError::Dimension(format!("edge {} has bond dimension 0", k)));
            }
        }
        let net = Network { dims, edges };
        if !net.is_connected() {
            return Err(TnsError::Invariant("network is not connected".into()));
        }
        Ok(net)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn edges(&self) -> &[(usize, usize, usize)] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.dims.len()
    }

    /// `(edge index, neighbor)` pairs of `v` in axis order.
    pub fn incident(&self, v: usize) -> Vec<(usize, usize)> {
        let mut inc: Vec<(usize, usize)> = self
            .edges
            .iter()
            .enumerate()
            .filter_map(|(k, &(i, j, _))| {
                if i == v {
                    Some((k, j))
                } else if j == v {
                    Some((k, i))
                } else {
                    None
                }
            })
            .collect();
        inc.sort_by_key(|&(k, nb)| (nb, k));
        inc
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident(v).len()
    }

    /// Axis of `v`'s tensor that carries edge `e`.
    pub fn axis_of(&self, v: usize, e: usize) -> Option<usize> {
        self.incident(v).iter().position(|&(k, _)| k == e).map(|p| p + 1)
    }

    /// Expected tensor shape at `v`.
    pub fn tensor_shape(&self, v: usize) -> Vec<usize> {
        let mut shape = vec![self.dims[v]];
        shape.extend(self.incident(v).iter().map(|&(k, _)| self.edges[k].2));
        shape
    }

    pub fn with_bond_dims(&self, bonds: &[usize]) -> Result<Self> {
        if bonds.len() != self.edges.len() {
            return Err(TnsError::Dimension("one bond dimension per edge required".into()));
        }
        let edges = self.edges.iter().zip(bonds).map(|(&(i, j, _), &m)| (i, j, m)).collect();
        Network::new(self.dims.clone(), edges)
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.2).collect()
    }

    fn is_connected(&self) -> bool {
        self.distances(0).iter().all(|d| d.is_some())
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.dims.len()
    }

    /// Graph distances from `root`.
    pub fn distances(&self, root: usize) -> Vec<Option<usize>> {
        let n = self.dims.len();
        let mut adj = vec![Vec::new(); n];
        for &(i, j, _) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut dist = vec![None; n];
        dist[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap_or(0);
            for &w in &adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Validates per-vertex tensors against this network.
    pub fn check_tensors(&self, tensors: &[DenseTensor]) -> Result<()> {
        if tensors.len() != self.dims.len() {
            return Err(TnsError::Dimension(format!(
                "{} tensors for {} vertices",
                tensors.len(),
                self.dims.len()
            )));
        }
        for (v, t) in tensors.iter().enumerate() {
            let expected = self.tensor_shape(v);
            if t.shape() != expected.as_slice() {
                return Err(TnsError::Dimension(format!(
                    "vertex {} tensor has shape {:?}, expected {:?}",
                    v,
                    t.shape(),
                    expected
                )));
            }
        }
        Ok(())
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(dims: &[usize], bonds: &[usize]) -> Result<Self> {
        if bonds.len() + 1 != dims.len() {
            return Err(TnsError::Dimension("path needs one bond per consecutive pair".into()));
        }
        Network::new(dims.to_vec(), (0..bonds.len()).map(|i| (i, i + 1, bonds[i])).collect())
    }

    /// Ring `0 - 1 - ... - (n-1) - 0`; edge `i` joins `i` and `i+1 mod n`.
    pub fn ring(n: usize, d: usize, m: usize) -> Result<Self> {
        if n < 3 {
            return Err(TnsError::Argument("a ring needs at least 3 vertices".into()));
        }
        Network::new(vec![d; n], (0..n).map(|i| (i, (i + 1) % n, m)).collect())
    }

    /// Open `rows x cols` grid, vertex `(r, c)` at index `r * cols + c`.
    /// Horizontal edges come first, then vertical ones.
    pub fn grid(rows: usize, cols: usize, d: usize, m: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols.saturating_sub(1) {
                edges.push((r * cols + c, r * cols + c + 1, m));
            }
        }
        for r in 0..rows.saturating_sub(1) {
            for c in 0..cols {
                edges.push((r * cols + c, (r + 1) * cols + c, m));
            }
        }
        Network::new(vec![d; rows * cols], edges)
    }

    /// Same edges with site dimensions set to the product of incident bond
    /// dimensions, as needed by entangled-pair states.
    pub fn with_pair_dims(&self) -> Result<Self> {
        let dims = (0..self.dims.len())
            .map(|v| self.incident(v).iter().map(|&(k, _)| self.edges[k].2).product())
            .collect();
        Network::new(dims, self.edges.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Phys(usize),
    Edge(usize),
}

struct Cluster {
    tensor: DenseTensor,
    labels: Vec<Label>,
}

/// Exact contraction of all bonds. The result has shape `dims` in vertex
/// order. Pairs of clusters are merged greedily, smallest intermediate
/// first, ties broken by the smallest shared edge index.
pub fn contract_network(net: &Network, tensors: &[DenseTensor]) -> Result<DenseTensor> {
    net.check_tensors(tensors)?;
    check_state("network state", net.dims())?;
    let mut clusters: Vec<Cluster> = tensors
        .iter()
        .enumerate()
        .map(|(v, t)| {
            let mut labels = vec![Label::Phys(v)];
            labels.extend(net.incident(v).iter().map(|&(k, _)| Label::Edge(k)));
            Cluster { tensor: t.clone(), labels }
        })
        .collect();

    while clusters.len() > 1 {
        let mut best: Option<(u128, usize, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let shared: Vec<usize> = clusters[a]
                    .labels
                    .iter()
                    .filter_map(|l| match l {
                        Label::Edge(k) if clusters[b].labels.contains(l) => Some(*k),
                        _ => None,
                    })
                    .collect();
                let Some(&min_edge) = shared.iter().min() else { continue };
                let free = |c: &Cluster| -> Vec<usize> {
                    c.labels
                        .iter()
                        .zip(c.tensor.shape())
                        .filter(|(l, _)| !matches!(l, Label::Edge(k) if shared.contains(k)))
                        .map(|(_, &x)| x)
                        .collect()
                };
                let mut sizes = free(&clusters[a]);
                sizes.extend(free(&clusters[b]));
                let size = product(&sizes);
                let key = (size, min_edge, a, b);
                if best.is_none_or(|bk| (key.0, key.1) < (bk.0, bk.1)) {
                    best = Some(key);
                }
            }
        }
        let (size, _, a, b) = match best {
            Some(k) => k,
            // Disconnected pieces: take an outer product of the first two.
            None => {
                let sizes: Vec<usize> = clusters[0].tensor.shape().iter().chain(clusters[1].tensor.shape()).copied().collect();
                (product(&sizes), 0, 0, 1)
            }
        };
        check_intermediate("network contraction", size)?;
        let cb = clusters.remove(b);
        let ca = clusters.remove(a);
        let mut pairs = Vec::new();
        for (ia, la) in ca.labels.iter().enumerate() {
            if let Label::Edge(_) = la {
                if let Some(ib) = cb.labels.iter().position(|lb| lb == la) {
                    pairs.push((ia, ib));
                }
            }
        }
        let tensor = contract(&ca.tensor, &cb.tensor, &pairs)?;
        let mut labels: Vec<Label> = ca
            .labels
            .iter()
            .enumerate()
            .filter(|(i, _)| !pairs.iter().any(|p| p.0 == *i))
            .map(|(_, l)| *l)
            .collect();
        labels.extend(
            cb.labels
                .iter()
                .enumerate()
                .filter(|(i, _)| !pairs.iter().any(|p| p.1 == *i))
                .map(|(_, l)| *l),
        );
        clusters.insert(a, Cluster { tensor, labels });
    }

    let last = clusters.pop().expect("at least one cluster");
    let perm: Vec<usize> = (0..net.num_vertices())
        .map(|v| last.labels.iter().position(|l| *l == Label::Phys(v)).expect("every vertex contracted"))
        .collect();
    last.tensor.permute(&perm)
}
