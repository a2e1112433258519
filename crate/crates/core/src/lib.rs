// SPDX-License-Identifier: Apache-2.0

//! Desk-scale numerics for tensor network state sets.

pub mod artifact;
pub mod error;
pub mod geometry;
pub mod limits;
pub mod linalg;
pub mod mera;
pub mod mps_obc;
pub mod mps_pbc;
pub mod network;
pub mod optimize;
pub mod peps;
pub mod report;
pub mod tensor;
pub mod ttns;
pub mod zoo;

pub use artifact::Artifact;
pub use error::{Result, TnsError};
pub use linalg::{matrix_rank, nullspace, reduced_rq, svd, SvdResult};
pub use mera::Mera;
pub use mps_obc::MpsObc;
pub use mps_pbc::MpsPbc;
pub use network::Network;
pub use optimize::{Objective, Params, Regularization, RunTrace, Termination};
pub use peps::Peps;
pub use tensor::{contract, DenseTensor, C64};
pub use ttns::{TreeNetwork, Ttns};
