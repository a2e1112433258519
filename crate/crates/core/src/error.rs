// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by tensor network operations.
#[derive(Debug, Error)]
pub enum TnsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite entry at flat index {0}")]
    NonFinite(usize),
    #[error("capacity exceeded: {what} needs {needed} entries, cap is {cap}")]
    Capacity {
        what: String,
        needed: u128,
        cap: usize,
    },
    #[error("rank {rank} at {location} exceeds allowed bond dimension {allowed}")]
    Rank {
        location: String,
        rank: usize,
        allowed: usize,
    },
    #[error("normalization failure: {0}")]
    Normalization(String),
    #[error("matrix is not invertible: {0}")]
    Invertibility(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate block split: {0}")]
    Degeneracy(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("malformed artifact: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl TnsError {
    pub fn is_capacity(&self) -> bool {
        matches!(self, TnsError::Capacity { .. })
    }
}

pub type Result<T> = std::result::Result<T, TnsError>;
