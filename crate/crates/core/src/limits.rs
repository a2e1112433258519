// SPDX-License-Identifier: Apache-2.0

//! Desk-scale capacity caps.
//!
//! Two caps exist: full state vectors are limited to `2^20` amplitudes and any
//! intermediate tensor produced during a contraction to `2^24` entries. The
//! environment variable `TNS_CAPACITY_CAP` overrides the intermediate cap (and
//! lowers the state cap when it is smaller); it is read once per process.

use std::sync::OnceLock;

use crate::error::{Result, TnsError};

pub const DEFAULT_STATE_CAP: usize = 1 << 20;
pub const DEFAULT_INTERMEDIATE_CAP: usize = 1 << 24;
pub const CAPACITY_ENV: &str = "TNS_CAPACITY_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_state: usize,
    pub max_intermediate: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_state: DEFAULT_STATE_CAP,
            max_intermediate: DEFAULT_INTERMEDIATE_CAP,
        }
    }
}

impl Limits {
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(cap) = std::env::var(CAPACITY_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            limits.max_intermediate = cap;
            limits.max_state = DEFAULT_STATE_CAP.min(cap);
        }
        limits
    }
}

/// Process-wide limits.
pub fn limits() -> Limits {
    static LIMITS: OnceLock<Limits> = OnceLock::new();
    *LIMITS.get_or_init(Limits::from_env)
}

/// Product of extents, saturating into `u128` so overflow is reported as a
/// capacity failure rather than wrapping.
pub fn product(dims: &[usize]) -> u128 {
    dims.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
}

pub fn check_state(what: &str, dims: &[usize]) -> Result<usize> {
    check(what, product(dims), limits().max_state)
}

pub fn check_intermediate(what: &str, needed: u128) -> Result<usize> {
    check(what, needed, limits().max_intermediate)
}

fn check(what: &str, needed: u128, cap: usize) -> Result<usize> {
    if needed > cap as u128 {
        Err(TnsError::Capacity {
            what: what.to_string(),
            needed,
            cap,
        })
    } else {
        Ok(needed as usize)
    }
}
