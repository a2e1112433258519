// SPDX-License-Identifier: Apache-2.0

//! Self-describing JSON files for states and networks.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TnsError};
use crate::limits::check_state;
use crate::mera::{eval_mera, Mera};
use crate::mps_obc::{eval_obc, MpsObc};
use crate::mps_pbc::{eval_pbc, MpsPbc};
use crate::peps::{eval_peps, Peps};
use crate::tensor::DenseTensor;
use crate::ttns::{eval_ttns, Ttns};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Artifact {
    /// Dense amplitudes, one axis per site.
    State { amplitudes: DenseTensor },
    MpsObc(MpsObc),
    MpsPbc(MpsPbc),
    Ttns(Ttns),
    Mera(Mera),
    Peps(Peps),
}

impl Artifact {
    pub fn kind(&self) -> &'static str {
        match self {
            Artifact::State { .. } => "state",
            Artifact::MpsObc(_) => "mps_obc",
            Artifact::MpsPbc(_) => "mps_pbc",
            Artifact::Ttns(_) => "ttns",
            Artifact::Mera(_) => "mera",
            Artifact::Peps(_) => "peps",
        }
    }

    /// Dense amplitudes, subject to the state-size cap.
    pub fn state(&self) -> Result<DenseTensor> {
        match self {
            Artifact::State { amplitudes } => {
                check_state("state", amplitudes.shape())?;
                Ok(amplitudes.clone())
            }
            Artifact::MpsObc(m) => eval_obc(m),
            Artifact::MpsPbc(m) => eval_pbc(m),
            Artifact::Ttns(t) => eval_ttns(t),
            Artifact::Mera(m) => eval_mera(m),
            Artifact::Peps(p) => eval_peps(p),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")
            .map_err(|e| TnsError::Format(format!("writing {}: {}", path.display(), e)))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| TnsError::Format(format!("reading {}: {}", path.display(), e)))?;
        Artifact::from_json(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mera::random_mera;
    use crate::network::Network;
    use crate::peps::mu_peps;
    use crate::ttns::TreeNetwork;
    use crate::zoo::{aklt_tensor, w_obc_mps, w_state};
    use rand::SeedableRng;

    #[test]
    fn every_kind_round_trips() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let tree = TreeNetwork::random(&[2, 2, 2, 2], 2, &mut rng).unwrap();
        let arts = vec![
            Artifact::State { amplitudes: w_state(3, 2).unwrap() },
            Artifact::MpsObc(w_obc_mps(4).unwrap()),
            Artifact::MpsPbc(MpsPbc::uniform(&aklt_tensor(), 4).unwrap()),
            Artifact::Ttns(Ttns::random(tree, &mut rng).unwrap()),
            Artifact::Mera(random_mera(4, 2, 2, 3).unwrap()),
            Artifact::Peps(mu_peps(&Network::grid(2, 2, 4, 2).unwrap().with_pair_dims().unwrap()).unwrap()),
        ];
        for a in arts {
            let s = a.to_json().unwrap();
            assert!(s.contains(&format!("\"kind\": \"{}\"", a.kind())));
            let back = Artifact::from_json(&s).unwrap();
            assert_eq!(back, a);
            assert!(back.state().unwrap().max_abs_diff(&a.state().unwrap()) == 0.0);
        }
    }

    #[test]
    fn invalid_payload_is_rejected() {
        let bad = r#"{"kind":"mps_obc","tensors":[{"shape":[2,1,2],"data":[[1,0],[0,0],[0,0],[1,0]]},{"shape":[2,3,1],"data":[[1,0],[0,0],[0,0],[1,0],[0,0],[0,0]]}]}"#;
        assert!(Artifact::from_json(bad).is_err());
        assert!(Artifact::from_json(r#"{"kind":"nothing"}"#).is_err());
    }
}
