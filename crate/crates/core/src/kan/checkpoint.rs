//! JSON checkpoints: network configuration, seed and the flat parameter
//! array. Floats are written in shortest round-trip form, so a reload is
//! bit-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{KanNetwork, NetworkConfig};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    #[serde(flatten)]
    pub config: NetworkConfig,
    pub seed: u64,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn from_network(net: &KanNetwork) -> Self {
        Self {
            config: net.config().clone(),
            seed: net.seed,
            params: net.params.values.clone(),
        }
    }

    pub fn into_network(self) -> Result<KanNetwork> {
        let mut net = KanNetwork::allocate(self.config, self.seed)?;
        net.params.set_values(&self.params)?;
        Ok(net)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("checkpoint: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kan::{init_network, KanKind};

    #[test]
    fn reload_is_bit_identical() {
        for kind in [KanKind::EfficientKan, KanKind::WavKan] {
            let net = init_network(&[1, 4, 2], kind, 3).unwrap();
            let json = Checkpoint::from_network(&net).to_json();
            assert!(json.contains("\"architecture\""));
            let back = Checkpoint::from_json(&json).unwrap().into_network().unwrap();
            assert_eq!(back, net);
        }
    }

    #[test]
    fn wrong_parameter_count_is_rejected() {
        let net = init_network(&[1, 2, 1], KanKind::WavKan, 0).unwrap();
        let mut ck = Checkpoint::from_network(&net);
        ck.params.pop();
        assert!(ck.into_network().is_err());
    }
}
