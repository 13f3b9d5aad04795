use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named load with a finite set of power levels.
///
/// State 0 is always OFF at 0 W; levels are strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct ApplianceModel {
    name: String,
    states: Vec<f64>,
}

#[derive(Deserialize)]
struct RawModel {
    name: String,
    states: Vec<f64>,
}

impl TryFrom<RawModel> for ApplianceModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        ApplianceModel::new(raw.name, raw.states)
    }
}

impl ApplianceModel {
    pub fn new(name: impl Into<String>, states: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if states.len() < 2 {
            return Err(Error::InvalidModel(format!(
                "`{name}` needs at least two states"
            )));
        }
        if states[0] != 0.0 {
            return Err(Error::InvalidModel(format!("`{name}`: state 0 must be 0 W")));
        }
        if states.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidModel(format!("`{name}`: non-finite state")));
        }
        if states.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidModel(format!(
                "`{name}`: states must be strictly increasing"
            )));
        }
        Ok(Self { name, states })
    }

    /// Convenience constructor for an on/off load.
    pub fn two_state(name: impl Into<String>, on_power: f64) -> Result<Self> {
        Self::new(name, vec![0.0, on_power])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn power(&self, state: usize) -> f64 {
        self.states[state]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("<model>", e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
    }
}
