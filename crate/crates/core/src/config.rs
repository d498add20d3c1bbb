//! Run configuration shared by the CLI and the examples.

use serde::{Deserialize, Serialize};

use crate::datacon::DataconConfig;
use crate::device::{ConfigError, DeviceConfig};
use crate::mneme::MnemeConfig;
use crate::reneu::{AgingCoefficients, ClusterStrategy};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReneuConfig {
    pub coefficients: AgingCoefficients,
    pub strategy: ClusterStrategy,
}

/// Every section is optional; missing fields take their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub seed: u64,
    pub device: DeviceConfig,
    pub datacon: DataconConfig,
    pub mneme: MnemeConfig,
    pub reneu: ReneuConfig,
}

impl SimConfig {
    /// Parses and validates; errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: SimConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(if path == "." { String::new() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.device.validate()?;
        self.datacon.validate()?;
        self.mneme.validate()?;
        self.reneu.coefficients.validate()
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
