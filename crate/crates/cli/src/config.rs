use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ttedopa::model::{InitialState, WSCP_CROSS_COUPLING};
use ttedopa::tebd::ObservableSpec;
use ttedopa::{EvolutionConfig, ModelSpec, SpectralDensity};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    DephasingWscp,
    DimerWscp,
    Custom,
}

/// Everything a `simulate` run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub preset: Preset,
    /// Required for `custom`; bath temperatures are replaced by each entry
    /// of `temperatures`.
    #[serde(default)]
    pub model: Option<ModelSpec>,
    pub temperatures: Vec<f64>,
    pub evolution: EvolutionConfig,
    /// Fixed chain length; mutually exclusive with `auto_chain_length`.
    #[serde(default)]
    pub chain_length: Option<usize>,
    #[serde(default)]
    pub auto_chain_length: bool,
    #[serde(default = "default_threshold")]
    pub return_threshold: f64,
    #[serde(default = "default_cap")]
    pub chain_length_cap: usize,
    pub d_max: usize,
    /// Explicit per-site Fock dimensions, overriding the `d_max` schedule.
    #[serde(default)]
    pub local_dims: Option<Vec<usize>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_threshold() -> f64 {
    1e-6
}

fn default_cap() -> usize {
    2000
}

impl RunConfig {
    /// Desk-scale defaults of a preset.
    pub fn preset(preset: Preset) -> Result<Self, CliError> {
        let (observables, chi, d_max, t_max) = match preset {
            Preset::DephasingWscp => (
                vec![
                    ObservableSpec::Coherence { system: 0 },
                    ObservableSpec::SigmaX { system: 0 },
                    ObservableSpec::SigmaY { system: 0 },
                ],
                50,
                6,
                0.3,
            ),
            Preset::DimerWscp => (
                vec![ObservableSpec::PPlus, ObservableSpec::SigmaZ { system: 0 }],
                180,
                6,
                0.2,
            ),
            Preset::Custom => {
                return Err(CliError::Validation(
                    "the custom preset needs a --config file with a model".into(),
                ))
            }
        };
        let mut evolution = EvolutionConfig::new(2.5e-4, t_max, chi, observables);
        evolution.stride = 40;
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            preset,
            model: None,
            temperatures: vec![0.0],
            evolution,
            chain_length: None,
            auto_chain_length: true,
            return_threshold: default_threshold(),
            chain_length_cap: default_cap(),
            d_max,
            local_dims: None,
            output: None,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        // a run manifest carries its resolved configuration under `config`
        let value = match value.get("config") {
            Some(cfg) if value.get("kind").and_then(|k| k.as_str()) == Some("run-manifest") => cfg.clone(),
            _ => value,
        };
        serde_json::from_value(value).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        if self.temperatures.is_empty() {
            return Err(CliError::Validation("temperatures: at least one is required".into()));
        }
        if let Some(t) = self.temperatures.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(CliError::Validation(format!("temperatures: {t} K is not >= 0")));
        }
        match (self.chain_length, self.auto_chain_length) {
            (Some(_), true) => {
                return Err(CliError::Validation(
                    "chain_length and auto_chain_length are mutually exclusive".into(),
                ))
            }
            (None, false) => {
                return Err(CliError::Validation(
                    "chain_length: give a length or set auto_chain_length".into(),
                ))
            }
            (Some(0), _) => return Err(CliError::Validation("chain_length: must be >= 1".into())),
            _ => {}
        }
        if self.d_max < 2 {
            return Err(CliError::Validation(format!("d_max: must be >= 2, got {}", self.d_max)));
        }
        if let Some(dims) = &self.local_dims {
            if dims.iter().any(|&d| d < 2) {
                return Err(CliError::Validation("local_dims: every entry must be >= 2".into()));
            }
            if let Some(n) = self.chain_length {
                if dims.len() != n {
                    return Err(CliError::Validation(format!(
                        "local_dims: {} entries for a chain of {n}",
                        dims.len()
                    )));
                }
            }
        }
        if !(self.return_threshold > 0.0 && self.return_threshold < 1.0) {
            return Err(CliError::Validation("return_threshold: must lie in (0, 1)".into()));
        }
        if self.preset == Preset::Custom && self.model.is_none() {
            return Err(CliError::Validation("model: required for the custom preset".into()));
        }
        self.evolution
            .validate()
            .map_err(|e| CliError::Validation(format!("evolution: {e}")))
    }

    /// Model at one temperature.
    pub fn model_at(&self, kelvin: f64) -> ModelSpec {
        let mut model = match (&self.model, self.preset) {
            (Some(m), _) => m.clone(),
            (None, Preset::DimerWscp) => ModelSpec::dimer(SpectralDensity::wscp(), kelvin, WSCP_CROSS_COUPLING),
            (None, _) => ModelSpec::dephasing(SpectralDensity::wscp(), kelvin),
        };
        for bath in &mut model.baths {
            bath.temperature = kelvin;
        }
        if self.preset == Preset::DimerWscp && self.model.is_none() {
            model.initial_state = InitialState::PlusD;
        }
        model
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        RunConfig::preset(Preset::DephasingWscp).unwrap().validate().unwrap();
        RunConfig::preset(Preset::DimerWscp).unwrap().validate().unwrap();
        assert!(RunConfig::preset(Preset::Custom).is_err());
    }

    #[test]
    fn negative_temperature_names_the_field() {
        let mut cfg = RunConfig::preset(Preset::DephasingWscp).unwrap();
        cfg.temperatures = vec![-5.0];
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("temperatures"), "{msg}");
    }

    #[test]
    fn exclusive_chain_length_options() {
        let mut cfg = RunConfig::preset(Preset::DephasingWscp).unwrap();
        cfg.chain_length = Some(10);
        assert!(cfg.validate().is_err());
        cfg.auto_chain_length = false;
        cfg.validate().unwrap();
    }

    #[test]
    fn dimer_preset_model() {
        let cfg = RunConfig::preset(Preset::DimerWscp).unwrap();
        let m = cfg.model_at(300.0);
        assert_eq!(m.cross_coupling, 69.0);
        assert_eq!(m.baths.len(), 2);
        assert!(m.baths.iter().all(|b| b.temperature == 300.0));
    }
}
