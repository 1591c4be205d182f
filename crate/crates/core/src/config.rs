//! Run configuration shared by every subcommand.
//!
//! Values come from three layers, later ones winning: built-in defaults, the
//! JSON file given with `--config` (missing fields keep their defaults), and
//! command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arraysim::ArrayConfig;
use crate::inverse::GaConfig;
use crate::netcalc::SwitchModel;
use crate::oracle::{Oracle, OracleConstants};
use crate::pattern::GeometryMeta;
use crate::surrogate::{SurrogateArch, TrainConfig};
use crate::{Error, Result};

/// Seeds not owned by a sub-config; training and GA seeds live in `train`
/// and `ga`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Seeds {
    pub dataset: u64,
    pub init: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { dataset: 1, init: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub oracle: OracleConstants,
    pub geometry: GeometryMeta,
    pub switch: SwitchModel,
    pub arch: SurrogateArch,
    pub train: TrainConfig,
    pub ga: GaConfig,
    pub array: ArrayConfig,
    pub seeds: Seeds,
    pub n_samples: usize,
    /// Weight of out-of-band anchor points.
    pub anchor_weight: f64,
    /// Reference phase added to every element, radians.
    pub ref_phase: f64,
    /// Frequency at which the coding matrix is synthesised, Hz.
    pub design_freq_hz: f64,
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            oracle: OracleConstants::default(),
            geometry: GeometryMeta::default(),
            switch: SwitchModel::default(),
            arch: SurrogateArch::default(),
            train: TrainConfig::default(),
            ga: GaConfig::default(),
            array: ArrayConfig::default(),
            seeds: Seeds::default(),
            n_samples: crate::dataset::DEFAULT_SAMPLES,
            anchor_weight: 1.0,
            ref_phase: 0.0,
            design_freq_hz: 5.8e9,
            out_dir: "out".into(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingArtifact(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.oracle.validate()?;
        self.geometry.validate()?;
        self.switch.validate()?;
        self.arch.validate()?;
        self.train.validate()?;
        self.ga.validate()?;
        self.array.validate()?;
        if !(self.anchor_weight >= 0.0) || !(self.design_freq_hz > 0.0) {
            return Err(Error::InvalidArgument("anchor_weight and design_freq_hz must be positive".into()));
        }
        Ok(())
    }

    pub fn oracle(&self) -> Result<Oracle> {
        Oracle::new(self.oracle, self.geometry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_is_default() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn partial_override() {
        let cfg = RunConfig::from_json(r#"{"ga": {"population": 50, "seed": 3}, "seeds": {"init": 4}}"#).unwrap();
        assert_eq!(cfg.ga.population, 50);
        assert_eq!(cfg.ga.generations, 300);
        assert_eq!(cfg.ga.seed, 3);
        assert_eq!(cfg.seeds.init, 4);
        assert_eq!(cfg.seeds.dataset, 1);
    }

    #[test]
    fn round_trip_and_rejects() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        assert!(RunConfig::from_json(r#"{"ga": {"population": 1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"arch": {"hidden": []}}"#).is_err());
        assert!(RunConfig::from_json("[").is_err());
    }
}
