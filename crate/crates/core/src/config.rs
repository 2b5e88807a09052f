//! Run configuration: one JSON file covering training, both agents, sweep
//! defaults and the output directory.
//!
//! Values resolve as command-line flags, then the `ADVSAC_OUT_DIR`
//! environment variable (output directory only), then the file, then the
//! defaults below.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::checkpoint::{read_json, write_json};
use crate::error::{Error, Result};
use crate::eval::{DEFAULT_AMPLITUDES, DEFAULT_EPISODES_PER_CELL};
use crate::trainer::TrainerConfig;

pub const SCHEMA_VERSION: u32 = 1;
pub const OUT_DIR_ENV: &str = "ADVSAC_OUT_DIR";
pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.json";

/// Defaults for evaluation sweeps. The sweep seed is the training seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepDefaults {
    pub amplitudes: Vec<f64>,
    pub episodes_per_cell: usize,
    pub deterministic_policy: bool,
    /// Evaluation worker threads. Results do not depend on it.
    pub jobs: usize,
}

impl Default for SweepDefaults {
    fn default() -> Self {
        SweepDefaults {
            amplitudes: DEFAULT_AMPLITUDES.to_vec(),
            episodes_per_cell: DEFAULT_EPISODES_PER_CELL,
            deterministic_policy: true,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub out_dir: PathBuf,
    pub train: TrainerConfig,
    pub sweep: SweepDefaults,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            out_dir: PathBuf::from("runs"),
            train: TrainerConfig::default(),
            sweep: SweepDefaults::default(),
        }
    }
}

impl RunConfig {
    /// Parses a config document. The schema version must be present and
    /// current; everything else falls back to defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::Config(format!(
                    "config schema_version {v} is not supported (expected {SCHEMA_VERSION})"
                )))
            }
            None => return Err(Error::Config("config is missing schema_version".into())),
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Defaults, or the file when one is given.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    /// Applies the output-directory environment override, given its value.
    pub fn with_out_dir_override(mut self, value: Option<String>) -> Self {
        if let Some(v) = value.filter(|v| !v.is_empty()) {
            self.out_dir = PathBuf::from(v);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("schema_version must be {SCHEMA_VERSION}")));
        }
        if self.sweep.episodes_per_cell == 0 {
            return Err(Error::Config("sweep.episodes_per_cell must be positive".into()));
        }
        if self.sweep.jobs == 0 {
            return Err(Error::Config("sweep.jobs must be positive".into()));
        }
        self.train.validate()?;
        Ok(())
    }

    /// Fully resolved form: trainer defaults filled in.
    pub fn effective(&self) -> Result<RunConfig> {
        self.validate()?;
        Ok(RunConfig { train: self.train.effective()?, ..self.clone() })
    }

    /// Writes the resolved config into `dir`.
    pub fn write_effective(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(EFFECTIVE_CONFIG_FILE);
        write_json(&path, &self.effective()?)?;
        Ok(path)
    }

    pub fn read_effective(dir: &Path) -> Result<RunConfig> {
        read_json(&dir.join(EFFECTIVE_CONFIG_FILE))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_takes_defaults() {
        let cfg = RunConfig::from_json(r#"{"schema_version": 1}"#).unwrap();
        assert_eq!(cfg, RunConfig::default());
        let cfg =
            RunConfig::from_json(r#"{"schema_version": 1, "train": {"env_id": "pointgoal", "n_iter": 3}}"#).unwrap();
        assert_eq!(cfg.train.n_iter, 3);
        assert_eq!(cfg.train.m_protagonist_episodes, 50);
    }

    #[test]
    fn unknown_fields_and_versions_are_rejected() {
        for bad in [
            r#"{}"#,
            r#"{"schema_version": 2}"#,
            r#"{"schema_version": 1, "learning_rate": 1}"#,
            r#"{"schema_version": 1, "train": {"protagonist": {"lr": 1}}}"#,
            r#"{"schema_version": 1, "train": {"env_id": "cartpole"}}"#,
            r#"{"schema_version": 1, "sweep": {"jobs": 0}}"#,
        ] {
            assert!(matches!(RunConfig::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
        assert!(matches!(RunConfig::from_json("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn environment_override_replaces_file_value() {
        let cfg = RunConfig::default().with_out_dir_override(Some("/tmp/x".into()));
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/x"));
        let cfg = RunConfig::default().with_out_dir_override(Some(String::new()));
        assert_eq!(cfg.out_dir, PathBuf::from("runs"));
    }

    #[test]
    fn effective_config_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::default();
        cfg.train.env_id = "pointgoal".into();
        cfg.write_effective(dir.path()).unwrap();
        let back = RunConfig::read_effective(dir.path()).unwrap();
        assert_eq!(back, cfg.effective().unwrap());
        assert!(back.train.her.is_none());
        let text = std::fs::read_to_string(dir.path().join(EFFECTIVE_CONFIG_FILE)).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), back);
    }
}
