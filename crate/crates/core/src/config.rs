//! Pipeline configuration file (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::balance::BalanceTargets;
use crate::error::{Error, Result};
use crate::feature_select::DEFAULT_BINS;
use crate::tree::LearnerParams;

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

/// Every setting a pipeline stage can take from a file; command-line flags
/// override these.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub learner: LearnerParams,
    pub balance: Option<BalanceTargets>,
    pub feature_bins: usize,
    pub folds: usize,
    pub paths: Paths,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            learner: LearnerParams::default(),
            balance: None,
            feature_bins: DEFAULT_BINS,
            folds: DEFAULT_FOLDS,
            paths: Paths::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}
