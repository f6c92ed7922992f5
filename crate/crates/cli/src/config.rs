//! JSON experiment configs: a stored config plus CLI overrides is the
//! reproducible unit for train/bench runs.

use std::path::{Path, PathBuf};

use lossbench::data::{gen_gaussian_blobs, gen_two_moons, load_csv, split, LabelColumn};
use lossbench::{Dataset, LossSpec, TrainConfig};
use serde::Deserialize;

fn default_test_fraction() -> f64 {
    0.2
}

fn default_has_header() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    TwoMoons {
        n: usize,
        noise_sd: f64,
        seed: u64,
    },
    GaussianBlobs {
        n: usize,
        centers: Vec<Vec<f64>>,
        sd: f64,
        seed: u64,
    },
    Csv {
        path: PathBuf,
        label_column: LabelColumn,
        #[serde(default = "default_has_header")]
        has_header: bool,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    pub dataset: DatasetConfig,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub split_seed: u64,
    /// Loss lineup for `bench`; ignored by `train`.
    #[serde(default)]
    pub losses: Vec<LossSpec>,
    /// Seed lineup for `bench`; ignored by `train`.
    #[serde(default)]
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("invalid config file {}: {e}", path.display()))
    }

    /// Builds the dataset and applies the stratified train/test split.
    pub fn materialize(&self) -> Result<(Dataset, Dataset), String> {
        let ds = match &self.dataset {
            DatasetConfig::TwoMoons { n, noise_sd, seed } => gen_two_moons(*n, *noise_sd, *seed),
            DatasetConfig::GaussianBlobs {
                n,
                centers,
                sd,
                seed,
            } => gen_gaussian_blobs(*n, centers, *sd, *seed),
            DatasetConfig::Csv {
                path,
                label_column,
                has_header,
            } => load_csv(path, label_column, *has_header),
        }
        .map_err(|e| format!("dataset: {e}"))?;
        split(&ds, self.test_fraction, self.split_seed).map_err(|e| format!("split: {e}"))
    }
}
