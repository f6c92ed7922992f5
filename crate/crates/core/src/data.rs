//! Synthetic dataset generators, CSV ingestion, label encoding and
//! deterministic stratified splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },
    #[error("file contains no data rows")]
    EmptyData,
    #[error("label column {0:?} not found")]
    MissingColumn(String),
    #[error("non-numeric feature at row {row}, column {col}: {value:?}")]
    NonNumericFeature {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("need at least {0} centers")]
    BadCenters(usize),
    #[error("degenerate split: train {train} / test {test}")]
    DegenerateSplit { train: usize, test: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Feature matrix with dense integer class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// One-hot view of the labels: N rows of `class_count` components.
    pub fn one_hot_labels(&self) -> Vec<Vec<f64>> {
        one_hot(&self.labels, self.class_count)
    }

    /// Pairs (x, one-hot y) ready for `Network::backward`.
    pub fn samples(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        self.features
            .iter()
            .cloned()
            .zip(self.one_hot_labels())
            .collect()
    }
}

/// Two interleaved half-circles with Gaussian coordinate noise. Class 0 is
/// the upper arc of the unit circle at the origin, class 1 the lower arc
/// shifted to (1, 0.5). Balanced within one sample.
pub fn gen_two_moons(n: usize, noise_sd: f64, seed: u64) -> Result<Dataset, DataError> {
    if n < 2 {
        return Err(DataError::InvalidArgument(format!(
            "two moons needs n >= 2, got {n}"
        )));
    }
    if noise_sd < 0.0 {
        return Err(DataError::InvalidArgument(format!(
            "noise_sd must be non-negative, got {noise_sd}"
        )));
    }
    let n0 = n.div_ceil(2);
    let n1 = n - n0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd.max(f64::MIN_POSITIVE)).unwrap();
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let sample = |cx: f64, cy: f64, rng: &mut ChaCha8Rng| {
        if noise_sd > 0.0 {
            [cx + noise.sample(rng), cy + noise.sample(rng)]
        } else {
            [cx, cy]
        }
    };
    for i in 0..n0 {
        let t = PI * i as f64 / (n0 - 1).max(1) as f64;
        let p = sample(t.cos(), t.sin(), &mut rng);
        features.push(p.to_vec());
        labels.push(0);
    }
    for i in 0..n1 {
        let t = PI * i as f64 / (n1 - 1).max(1) as f64;
        let p = sample(1.0 - t.cos(), 0.5 - t.sin(), &mut rng);
        features.push(p.to_vec());
        labels.push(1);
    }
    Ok(Dataset {
        features,
        labels,
        class_count: 2,
        feature_names: None,
    })
}

/// Isotropic Gaussian clusters, one class per center, sizes equal within one.
pub fn gen_gaussian_blobs(
    n: usize,
    centers: &[Vec<f64>],
    sd: f64,
    seed: u64,
) -> Result<Dataset, DataError> {
    if centers.len() < 2 {
        return Err(DataError::BadCenters(2));
    }
    let dim = centers[0].len();
    if dim == 0 || centers.iter().any(|c| c.len() != dim) {
        return Err(DataError::InvalidArgument(
            "centers must share a positive dimension".into(),
        ));
    }
    if !(sd > 0.0) {
        return Err(DataError::InvalidArgument(format!(
            "sd must be positive, got {sd}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sd).unwrap();
    let k = centers.len();
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (class, center) in centers.iter().enumerate() {
        let count = n / k + usize::from(class < n % k);
        for _ in 0..count {
            let point: Vec<f64> = center.iter().map(|&c| c + noise.sample(&mut rng)).collect();
            features.push(point);
            labels.push(class);
        }
    }
    Ok(Dataset {
        features,
        labels,
        class_count: k,
        feature_names: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

/// Loads a numeric CSV, mapping label values to dense integers by first
/// appearance order.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &LabelColumn,
    has_header: bool,
) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(false)
        .from_path(path.as_ref())?;

    let headers: Option<Vec<String>> = if has_header {
        Some(reader.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut records = reader.records();
    let first = match records.next() {
        Some(r) => r?,
        None => return Err(DataError::EmptyData),
    };
    let width = first.len();

    let label_idx = match label_column {
        LabelColumn::Index(i) => {
            if *i >= width {
                return Err(DataError::MissingColumn(i.to_string()));
            }
            *i
        }
        LabelColumn::Name(name) => headers
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| DataError::MissingColumn(name.clone()))?,
    };

    let feature_names = headers.as_ref().map(|h| {
        h.iter()
            .enumerate()
            .filter(|(i, _)| *i != label_idx)
            .map(|(_, c)| c.clone())
            .collect()
    });

    let mut label_map: Vec<String> = Vec::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut row_idx = 0usize;
    let mut record = Some(first);
    while let Some(rec) = record {
        if rec.len() != width {
            return Err(DataError::Parse {
                row: row_idx,
                col: 0,
                message: format!("expected {width} fields, got {}", rec.len()),
            });
        }
        let mut row = Vec::with_capacity(width - 1);
        for (col, field) in rec.iter().enumerate() {
            if col == label_idx {
                let label = field.to_string();
                let id = match label_map.iter().position(|l| *l == label) {
                    Some(id) => id,
                    None => {
                        label_map.push(label);
                        label_map.len() - 1
                    }
                };
                labels.push(id);
            } else {
                let value: f64 = field.trim().parse().map_err(|_| {
                    DataError::NonNumericFeature {
                        row: row_idx,
                        col,
                        value: field.to_string(),
                    }
                })?;
                if !value.is_finite() {
                    return Err(DataError::NonNumericFeature {
                        row: row_idx,
                        col,
                        value: field.to_string(),
                    });
                }
                row.push(value);
            }
        }
        features.push(row);
        row_idx += 1;
        record = records.next().transpose()?;
    }

    Ok(Dataset {
        features,
        labels,
        class_count: label_map.len(),
        feature_names,
    })
}

/// Writes the dataset back out with a header; the label goes in the last
/// column. Inverse of `load_csv` up to label renaming.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let dim = ds.feature_dim();
    let names: Vec<String> = match &ds.feature_names {
        Some(names) => names.clone(),
        None => (0..dim).map(|i| format!("x{i}")).collect(),
    };
    let mut header = names;
    header.push("label".into());
    writer.write_record(&header)?;
    for (row, &label) in ds.features.iter().zip(&ds.labels) {
        let mut record: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        record.push(label.to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Deterministic stratified split; per-class test proportions are preserved
/// within one sample.
pub fn split(
    ds: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::InvalidArgument(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_indices = Vec::new();
    for class in 0..ds.class_count {
        let mut members: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels[i] == class).collect();
        members.shuffle(&mut rng);
        let take = (test_fraction * members.len() as f64).round() as usize;
        test_indices.extend(members.into_iter().take(take));
    }
    test_indices.sort_unstable();
    let in_test = |i: usize| test_indices.binary_search(&i).is_ok();

    let pick = |keep: &dyn Fn(usize) -> bool| Dataset {
        features: (0..ds.len())
            .filter(|&i| keep(i))
            .map(|i| ds.features[i].clone())
            .collect(),
        labels: (0..ds.len())
            .filter(|&i| keep(i))
            .map(|i| ds.labels[i])
            .collect(),
        class_count: ds.class_count,
        feature_names: ds.feature_names.clone(),
    };
    let test = pick(&in_test);
    let train = pick(&|i| !in_test(i));
    if train.is_empty() || test.is_empty() {
        return Err(DataError::DegenerateSplit {
            train: train.len(),
            test: test.len(),
        });
    }
    Ok((train, test))
}

/// N×C one-hot encoding.
pub fn one_hot(labels: &[usize], class_count: usize) -> Vec<Vec<f64>> {
    labels
        .iter()
        .map(|&l| {
            let mut row = vec![0.0; class_count];
            row[l] = 1.0;
            row
        })
        .collect()
}
