//! Datasets and SMOTE oversampling of the minority (fraud) class.
//!
//! Balancing first measures the degree of imbalance from the majority and
//! minority counts, then synthesizes minority rows by interpolating between
//! a minority sample and one of its k nearest minority neighbors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learner::FeatureScaler;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SamplingError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("only one class present")]
    SingleClass,
    #[error("minority class must exceed k={k} samples, found {minority}")]
    TooFewMinority { minority: usize, k: usize },
    #[error("balance fraction must lie in (0, 1]")]
    InvalidFraction,
    #[error("rows and labels differ in length")]
    ShapeMismatch,
}

/// Row-major feature matrix with parallel binary labels; class 1 is fraud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.feature_names.len()
    }

    /// Shape and finiteness invariants that must hold after preparation.
    pub fn validate(&self) -> Result<(), SamplingError> {
        if self.rows.len() != self.labels.len() {
            return Err(SamplingError::ShapeMismatch);
        }
        for row in &self.rows {
            if row.len() != self.arity() || row.iter().any(|v| !v.is_finite()) {
                return Err(SamplingError::ShapeMismatch);
            }
        }
        Ok(())
    }
}

/// Class balance summary: majority count, minority count, which label is
/// the minority, and the imbalance degree minority/majority.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassBalance {
    pub majority_count: usize,
    pub minority_count: usize,
    pub minority_label: u8,
    pub degree: f64,
}

/// Counts both classes; ties make class 1 the minority.
pub fn class_counts(ds: &Dataset) -> Result<ClassBalance, SamplingError> {
    if ds.is_empty() {
        return Err(SamplingError::EmptyDataset);
    }
    let ones = ds.labels.iter().filter(|&&l| l == 1).count();
    let zeros = ds.labels.len() - ones;
    if ones == 0 || zeros == 0 {
        return Err(SamplingError::SingleClass);
    }
    let (minority_label, minority_count, majority_count) =
        if ones <= zeros { (1, ones, zeros) } else { (0, zeros, ones) };
    Ok(ClassBalance {
        majority_count,
        minority_count,
        minority_label,
        degree: minority_count as f64 / majority_count as f64,
    })
}

/// Where one synthetic row came from: base and neighbor index into the
/// original dataset, and the interpolation coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOrigin {
    pub base: usize,
    pub neighbor: usize,
    pub u: f64,
}

/// SMOTE balancing: appends `round(fraction * (majority - minority))`
/// synthetic minority rows, each `x + u * (x_nn - x)` for a uniformly chosen
/// minority row and one of its k nearest minority neighbors. Original rows
/// are preserved in place; output is deterministic per seed. Neighbor
/// distances use scaled features when a scaler is supplied, so monetary
/// magnitudes do not dominate; interpolation always happens in raw space.
pub fn smote_balance(
    ds: &Dataset,
    balance_fraction: f64,
    k: usize,
    seed: u64,
    scaler: Option<&FeatureScaler>,
) -> Result<Dataset, SamplingError> {
    smote_balance_traced(ds, balance_fraction, k, seed, scaler).map(|(out, _)| out)
}

/// As [`smote_balance`], also reporting each synthetic row's provenance so
/// tests can re-check the convex combination per generated row.
pub fn smote_balance_traced(
    ds: &Dataset,
    balance_fraction: f64,
    k: usize,
    seed: u64,
    scaler: Option<&FeatureScaler>,
) -> Result<(Dataset, Vec<SyntheticOrigin>), SamplingError> {
    if !(balance_fraction > 0.0 && balance_fraction <= 1.0) {
        return Err(SamplingError::InvalidFraction);
    }
    ds.validate()?;
    let balance = class_counts(ds)?;
    let gap = balance.majority_count - balance.minority_count;
    let generate = (balance_fraction * gap as f64).round() as usize;
    let mut out = ds.clone();
    if generate == 0 {
        return Ok((out, Vec::new()));
    }
    let minority_idx: Vec<usize> = ds
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == balance.minority_label)
        .map(|(i, _)| i)
        .collect();
    if minority_idx.len() <= k || k == 0 {
        return Err(SamplingError::TooFewMinority {
            minority: minority_idx.len(),
            k,
        });
    }

    // Distance space: scaled when available, raw otherwise.
    let space: Vec<Vec<f64>> = match scaler {
        Some(s) => minority_idx.iter().map(|&i| s.transform_row(&ds.rows[i])).collect(),
        None => minority_idx.iter().map(|&i| ds.rows[i].clone()).collect(),
    };

    // k nearest minority neighbors per minority row; ties break on index so
    // the neighbor lists are deterministic.
    let neighbors: Vec<Vec<usize>> = (0..minority_idx.len())
        .map(|i| {
            let mut dists: Vec<(f64, usize)> = (0..minority_idx.len())
                .filter(|&j| j != i)
                .map(|j| (squared_distance(&space[i], &space[j]), j))
                .collect();
            dists.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
            dists.truncate(k);
            dists.into_iter().map(|(_, j)| j).collect()
        })
        .collect();

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut origins = Vec::with_capacity(generate);
    for _ in 0..generate {
        let pick = rng.random_range(0..minority_idx.len());
        let nn = neighbors[pick][rng.random_range(0..k)];
        let u: f64 = rng.random();
        let base_row = &ds.rows[minority_idx[pick]];
        let nn_row = &ds.rows[minority_idx[nn]];
        let synthetic: Vec<f64> = base_row
            .iter()
            .zip(nn_row)
            .map(|(&a, &b)| a + u * (b - a))
            .collect();
        out.rows.push(synthetic);
        out.labels.push(balance.minority_label);
        origins.push(SyntheticOrigin {
            base: minority_idx[pick],
            neighbor: minority_idx[nn],
            u,
        });
    }
    Ok((out, origins))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Deterministic shuffled split into (train, test) with `train_fraction`
/// of the rows in the train side (at least one row in each when possible).
pub fn split_dataset(ds: &Dataset, train_fraction: f64, seed: u64) -> (Dataset, Dataset) {
    let mut order: Vec<usize> = (0..ds.len()).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let cut = ((ds.len() as f64) * train_fraction).round() as usize;
    let cut = cut.clamp(1.min(ds.len()), ds.len().saturating_sub(1).max(1));
    let take = |idx: &[usize]| Dataset {
        feature_names: ds.feature_names.clone(),
        rows: idx.iter().map(|&i| ds.rows[i].clone()).collect(),
        labels: idx.iter().map(|&i| ds.labels[i]).collect(),
    };
    (take(&order[..cut]), take(&order[cut..]))
}
