//! Online linear classifiers (passive-aggressive, perceptron, SGD-hinge)
//! with partial-fit training, evaluation, canonical serialization, and
//! model hashing.
//!
//! The passive-aggressive rule (PA-I) leaves parameters untouched on zero
//! hinge loss and takes a corrective step bounded by the maximum step size C
//! on violations. Training is order-sensitive and single-threaded per
//! candidate; prediction is read-only.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{canonical_sha256, to_canonical_json};
use crate::metrics::{confusion_matrix, derive_metrics, MetricsError, MetricsReport};
use crate::sampling::Dataset;

/// Hyperparameter defaults: maximum PA step size, batch-mode stopping
/// tolerance, and the initial-training epoch cap.
pub const DEFAULT_MAX_STEP: f64 = 0.7;
pub const DEFAULT_TOLERANCE: f64 = 0.001;
pub const DEFAULT_MAX_EPOCHS: u32 = 1000;
pub const DEFAULT_LEARNING_RATE: f64 = 1.0;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("feature row has wrong arity")]
    ArityMismatch,
    #[error("training batch is empty")]
    EmptyBatch,
    #[error("metrics report contains non-finite fields")]
    IncompleteMetrics,
    #[error("model file failed its integrity check")]
    CorruptModelFile,
    #[error("model file does not match the expected schema")]
    SchemaMismatch,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Which update rule a model trains with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Pac,
    Perceptron,
    SgdHinge,
}

/// Per-feature affine transform with an optional log1p pre-step for
/// monetary columns. Fitted once at initial training and frozen afterward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub shifts: Vec<f64>,
    pub scales: Vec<f64>,
    pub log1p: Vec<bool>,
}

impl FeatureScaler {
    /// Min-max fit to [0, 1] over the given rows, after log1p on the named
    /// monetary features. Constant features keep scale 1 so every scale
    /// stays strictly positive.
    pub fn fit(ds: &Dataset, log1p_features: &[&str]) -> FeatureScaler {
        let arity = ds.arity();
        let log1p: Vec<bool> = ds
            .feature_names
            .iter()
            .map(|n| log1p_features.contains(&n.as_str()))
            .collect();
        let mut mins = vec![f64::INFINITY; arity];
        let mut maxs = vec![f64::NEG_INFINITY; arity];
        for row in &ds.rows {
            for (c, &v) in row.iter().enumerate() {
                let v = if log1p[c] { v.ln_1p() } else { v };
                mins[c] = mins[c].min(v);
                maxs[c] = maxs[c].max(v);
            }
        }
        let shifts = mins.clone();
        let scales = mins
            .iter()
            .zip(&maxs)
            .map(|(&lo, &hi)| if hi > lo { hi - lo } else { 1.0 })
            .collect();
        FeatureScaler {
            shifts,
            scales,
            log1p,
        }
    }

    /// The do-nothing scaler for already-scaled features.
    pub fn identity(arity: usize) -> FeatureScaler {
        FeatureScaler {
            shifts: vec![0.0; arity],
            scales: vec![1.0; arity],
            log1p: vec![false; arity],
        }
    }

    pub fn arity(&self) -> usize {
        self.shifts.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(c, &v)| {
                let v = if self.log1p[c] { v.ln_1p() } else { v };
                (v - self.shifts[c]) / self.scales[c]
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Maximum PA-I step size (C).
    pub max_step: f64,
    /// Learning rate for perceptron and SGD-hinge updates.
    pub learning_rate: f64,
    /// Epochs per incremental batch.
    pub epochs_per_batch: u32,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            max_step: DEFAULT_MAX_STEP,
            learning_rate: DEFAULT_LEARNING_RATE,
            epochs_per_batch: 1,
        }
    }
}

/// The shared fraud classifier: weights, bias, update rule, frozen scaler,
/// and a version that increments by exactly one per accepted update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: ModelKind,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyper: Hyperparams,
    pub scaler: FeatureScaler,
    pub version: u64,
}

impl LinearModel {
    pub fn new(kind: ModelKind, scaler: FeatureScaler, hyper: Hyperparams) -> LinearModel {
        let weights = vec![0.0; scaler.arity()];
        LinearModel {
            kind,
            weights,
            bias: 0.0,
            hyper,
            scaler,
            version: 0,
        }
    }

    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    fn decision(&self, scaled: &[f64]) -> f64 {
        self.weights.iter().zip(scaled).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }
}

/// Predicts the class of one raw feature row: 1 iff w·scale(x) + b > 0.
pub fn predict(model: &LinearModel, row: &[f64]) -> Result<u8, LearnerError> {
    if row.len() != model.arity() {
        return Err(LearnerError::ArityMismatch);
    }
    let scaled = model.scaler.transform_row(row);
    Ok(u8::from(model.decision(&scaled) > 0.0))
}

fn signed_label(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

/// One in-order pass over the batch, returning the mean hinge loss observed
/// before each update.
fn run_epoch(model: &mut LinearModel, rows: &[Vec<f64>], labels: &[u8]) -> f64 {
    let mut loss_sum = 0.0;
    for (scaled, &label) in rows.iter().zip(labels) {
        let y = signed_label(label);
        let margin = y * model.decision(scaled);
        match model.kind {
            ModelKind::Pac => {
                let loss = (1.0 - margin).max(0.0);
                loss_sum += loss;
                if loss > 0.0 {
                    let norm2: f64 = scaled.iter().map(|x| x * x).sum();
                    let tau = model.hyper.max_step.min(loss / (norm2 + 1.0));
                    for (w, x) in model.weights.iter_mut().zip(scaled) {
                        *w += tau * y * x;
                    }
                    model.bias += tau * y;
                }
            }
            ModelKind::Perceptron => {
                let predicted = u8::from(model.decision(scaled) > 0.0);
                loss_sum += f64::from(predicted != label);
                if predicted != label {
                    let eta = model.hyper.learning_rate;
                    for (w, x) in model.weights.iter_mut().zip(scaled) {
                        *w += eta * y * x;
                    }
                    model.bias += eta * y;
                }
            }
            ModelKind::SgdHinge => {
                let loss = (1.0 - margin).max(0.0);
                loss_sum += loss;
                if loss > 0.0 {
                    let eta = model.hyper.learning_rate;
                    for (w, x) in model.weights.iter_mut().zip(scaled) {
                        *w += eta * y * x;
                    }
                    model.bias += eta * y;
                }
            }
        }
    }
    loss_sum / rows.len() as f64
}

fn scaled_rows(model: &LinearModel, batch: &Dataset) -> Result<Vec<Vec<f64>>, LearnerError> {
    if batch.is_empty() {
        return Err(LearnerError::EmptyBatch);
    }
    if batch.arity() != model.arity() {
        return Err(LearnerError::ArityMismatch);
    }
    Ok(batch.rows.iter().map(|r| model.scaler.transform_row(r)).collect())
}

/// Incremental training: `epochs_per_batch` in-order passes over the batch
/// applied to a copy of the model. The deployed model is never mutated; the
/// returned copy carries version + 1.
pub fn partial_fit(model: &LinearModel, batch: &Dataset) -> Result<LinearModel, LearnerError> {
    let rows = scaled_rows(model, batch)?;
    let mut trained = model.clone();
    for _ in 0..model.hyper.epochs_per_batch.max(1) {
        run_epoch(&mut trained, &rows, &batch.labels);
    }
    trained.version = model.version + 1;
    Ok(trained)
}

/// Batch-mode initial training: epochs until the mean hinge loss improves by
/// less than `tolerance` or `max_epochs` is reached. Version stays at zero;
/// this produces the genesis model.
pub fn fit_batch(
    model: &LinearModel,
    train: &Dataset,
    tolerance: f64,
    max_epochs: u32,
) -> Result<LinearModel, LearnerError> {
    let rows = scaled_rows(model, train)?;
    let mut trained = model.clone();
    let mut previous = f64::INFINITY;
    for _ in 0..max_epochs.max(1) {
        let loss = run_epoch(&mut trained, &rows, &train.labels);
        if previous - loss < tolerance {
            break;
        }
        previous = loss;
    }
    Ok(trained)
}

/// Evaluates a model: training accuracy from the train split, every other
/// field from the test split.
pub fn evaluate(
    model: &LinearModel,
    train: &Dataset,
    test: &Dataset,
    beta: f64,
) -> Result<MetricsReport, LearnerError> {
    if train.is_empty() || test.is_empty() {
        return Err(LearnerError::EmptyBatch);
    }
    let mut correct = 0usize;
    for (row, &label) in train.rows.iter().zip(&train.labels) {
        if predict(model, row)? == label {
            correct += 1;
        }
    }
    let training_accuracy = correct as f64 / train.len() as f64;
    let predictions: Vec<u8> = test
        .rows
        .iter()
        .map(|row| predict(model, row))
        .collect::<Result<_, _>>()?;
    let cm = confusion_matrix(&test.labels, &predictions)?;
    Ok(derive_metrics(&cm, beta)?.with_training_accuracy(training_accuracy))
}

/// What the model hash commits to: the parameters and the four gating
/// metrics, so the on-chain hash pins both the model and its claimed scores.
#[derive(Serialize)]
struct ModelFingerprint<'a> {
    kind: ModelKind,
    weights: &'a [f64],
    bias: f64,
    version: u64,
    precision: f64,
    recall: f64,
    fbeta: f64,
    fnr: f64,
}

/// SHA-256 over the canonical bytes of (weights, bias, kind, version,
/// precision, recall, fbeta, fnr).
pub fn model_hash(model: &LinearModel, metrics: &MetricsReport) -> Result<String, LearnerError> {
    if !metrics.is_complete() {
        return Err(LearnerError::IncompleteMetrics);
    }
    if !model.bias.is_finite() || model.weights.iter().any(|w| !w.is_finite()) {
        return Err(LearnerError::IncompleteMetrics);
    }
    Ok(canonical_sha256(&ModelFingerprint {
        kind: model.kind,
        weights: &model.weights,
        bias: model.bias,
        version: model.version,
        precision: metrics.precision,
        recall: metrics.recall,
        fbeta: metrics.fbeta,
        fnr: metrics.fnr,
    }))
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    content_hash: String,
    model: LinearModel,
}

/// Canonical filename for a registry entry.
pub fn model_file_name(version: u64, hash: &str) -> String {
    format!("model-{version}-{}.json", &hash[..12.min(hash.len())])
}

/// Writes the model as canonical JSON with an embedded content hash.
pub fn save_model(model: &LinearModel, path: &Path) -> Result<(), LearnerError> {
    let content_hash = canonical_sha256(model);
    let file = ModelFile {
        content_hash,
        model: model.clone(),
    };
    fs::write(path, to_canonical_json(&file))?;
    Ok(())
}

/// Reads a model file back, recomputing and checking the embedded hash.
pub fn load_model(path: &Path) -> Result<LinearModel, LearnerError> {
    let raw = fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&raw).map_err(|_| LearnerError::CorruptModelFile)?;
    if !value.get("content_hash").is_some_and(|v| v.is_string())
        || value.get("model").is_none()
    {
        return Err(LearnerError::SchemaMismatch);
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|_| LearnerError::SchemaMismatch)?;
    if canonical_sha256(&file.model) != file.content_hash {
        return Err(LearnerError::CorruptModelFile);
    }
    Ok(file.model)
}
