//! Confusion-matrix construction and the derived measures used for gating
//! and incentives: accuracy, precision, recall/TPR, Fβ, TNR/FPR and the
//! false-negative rate that drives the update gate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The positive (fraud) class label.
pub const POSITIVE: u8 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("labels and predictions differ in length")]
    LengthMismatch,
    #[error("no samples supplied")]
    EmptyInput,
    /// A metric's denominator was zero. The gating layer treats such a
    /// report as non-improving; this is never a crash during gating.
    #[error("metric {0} is undefined (zero denominator)")]
    UndefinedMetric(&'static str),
}

/// Raw outcome counts for a binary classifier; class 1 is fraud.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positives: u64,
    pub true_negatives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.true_positives + self.true_negatives + self.false_positives + self.false_negatives
    }
}

/// All derived measures for one evaluated model.
///
/// Serialized field names follow the on-chain block payload format, so a
/// report embeds into a block entry without translation. `f1score` is the
/// Fβ measure evaluated at β = 1; `fbeta` uses the report's own `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub training_accuracy: f64,
    pub testing_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1score: f64,
    pub fbeta: f64,
    #[serde(rename = "true_positive_rate")]
    pub tpr: f64,
    #[serde(rename = "true_negative_rate")]
    pub tnr: f64,
    #[serde(rename = "false_positive_rate")]
    pub fpr: f64,
    #[serde(rename = "false_negative_rate")]
    pub fnr: f64,
    pub beta: f64,
}

impl MetricsReport {
    /// Replaces the training-side accuracy; evaluation fills this from the
    /// train split while every other field comes from the test split.
    pub fn with_training_accuracy(mut self, value: f64) -> Self {
        self.training_accuracy = value;
        self
    }

    /// True iff every field is a finite number.
    pub fn is_complete(&self) -> bool {
        [
            self.training_accuracy,
            self.testing_accuracy,
            self.precision,
            self.recall,
            self.f1score,
            self.fbeta,
            self.tpr,
            self.tnr,
            self.fpr,
            self.fnr,
            self.beta,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Tallies a confusion matrix from parallel label/prediction lists.
pub fn confusion_matrix(labels: &[u8], predictions: &[u8]) -> Result<ConfusionMatrix, MetricsError> {
    if labels.len() != predictions.len() {
        return Err(MetricsError::LengthMismatch);
    }
    if labels.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut cm = ConfusionMatrix {
        true_positives: 0,
        true_negatives: 0,
        false_positives: 0,
        false_negatives: 0,
    };
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y == POSITIVE, p == POSITIVE) {
            (true, true) => cm.true_positives += 1,
            (false, false) => cm.true_negatives += 1,
            (false, true) => cm.false_positives += 1,
            (true, false) => cm.false_negatives += 1,
        }
    }
    Ok(cm)
}

/// Derives the full metric report from a confusion matrix.
///
/// Recall is TP/(TP+FN), coinciding with sensitivity/TPR. A zero denominator
/// reports the metric as undefined rather than substituting 0 or 1, so a
/// degenerate model can never slip through the gate. The returned report's
/// training accuracy is initialized to the matrix's own accuracy; callers
/// evaluating separate splits overwrite it.
pub fn derive_metrics(cm: &ConfusionMatrix, beta: f64) -> Result<MetricsReport, MetricsError> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(MetricsError::UndefinedMetric("beta"));
    }
    let (tp, tn, fp, fn_) = (
        cm.true_positives as f64,
        cm.true_negatives as f64,
        cm.false_positives as f64,
        cm.false_negatives as f64,
    );
    if cm.total() == 0 {
        return Err(MetricsError::UndefinedMetric("accuracy"));
    }
    let accuracy = (tp + tn) / (tp + fp + tn + fn_);
    if tp + fp == 0.0 {
        return Err(MetricsError::UndefinedMetric("precision"));
    }
    let precision = tp / (tp + fp);
    if tp + fn_ == 0.0 {
        return Err(MetricsError::UndefinedMetric("recall"));
    }
    let recall = tp / (tp + fn_);
    let fnr = fn_ / (fn_ + tp);
    if tn + fp == 0.0 {
        return Err(MetricsError::UndefinedMetric("tnr"));
    }
    let tnr = tn / (tn + fp);
    let fpr = fp / (tn + fp);
    let fbeta = f_measure(precision, recall, beta)?;
    let f1score = f_measure(precision, recall, 1.0)?;
    Ok(MetricsReport {
        training_accuracy: accuracy,
        testing_accuracy: accuracy,
        precision,
        recall,
        f1score,
        fbeta,
        tpr: recall,
        tnr,
        fpr,
        fnr,
        beta,
    })
}

/// Fβ = (1+β²)·P·R / (β²·P + R); β > 1 weights recall more heavily.
pub fn f_measure(precision: f64, recall: f64, beta: f64) -> Result<f64, MetricsError> {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        return Err(MetricsError::UndefinedMetric("fbeta"));
    }
    Ok((1.0 + b2) * precision * recall / denom)
}
