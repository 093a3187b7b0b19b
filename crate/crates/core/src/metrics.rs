//! Classification metrics, reported as percentages.

use crate::data::Label;
use crate::error::{check_dim, Error, Result};

fn check(predictions: &[Label], truth: &[Label]) -> Result<()> {
    check_dim(truth.len(), predictions.len())?;
    if truth.is_empty() {
        return Err(Error::InvalidInput("metrics need at least one prediction".into()));
    }
    Ok(())
}

/// `100 · matches / n`.
pub fn accuracy(predictions: &[Label], truth: &[Label]) -> Result<f64> {
    check(predictions, truth)?;
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(100.0 * hits as f64 / truth.len() as f64)
}

/// F1 of the positive class, times 100. Zero when precision and recall
/// are both zero (or undefined).
pub fn f1_score(predictions: &[Label], truth: &[Label]) -> Result<f64> {
    check(predictions, truth)?;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (p, t) in predictions.iter().zip(truth) {
        match (p.is_positive(), t.is_positive()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    Ok(100.0 * 2.0 * precision * recall / (precision + recall))
}
