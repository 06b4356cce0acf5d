use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Agreement of binary predictions with reference labels. Rates are `None`
/// when the corresponding truth class is absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub balanced_accuracy: Option<f64>,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub literal_count: usize,
    /// Share of rows predicted positive.
    pub coverage_fraction: f64,
}

/// Balanced accuracy, FPR and FNR of `predicted` against `truth`.
/// `literal_count` is passed through from the rule being scored.
pub fn evaluate(predicted: &[bool], truth: &[bool], literal_count: usize) -> Result<Metrics> {
    if predicted.len() != truth.len() {
        return Err(invalid(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(invalid("cannot evaluate on zero rows"));
    }
    let (mut tp, mut fp, mut tn, mut fneg) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fneg += 1,
        }
    }
    let rate = |a: usize, b: usize| (a + b > 0).then(|| a as f64 / (a + b) as f64);
    let fpr = rate(fp, tn);
    let fnr = rate(fneg, tp);
    let balanced_accuracy = match (fpr, fnr) {
        (Some(a), Some(b)) => Some(1.0 - (a + b) / 2.0),
        _ => None,
    };
    Ok(Metrics {
        balanced_accuracy,
        fpr,
        fnr,
        literal_count,
        coverage_fraction: (tp + fp) as f64 / truth.len() as f64,
    })
}
