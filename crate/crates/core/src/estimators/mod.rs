//! Base overlap estimators (bounding boxes, logistic and k-NN propensity)
//! and the pseudo-labels they induce: a row is labelled 1 when every group
//! (or every group the target policy may choose) has propensity ≥ ε.

mod cbb;
mod encode;
mod knn;
mod logistic;
mod policy;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};

pub use self::cbb::CbbModel;
pub use self::encode::Standardizer;
pub use self::knn::KnnModel;
pub use self::logistic::LogisticModel;
pub use self::policy::{Condition, Policy, PolicyRule, PolicyRules};

/// Group labels of `data`, checking there are at least two groups and each
/// is populated.
fn check_groups(data: &Dataset) -> Result<Vec<String>> {
    let g = data
        .groups()
        .ok_or_else(|| invalid("a group column is required to fit a propensity model"))?;
    if g.n_groups() < 2 {
        return Err(Error::EmptyClass("at least two groups are required".into()));
    }
    let mut counts = vec![0usize; g.n_groups()];
    g.codes.iter().for_each(|&c| counts[c as usize] += 1);
    if let Some(t) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(format!("group `{}` has no rows", g.labels[t])));
    }
    Ok(g.labels.clone())
}

/// Choice of base estimator with its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EstimatorConfig {
    Logistic {
        #[serde(default = "default_l2")]
        l2: f64,
    },
    Knn {
        k: usize,
        /// Use `1/k` as the propensity threshold instead of the configured ε.
        #[serde(default = "default_true")]
        inverse_k_threshold: bool,
    },
    Cbb {
        #[serde(default = "default_box")]
        alpha: f64,
    },
}

fn default_l2() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_box() -> f64 {
    0.1
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig::Logistic { l2: 1.0 }
    }
}

impl EstimatorConfig {
    pub fn fit(&self, data: &Dataset) -> Result<PropensityModel> {
        Ok(match *self {
            EstimatorConfig::Logistic { l2 } => PropensityModel::Logistic(LogisticModel::fit(data, l2)?),
            EstimatorConfig::Knn { k, .. } => PropensityModel::Knn(KnnModel::fit(data, k)?),
            EstimatorConfig::Cbb { alpha } => PropensityModel::Cbb(CbbModel::fit(data, alpha)?),
        })
    }

    /// Threshold actually applied given the configured ε.
    pub fn effective_epsilon(&self, epsilon: f64) -> f64 {
        match *self {
            EstimatorConfig::Knn {
                k,
                inverse_k_threshold: true,
            } => 1.0 / k as f64,
            _ => epsilon,
        }
    }
}

/// A fitted base estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PropensityModel {
    Logistic(LogisticModel),
    Knn(KnnModel),
    Cbb(CbbModel),
}

impl PropensityModel {
    pub fn groups(&self) -> &[String] {
        match self {
            PropensityModel::Logistic(m) => &m.groups,
            PropensityModel::Knn(m) => &m.groups,
            PropensityModel::Cbb(m) => &m.groups,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PropensityModel::Logistic(_) => "logistic",
            PropensityModel::Knn(_) => "knn",
            PropensityModel::Cbb(_) => "cbb",
        }
    }

    /// Per-row group probabilities. Box models have none.
    pub fn predict_proba(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        match self {
            PropensityModel::Logistic(m) => m.predict_proba(data),
            PropensityModel::Knn(m) => m.predict_proba(data),
            PropensityModel::Cbb(_) => Err(invalid("box models yield memberships, not probabilities")),
        }
    }

    /// Probabilities, or 0/1 box memberships for the box model.
    fn scores(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        match self {
            PropensityModel::Cbb(m) => m.membership(data),
            _ => self.predict_proba(data),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapLabels {
    pub labels: Vec<bool>,
    /// Threshold applied; `None` for box models.
    pub epsilon: Option<f64>,
    pub estimator: String,
}

impl OverlapLabels {
    pub fn count(&self) -> usize {
        self.labels.iter().filter(|&&b| b).count()
    }
}

fn check_epsilon(model: &PropensityModel, epsilon: f64) -> Result<Option<f64>> {
    if matches!(model, PropensityModel::Cbb(_)) {
        return Ok(None);
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if epsilon >= 1.0 / model.groups().len() as f64 {
        log::warn!("epsilon {epsilon} ≥ 1/|T|: every row will be labelled outside the overlap");
    }
    Ok(Some(epsilon))
}

fn label(score: &[f64], groups: impl IntoIterator<Item = usize>, eps: Option<f64>) -> bool {
    // box memberships are exactly 0 or 1
    let thr = eps.unwrap_or(0.5);
    groups.into_iter().all(|t| score[t] >= thr)
}

/// Row `i` is labelled 1 iff every group has score ≥ ε (box model: the row
/// lies in every group's box).
pub fn overlap_labels(model: &PropensityModel, data: &Dataset, epsilon: f64) -> Result<OverlapLabels> {
    let eps = check_epsilon(model, epsilon)?;
    let g = model.groups().len();
    let labels = model.scores(data)?.iter().map(|s| label(s, 0..g, eps)).collect();
    Ok(OverlapLabels {
        labels,
        epsilon: eps,
        estimator: model.name().into(),
    })
}

/// As [`overlap_labels`] but only the treatments allowed by `policy` at
/// each row must clear the threshold.
pub fn policy_overlap_labels(
    model: &PropensityModel,
    data: &Dataset,
    policy: &Policy,
    epsilon: f64,
) -> Result<OverlapLabels> {
    let eps = check_epsilon(model, epsilon)?;
    if policy.n_rows() != data.n_rows() {
        return Err(invalid(format!(
            "policy covers {} rows, dataset has {}",
            policy.n_rows(),
            data.n_rows()
        )));
    }
    let g = model.groups().len();
    for (i, set) in policy.allowed.iter().enumerate() {
        if set.is_empty() {
            return Err(invalid(format!("policy allows no treatment at row {i}")));
        }
        if let Some(&t) = set.iter().find(|&&t| t as usize >= g) {
            return Err(invalid(format!("policy names group index {t} at row {i}, model has {g} groups")));
        }
    }
    let labels = model
        .scores(data)?
        .iter()
        .zip(&policy.allowed)
        .map(|(s, set)| label(s, set.iter().map(|&t| t as usize), eps))
        .collect();
    Ok(OverlapLabels {
        labels,
        epsilon: eps,
        estimator: model.name().into(),
    })
}
