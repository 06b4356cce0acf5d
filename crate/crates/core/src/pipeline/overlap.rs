use serde::{Deserialize, Serialize};

use super::SupportFit;
use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::estimators::{overlap_labels, policy_overlap_labels, EstimatorConfig, OverlapLabels, Policy, PropensityModel};
use crate::rules::{RuleForm, RuleSet};
use crate::solver::{fit_np_rules, NpProblem, SearchConfig};

/// Hyperparameters of the overlap stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OverlapConfig {
    pub epsilon: f64,
    pub beta: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub form: RuleForm,
    pub estimator: EstimatorConfig,
    pub search: SearchConfig,
}

impl Default for OverlapConfig {
    fn default() -> Self {
        OverlapConfig {
            epsilon: 0.1,
            beta: 0.9,
            lambda0: 1e-2,
            lambda1: 1e-3,
            form: RuleForm::Dnf,
            estimator: EstimatorConfig::default(),
            search: SearchConfig::default(),
        }
    }
}

/// Base estimator, its labels on the support rows, and the overlap rule.
#[derive(Clone, Debug)]
pub struct OverlapFit {
    pub rules: RuleSet,
    pub base: PropensityModel,
    /// Labels aligned with `rows`.
    pub labels: OverlapLabels,
    /// Training rows inside the support, in order.
    pub rows: Vec<usize>,
}

/// Base estimator and pseudo-labels on the rows inside the support.
pub fn base_labels(
    data: &Dataset,
    rows: &[usize],
    cfg: &OverlapConfig,
    policy: Option<&Policy>,
) -> Result<(PropensityModel, OverlapLabels)> {
    let inside = data.subset(rows);
    let base = cfg.estimator.fit(&inside)?;
    let eps = cfg.estimator.effective_epsilon(cfg.epsilon);
    let labels = match policy {
        Some(p) => {
            if p.n_rows() != data.n_rows() {
                return Err(invalid(format!("policy covers {} rows, dataset has {}", p.n_rows(), data.n_rows())));
            }
            policy_overlap_labels(&base, &inside, &p.subset(rows), eps)?
        }
        None => overlap_labels(&base, &inside, eps)?,
    };
    Ok((base, labels))
}

/// Learns a rule for the labelled overlap set among `rows` of the support
/// sample (positives: label 1, negatives: label 0).
pub fn fit_overlap_rule(support: &SupportFit, rows: &[usize], labels: &[bool], cfg: &OverlapConfig) -> Result<RuleSet> {
    let pos: Vec<usize> = rows.iter().zip(labels).filter(|(_, &b)| b).map(|(&i, _)| i).collect();
    let neg: Vec<usize> = rows.iter().zip(labels).filter(|(_, &b)| !b).map(|(&i, _)| i).collect();
    if pos.is_empty() {
        return Err(Error::EmptyClass(
            "no support row is labelled as overlap; lower epsilon or raise alpha".into(),
        ));
    }
    if neg.is_empty() {
        return Err(Error::EmptyClass(
            "every support row is labelled as overlap; raise epsilon or lower alpha".into(),
        ));
    }
    let positives = support.data.select(&pos);
    let negatives = support.data.select(&neg);
    let problem = NpProblem {
        positives: &positives,
        negatives: &negatives,
        coverage_target: cfg.beta,
        lambda0: cfg.lambda0,
        lambda1: cfg.lambda1,
        form: cfg.form,
    };
    let rules = fit_np_rules(&problem, &cfg.search)?;
    let p = &rules.provenance;
    if p.coverage_shortfall {
        return Err(Error::CoverageShortfall {
            achieved: p.covered,
            required: p.required,
        });
    }
    Ok(rules)
}

/// Fits the base estimator on the support rows only, labels them and learns
/// the overlap rule. `policy`, when given, is indexed by the rows of `data`.
pub fn fit_overlap(data: &Dataset, support: &SupportFit, cfg: &OverlapConfig, policy: Option<&Policy>) -> Result<OverlapFit> {
    if support.data.n_rows() != data.n_rows() {
        return Err(invalid("support was fit on a different dataset"));
    }
    let rows = support.inside()?;
    if rows.is_empty() {
        return Err(Error::EmptyClass("the support contains no rows".into()));
    }
    let (base, labels) = base_labels(data, &rows, cfg, policy)?;
    let rules = fit_overlap_rule(support, &rows, &labels.labels, cfg)?;
    Ok(OverlapFit {
        rules,
        base,
        labels,
        rows,
    })
}
