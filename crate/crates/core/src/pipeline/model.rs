use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{evaluate, fit_overlap, fit_support, Metrics, OverlapConfig, SupportConfig};
use crate::data::{Dataset, FeatureSpec, LiteralSet, SampleKind, Schema};
use crate::error::{invalid, Error, Result};
use crate::estimators::{Policy, PropensityModel};
use crate::rules::{Op, RuleSet};
use crate::theory::TheoryReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OverRuleConfig {
    pub support: SupportConfig,
    pub overlap: OverlapConfig,
    /// Confidence parameter of the reported deviation bounds.
    pub delta: f64,
}

impl Default for OverRuleConfig {
    fn default() -> Self {
        OverRuleConfig {
            support: SupportConfig::default(),
            overlap: OverlapConfig::default(),
            delta: 0.05,
        }
    }
}

/// Counts and training agreement recorded at fit time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub n_rows: usize,
    pub n_reference: usize,
    pub n_support: usize,
    /// Support rows labelled as overlap by the base estimator.
    pub n_labelled: usize,
    /// Training rows inside support ∩ overlap rule.
    pub n_overlap: usize,
    pub support_volume: f64,
    /// Overlap rule vs base-estimator labels on the support rows.
    pub overlap_vs_labels: Metrics,
    /// Labelled support rows the overlap rule covers.
    pub labels_covered: usize,
}

/// Where a row falls relative to the learned regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    InOverlap,
    InSupportOnly,
    OutOfSupport,
}

impl Membership {
    pub fn in_overlap(self) -> bool {
        self == Membership::InOverlap
    }

    pub fn in_support(self) -> bool {
        self != Membership::OutOfSupport
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Membership::InOverlap => "in_overlap",
            Membership::InSupportOnly => "in_support_only",
            Membership::OutOfSupport => "out_of_support",
        }
    }
}

/// Support rule, overlap rule and everything needed to apply them to new
/// rows. Membership in the overlap region is `support(x) ∧ overlap(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverRuleModel {
    pub literals: LiteralSet,
    pub groups: Vec<String>,
    pub support: RuleSet,
    pub overlap: RuleSet,
    pub alpha: f64,
    pub beta: f64,
    /// Propensity threshold actually applied (`None` for box estimators).
    pub epsilon: Option<f64>,
    pub base: PropensityModel,
    pub config: OverRuleConfig,
    pub summary: FitSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheoryReport>,
}

/// Runs all three stages on `data` (which must carry a group column).
/// `policy`, when given, restricts the propensity check per row.
pub fn fit_overrule(data: &Dataset, cfg: &OverRuleConfig, policy: Option<&Policy>) -> Result<OverRuleModel> {
    let groups = data
        .groups()
        .ok_or_else(|| invalid("a group column is required to fit the overlap stage"))?
        .labels
        .clone();
    let support = fit_support(data, &cfg.support)?;
    let ov = fit_overlap(data, &support, &cfg.overlap, policy)?;

    let sub = support.data.select(&ov.rows);
    let pred: Vec<bool> = {
        let cov = ov.rules.coverage(&sub)?;
        (0..sub.n_rows()).map(|i| cov.contains(i)).collect()
    };
    let overlap_vs_labels = evaluate(&pred, &ov.labels.labels, ov.rules.literal_count())?;
    if let Some(ba) = overlap_vs_labels.balanced_accuracy {
        if ba < 0.5 {
            log::warn!("overlap rule balanced accuracy {ba:.3} is below the all-true baseline 0.5");
        }
    }
    let labels_covered = pred.iter().zip(&ov.labels.labels).filter(|(p, l)| **p && **l).count();
    let summary = FitSummary {
        n_rows: data.n_rows(),
        n_reference: support.reference.n_rows(),
        n_support: ov.rows.len(),
        n_labelled: ov.labels.count(),
        n_overlap: pred.iter().filter(|&&p| p).count(),
        support_volume: support.volume()?,
        overlap_vs_labels,
        labels_covered,
    };
    let lambda1 = cfg.support.lambda1;
    let theory = if lambda1 > 0.0 && lambda1 <= 1.0 {
        // binarized dimension: one positive literal per complementary pair
        let d = support
            .literals
            .literals()
            .iter()
            .filter(|l| matches!(l.op, Op::Le | Op::Eq))
            .count()
            .max(1);
        Some(TheoryReport::new(data.n_rows(), support.reference.n_rows(), d, lambda1, cfg.delta)?)
    } else {
        None
    };
    Ok(OverRuleModel {
        literals: (*support.literals).clone(),
        groups,
        support: support.rules,
        overlap: ov.rules,
        alpha: cfg.support.alpha,
        beta: cfg.overlap.beta,
        epsilon: ov.labels.epsilon,
        base: ov.base,
        config: cfg.clone(),
        summary,
        theory,
    })
}

impl OverRuleModel {
    /// Schema that reloads prediction data against this model's feature
    /// domains (declared categories keep category codes aligned).
    pub fn schema(&self) -> Schema {
        Schema {
            features: self
                .literals
                .features()
                .iter()
                .map(|f| FeatureSpec {
                    name: f.name.clone(),
                    kind: f.kind,
                    min: Some(f.min),
                    max: Some(f.max),
                    categories: (!f.categories.is_empty()).then(|| f.categories.clone()),
                    thresholds: None,
                })
                .collect(),
            group_column: None,
            groups: None,
            policy_column: None,
        }
    }

    /// Rows are matched to the model's features by name and kind; category
    /// codes must follow the model's category lists (see [`Self::schema`]).
    pub fn predict(&self, data: &Dataset) -> Result<Vec<Membership>> {
        let set = Arc::new(self.literals.clone());
        let bin = set.binarize(data, SampleKind::Data)?;
        let s = self.support.coverage(&bin)?;
        let o = self.overlap.coverage(&bin)?;
        let unknown = bin.unknown_rows();
        if unknown.count_ones(..) > 0 {
            log::warn!(
                "{} rows carry unknown categories and are reported out of support",
                unknown.count_ones(..)
            );
        }
        Ok((0..bin.n_rows())
            .map(|i| {
                if unknown.contains(i) || !s.contains(i) {
                    Membership::OutOfSupport
                } else if o.contains(i) {
                    Membership::InOverlap
                } else {
                    Membership::InSupportOnly
                }
            })
            .collect())
    }

    /// Rule listing; with `data`, each clause shows its share of the rows.
    pub fn report(&self, data: Option<&Dataset>) -> Result<String> {
        let set = Arc::new(self.literals.clone());
        let bin = data.map(|d| set.binarize(d, SampleKind::Data)).transpose()?;
        let feats = self.literals.features();
        let mut s = String::new();
        s.push_str(&format!("Support rules (alpha = {}):\n", self.alpha));
        s.push_str(&self.support.report(feats, bin.as_ref())?);
        s.push_str(&format!(
            "\nOverlap rules (beta = {}, base = {}, epsilon = {}):\n",
            self.beta,
            self.base.name(),
            self.epsilon.map_or("n/a".to_string(), |e| format!("{e}"))
        ));
        s.push_str(&self.overlap.report(feats, bin.as_ref())?);
        Ok(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: OverRuleModel = serde_json::from_str(&text)?;
        model.support.validate(model.literals.features())?;
        model.overlap.validate(model.literals.features())?;
        Ok(model)
    }
}
