use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::{sample_reference, BinarizationConfig, BinarizedDataset, Dataset, LiteralSet, ReferenceConfig, SampleKind};
use crate::error::{invalid, Error, Result};
use crate::rules::{RuleForm, RuleSet};
use crate::solver::{fit_np_rules, NpProblem, SearchConfig};

/// Hyperparameters of the support stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SupportConfig {
    pub alpha: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub form: RuleForm,
    pub binarization: BinarizationConfig,
    pub reference: ReferenceConfig,
    pub search: SearchConfig,
}

impl Default for SupportConfig {
    fn default() -> Self {
        SupportConfig {
            alpha: 0.98,
            lambda0: 1e-2,
            lambda1: 1e-3,
            form: RuleForm::Cnf,
            binarization: BinarizationConfig::default(),
            reference: ReferenceConfig::default(),
            search: SearchConfig::default(),
        }
    }
}

/// Learned support rule with the literal universe and binarized samples it
/// was fit on.
#[derive(Clone, Debug)]
pub struct SupportFit {
    pub rules: RuleSet,
    pub literals: Arc<LiteralSet>,
    pub data: BinarizedDataset,
    pub reference: BinarizedDataset,
}

impl SupportFit {
    /// Rows of the training data inside the learned support.
    pub fn inside(&self) -> Result<Vec<usize>> {
        Ok(self.rules.coverage(&self.data)?.ones().collect())
    }

    /// Fraction of reference rows inside the support (its estimated volume).
    pub fn volume(&self) -> Result<f64> {
        Ok(self.rules.coverage(&self.reference)?.count_ones(..) as f64 / self.reference.n_rows() as f64)
    }
}

/// Fits the α-minimum-volume support of `data` by classifying data rows
/// against a uniform reference sample. A coverage shortfall is an error here.
pub fn fit_support(data: &Dataset, cfg: &SupportConfig) -> Result<SupportFit> {
    if data.is_empty() {
        return Err(invalid("cannot fit support on an empty dataset"));
    }
    let literals = Arc::new(LiteralSet::build(data, &cfg.binarization)?);
    if literals.is_empty() {
        log::warn!("every feature is constant; support is the all-true rule");
    }
    let positives = literals.binarize(data, SampleKind::Data)?;
    let count = cfg.reference.resolve(data.n_rows(), data.n_features());
    let reference = sample_reference(&literals, count, cfg.reference.seed)?;
    let problem = NpProblem {
        positives: &positives,
        negatives: &reference,
        coverage_target: cfg.alpha,
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
    Ok(SupportFit {
        rules,
        literals,
        data: positives,
        reference,
    })
}
