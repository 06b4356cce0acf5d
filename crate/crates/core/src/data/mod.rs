//! Tabular covariate data: typed columns, CSV ingestion, binarization into
//! literal indicators and uniform reference sampling over the covariate box.

mod binarize;
mod csv;
mod reference;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use self::binarize::{binarize, BinarizationConfig, BinarizedDataset, BinarizedRow, LiteralSet, SampleKind};
pub use self::csv::{load_csv, load_csv_with, FeatureSpec, LoadOptions, Schema};
pub use self::reference::{default_reference_count, sample_reference, sample_reference_rows, ReferenceConfig};

/// Category code used for values outside the recorded category set when a
/// dataset is loaded leniently (prediction time).
pub const UNKNOWN_CATEGORY: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Categorical,
    Binary,
}

/// Per-feature metadata: kind, observed or declared domain and, for
/// continuous features, the cut points used for binarization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default)]
    pub min: f64,
    #[serde(default)]
    pub max: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub thresholds: Vec<f64>,
}

impl FeatureMeta {
    pub fn continuous(name: impl Into<String>, min: f64, max: f64) -> Self {
        FeatureMeta {
            name: name.into(),
            kind: FeatureKind::Continuous,
            min,
            max,
            categories: Vec::new(),
            thresholds: Vec::new(),
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        FeatureMeta {
            name: name.into(),
            kind: FeatureKind::Categorical,
            min: 0.0,
            max: 0.0,
            categories,
            thresholds: Vec::new(),
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        FeatureMeta {
            name: name.into(),
            kind: FeatureKind::Binary,
            min: 0.0,
            max: 1.0,
            categories: Vec::new(),
            thresholds: Vec::new(),
        }
    }

    pub fn category_index(&self, value: &str) -> Option<u32> {
        self.categories.iter().position(|c| c == value).map(|i| i as u32)
    }

    /// Checks the threshold invariant: strictly increasing and strictly
    /// inside `(min, max)`.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            FeatureKind::Continuous => {
                if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
                    return Err(Error::Schema(format!(
                        "feature `{}` has invalid range [{}, {}]",
                        self.name, self.min, self.max
                    )));
                }
                for w in self.thresholds.windows(2) {
                    if w[0] >= w[1] {
                        return Err(Error::Schema(format!(
                            "thresholds of `{}` are not strictly increasing",
                            self.name
                        )));
                    }
                }
                if let (Some(&lo), Some(&hi)) = (self.thresholds.first(), self.thresholds.last()) {
                    if lo <= self.min || hi >= self.max {
                        return Err(Error::Schema(format!(
                            "thresholds of `{}` must lie strictly inside ({}, {})",
                            self.name, self.min, self.max
                        )));
                    }
                }
                Ok(())
            }
            FeatureKind::Categorical => {
                let mut seen = std::collections::HashSet::new();
                for c in &self.categories {
                    if !seen.insert(c) {
                        return Err(Error::Schema(format!(
                            "duplicate category `{c}` in `{}`",
                            self.name
                        )));
                    }
                }
                Ok(())
            }
            FeatureKind::Binary => Ok(()),
        }
    }
}

/// Column storage. Binary features are numeric columns holding 0/1,
/// categorical features store indices into [`FeatureMeta::categories`].
#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<u32>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&i| v[i]).collect()),
            Column::Categorical(v) => Column::Categorical(rows.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Group (treatment) assignment per row, coded into the declared group set.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupColumn {
    pub name: String,
    pub labels: Vec<String>,
    pub codes: Vec<u32>,
}

impl GroupColumn {
    pub fn n_groups(&self) -> usize {
        self.labels.len()
    }

    pub fn label_index(&self, label: &str) -> Option<u32> {
        self.labels.iter().position(|l| l == label).map(|i| i as u32)
    }
}

/// A dense covariate table with optional group column. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<FeatureMeta>,
    columns: Vec<Column>,
    groups: Option<GroupColumn>,
    aux: BTreeMap<String, Vec<String>>,
    n_rows: usize,
}

impl Dataset {
    /// Builds a dataset and checks the domain invariants. Categorical codes
    /// equal to [`UNKNOWN_CATEGORY`] are accepted (lenient loads).
    pub fn new(
        features: Vec<FeatureMeta>,
        columns: Vec<Column>,
        groups: Option<GroupColumn>,
    ) -> Result<Self> {
        if features.len() != columns.len() {
            return Err(invalid(format!(
                "{} features but {} columns",
                features.len(),
                columns.len()
            )));
        }
        let n_rows = columns
            .first()
            .map(Column::len)
            .or_else(|| groups.as_ref().map(|g| g.codes.len()))
            .unwrap_or(0);
        for (meta, col) in features.iter().zip(&columns) {
            meta.validate()?;
            if col.len() != n_rows {
                return Err(invalid(format!("column `{}` has {} rows, expected {n_rows}", meta.name, col.len())));
            }
            match (meta.kind, col) {
                (FeatureKind::Continuous, Column::Numeric(v)) => {
                    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                        return Err(invalid(format!("non-finite value {x} in `{}`", meta.name)));
                    }
                }
                (FeatureKind::Binary, Column::Numeric(v)) => {
                    if let Some(x) = v.iter().find(|&&x| x != 0.0 && x != 1.0) {
                        return Err(invalid(format!("binary feature `{}` holds {x}", meta.name)));
                    }
                }
                (FeatureKind::Categorical, Column::Categorical(v)) => {
                    let c = meta.categories.len() as u32;
                    if let Some(x) = v.iter().find(|&&x| x >= c && x != UNKNOWN_CATEGORY) {
                        return Err(invalid(format!("category code {x} out of range in `{}`", meta.name)));
                    }
                }
                _ => {
                    return Err(invalid(format!("column type does not match kind of `{}`", meta.name)));
                }
            }
        }
        if let Some(g) = &groups {
            if g.codes.len() != n_rows {
                return Err(invalid("group column length mismatch"));
            }
            if let Some(x) = g.codes.iter().find(|&&x| x as usize >= g.labels.len()) {
                return Err(invalid(format!("group code {x} outside the declared group set")));
            }
        }
        Ok(Dataset {
            features,
            columns,
            groups,
            aux: BTreeMap::new(),
            n_rows,
        })
    }

    /// Builds an all-binary dataset from row-major 0/1 values.
    pub fn from_binary_rows(names: &[String], rows: &[Vec<u8>]) -> Result<Self> {
        let features = names.iter().map(FeatureMeta::binary).collect();
        let columns = (0..names.len())
            .map(|j| Column::Numeric(rows.iter().map(|r| f64::from(r[j])).collect()))
            .collect();
        Dataset::new(features, columns, None)
    }

    pub fn with_aux(mut self, name: impl Into<String>, values: Vec<String>) -> Result<Self> {
        if values.len() != self.n_rows {
            return Err(invalid("auxiliary column length mismatch"));
        }
        self.aux.insert(name.into(), values);
        Ok(self)
    }

    pub fn with_groups(mut self, groups: GroupColumn) -> Result<Self> {
        let aux = std::mem::take(&mut self.aux);
        let mut out = Dataset::new(self.features, self.columns, Some(groups))?;
        out.aux = aux;
        Ok(out)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn features(&self) -> &[FeatureMeta] {
        &self.features
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn column(&self, j: usize) -> &Column {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn groups(&self) -> Option<&GroupColumn> {
        self.groups.as_ref()
    }

    pub fn aux(&self, name: &str) -> Option<&[String]> {
        self.aux.get(name).map(Vec::as_slice)
    }

    /// Numeric value of feature `j` at `row` (category code for categorical).
    pub fn value(&self, row: usize, j: usize) -> f64 {
        match &self.columns[j] {
            Column::Numeric(v) => v[row],
            Column::Categorical(v) => f64::from(v[row]),
        }
    }

    /// Rows carrying a category outside the recorded set.
    pub fn unknown_category_rows(&self) -> Vec<bool> {
        let mut out = vec![false; self.n_rows];
        for col in &self.columns {
            if let Column::Categorical(v) = col {
                for (o, &c) in out.iter_mut().zip(v) {
                    *o |= c == UNKNOWN_CATEGORY;
                }
            }
        }
        out
    }

    /// Row subset keeping the feature metadata (ranges, categories) intact.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            groups: self.groups.as_ref().map(|g| GroupColumn {
                name: g.name.clone(),
                labels: g.labels.clone(),
                codes: rows.iter().map(|&i| g.codes[i]).collect(),
            }),
            aux: self
                .aux
                .iter()
                .map(|(k, v)| (k.clone(), rows.iter().map(|&i| v[i].clone()).collect()))
                .collect(),
            n_rows: rows.len(),
        }
    }

    /// Replaces feature metadata (e.g. with a fitted model's domains) keeping
    /// values. Column kinds must agree.
    pub fn with_features(&self, features: Vec<FeatureMeta>) -> Result<Dataset> {
        if features.len() != self.features.len()
            || features.iter().zip(&self.features).any(|(a, b)| a.kind != b.kind || a.name != b.name)
        {
            return Err(invalid("feature metadata does not match the dataset columns"));
        }
        let mut out = self.clone();
        out.features = features;
        Ok(out)
    }
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
