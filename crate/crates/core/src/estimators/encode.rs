use serde::{Deserialize, Serialize};

use crate::data::{Column, Dataset, FeatureKind, FeatureMeta, UNKNOWN_CATEGORY};
use crate::error::{invalid, Result};

/// Numeric design matrix used by the propensity models: numeric features
/// standardised to zero mean / unit variance, categorical features one-hot
/// encoded and then standardised the same way. Statistics come from the
/// training rows and are reused at prediction time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    features: Vec<FeatureMeta>,
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(invalid("cannot standardise an empty dataset"));
        }
        let mut st = Standardizer {
            features: data.features().to_vec(),
            mean: Vec::new(),
            scale: Vec::new(),
        };
        let raw = st.raw(data)?;
        let dim = st.dim();
        let n = raw.len() as f64;
        st.mean = vec![0.0; dim];
        for row in &raw {
            row.iter().zip(&mut st.mean).for_each(|(x, m)| *m += x / n);
        }
        let mut var = vec![0.0; dim];
        for row in &raw {
            for ((x, m), v) in row.iter().zip(&st.mean).zip(&mut var) {
                *v += (x - m) * (x - m) / n;
            }
        }
        st.scale = var.iter().map(|v| if *v > 1e-24 { v.sqrt() } else { 1.0 }).collect();
        Ok(st)
    }

    pub fn dim(&self) -> usize {
        self.features
            .iter()
            .map(|f| match f.kind {
                FeatureKind::Categorical => f.categories.len(),
                _ => 1,
            })
            .sum()
    }

    pub fn features(&self) -> &[FeatureMeta] {
        &self.features
    }

    fn check(&self, data: &Dataset) -> Result<()> {
        let ok = data.features().len() == self.features.len()
            && data
                .features()
                .iter()
                .zip(&self.features)
                .all(|(a, b)| a.name == b.name && a.kind == b.kind && a.categories == b.categories);
        if !ok {
            return Err(invalid("dataset features do not match the fitted model"));
        }
        Ok(())
    }

    fn raw(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        self.check(data)?;
        let dim = self.dim();
        let mut out = vec![vec![0.0; dim]; data.n_rows()];
        let mut off = 0;
        for (j, f) in self.features.iter().enumerate() {
            match data.column(j) {
                Column::Numeric(v) => {
                    out.iter_mut().zip(v).for_each(|(row, x)| row[off] = *x);
                    off += 1;
                }
                Column::Categorical(v) => {
                    for (row, &c) in out.iter_mut().zip(v) {
                        // unknown categories encode as all-zero indicators
                        if c != UNKNOWN_CATEGORY {
                            row[off + c as usize] = 1.0;
                        }
                    }
                    off += f.categories.len();
                }
            }
        }
        Ok(out)
    }

    /// Standardised rows of `data` (features must match the training data).
    pub fn transform(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        let mut raw = self.raw(data)?;
        for row in &mut raw {
            for ((x, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *x = (*x - m) / s;
            }
        }
        Ok(raw)
    }
}
