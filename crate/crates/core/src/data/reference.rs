use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BinarizedDataset, Column, Dataset, FeatureKind, FeatureMeta, LiteralSet, SampleKind};
use crate::error::{invalid, Result};

/// Size and seed of the uniform reference sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    /// Explicit sample size; `None` means `multiplier * m * d` capped at `cap`.
    pub count: Option<usize>,
    pub multiplier: f64,
    pub cap: usize,
    pub seed: u64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            count: None,
            multiplier: 2.0,
            cap: 500_000,
            seed: 0,
        }
    }
}

impl ReferenceConfig {
    pub fn resolve(&self, m: usize, d: usize) -> usize {
        self.count
            .unwrap_or_else(|| default_reference_count(m, d, self.multiplier, self.cap))
    }
}

/// `ceil(c * m * d)`, clamped to `[1, cap]`.
pub fn default_reference_count(m: usize, d: usize, c: f64, cap: usize) -> usize {
    let n = (c * m as f64 * d as f64).ceil();
    (n as usize).clamp(1, cap.max(1))
}

/// Draws `count` rows uniformly from the product of feature domains:
/// `U[min, max]` for continuous, uniform over categories, fair coin for binary.
pub fn sample_reference_rows(features: &[FeatureMeta], count: usize, seed: u64) -> Result<Dataset> {
    if count == 0 {
        return Err(invalid("reference count must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = Vec::with_capacity(features.len());
    for f in features {
        let col = match f.kind {
            FeatureKind::Continuous => {
                Column::Numeric((0..count).map(|_| rng.gen_range(f.min..=f.max)).collect())
            }
            FeatureKind::Binary => {
                Column::Numeric((0..count).map(|_| f64::from(u8::from(rng.gen_bool(0.5)))).collect())
            }
            FeatureKind::Categorical => {
                let c = f.categories.len() as u32;
                if c == 0 {
                    return Err(invalid(format!("categorical feature `{}` has no categories", f.name)));
                }
                Column::Categorical((0..count).map(|_| rng.gen_range(0..c)).collect())
            }
        };
        columns.push(col);
    }
    Dataset::new(features.to_vec(), columns, None)
}

/// Uniform reference sample binarized against an existing literal universe.
pub fn sample_reference(set: &Arc<LiteralSet>, count: usize, seed: u64) -> Result<BinarizedDataset> {
    let rows = sample_reference_rows(set.features(), count, seed)?;
    set.binarize(&rows, SampleKind::Reference)
}
