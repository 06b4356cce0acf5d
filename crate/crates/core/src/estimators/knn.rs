use serde::{Deserialize, Serialize};

use super::encode::Standardizer;
use crate::data::Dataset;
use crate::error::{invalid, Result};

/// k-nearest-neighbour propensity: group frequencies among the `k` closest
/// training rows in standardised Euclidean distance. Ties are broken by
/// training row index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub groups: Vec<String>,
    pub encoder: Standardizer,
    pub k: usize,
    pub train: Vec<Vec<f64>>,
    pub codes: Vec<u32>,
}

impl KnnModel {
    pub fn fit(data: &Dataset, k: usize) -> Result<Self> {
        let groups = super::check_groups(data)?;
        if k == 0 || k > data.n_rows() {
            return Err(invalid(format!("k must lie in [1, {}], got {k}", data.n_rows())));
        }
        let encoder = Standardizer::fit(data)?;
        let train = encoder.transform(data)?;
        Ok(KnnModel {
            groups,
            encoder,
            k,
            train,
            codes: data.groups().expect("checked").codes.clone(),
        })
    }

    pub fn predict_proba(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        let x = self.encoder.transform(data)?;
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.train.len());
        Ok(x.iter()
            .map(|q| {
                dist.clear();
                dist.extend(self.train.iter().enumerate().map(|(i, t)| {
                    (t.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i)
                }));
                let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                if self.k < dist.len() {
                    dist.select_nth_unstable_by(self.k - 1, cmp);
                }
                let mut p = vec![0.0; self.groups.len()];
                for &(_, i) in &dist[..self.k] {
                    p[self.codes[i] as usize] += 1.0 / self.k as f64;
                }
                p
            })
            .collect())
    }
}
