use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate, fit_overlap_rule, OverlapConfig, SupportFit};
use crate::error::{invalid, Error, Result};

/// λ grid and fold setup for tuning the overlap rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSearchConfig {
    pub lambda0s: Vec<f64>,
    pub lambda1s: Vec<f64>,
    pub folds: usize,
    /// Cells within this balanced-accuracy margin of the best are eligible;
    /// among them the fewest rules wins.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GridSearchConfig {
    fn default() -> Self {
        GridSearchConfig {
            lambda0s: vec![1e-4, 1e-3, 1e-2, 1e-1],
            lambda1s: vec![1e-4, 1e-3, 1e-2],
            folds: 5,
            tolerance: 0.01,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub lambda0: f64,
    pub lambda1: f64,
    /// Mean over folds, on the fold's training rows.
    pub train_balanced_accuracy: f64,
    pub heldout_balanced_accuracy: f64,
    pub mean_rules: f64,
    pub mean_literals: f64,
    /// Folds where fitting failed (degenerate split or shortfall).
    pub failed_folds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub cells: Vec<GridCell>,
    pub chosen: usize,
}

impl GridSearchResult {
    pub fn best(&self) -> &GridCell {
        &self.cells[self.chosen]
    }
}

fn ba(pred: &[bool], truth: &[bool]) -> Option<f64> {
    evaluate(pred, truth, 0).ok().and_then(|m| m.balanced_accuracy)
}

/// K-fold selection of `(λ0, λ1)` for the overlap rule against fixed
/// base-estimator labels on the support rows `rows`. Cells are scored by
/// mean training balanced accuracy; the selected cell is the one with the
/// fewest rules among those within `tolerance` of the best.
pub fn search_overlap(
    support: &SupportFit,
    rows: &[usize],
    labels: &[bool],
    base: &OverlapConfig,
    grid: &GridSearchConfig,
) -> Result<GridSearchResult> {
    if rows.len() != labels.len() {
        return Err(invalid("rows and labels differ in length"));
    }
    if grid.folds < 2 || grid.folds > rows.len() {
        return Err(invalid(format!("folds must lie in [2, {}]", rows.len())));
    }
    if grid.lambda0s.is_empty() || grid.lambda1s.is_empty() {
        return Err(invalid("empty hyperparameter grid"));
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(grid.seed));
    let fold_of: Vec<usize> = {
        let mut f = vec![0; rows.len()];
        for (pos, &i) in order.iter().enumerate() {
            f[i] = pos % grid.folds;
        }
        f
    };

    let mut cells = Vec::new();
    for &lambda0 in &grid.lambda0s {
        for &lambda1 in &grid.lambda1s {
            let cfg = OverlapConfig {
                lambda0,
                lambda1,
                ..base.clone()
            };
            let (mut tr, mut ho, mut nr, mut nl, mut ok, mut failed) = (0.0, 0.0, 0.0, 0.0, 0usize, 0usize);
            for k in 0..grid.folds {
                let train: Vec<usize> = (0..rows.len()).filter(|&i| fold_of[i] != k).collect();
                let test: Vec<usize> = (0..rows.len()).filter(|&i| fold_of[i] == k).collect();
                let tr_rows: Vec<usize> = train.iter().map(|&i| rows[i]).collect();
                let tr_labels: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
                let rule = match fit_overlap_rule(support, &tr_rows, &tr_labels, &cfg) {
                    Ok(r) => r,
                    Err(e @ (Error::EmptyClass(_) | Error::CoverageShortfall { .. })) => {
                        log::debug!("fold {k} of ({lambda0}, {lambda1}) skipped: {e}");
                        failed += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let cov = rule.coverage(&support.data)?;
                let score = |idx: &[usize]| {
                    let p: Vec<bool> = idx.iter().map(|&i| cov.contains(rows[i])).collect();
                    let t: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
                    ba(&p, &t)
                };
                tr += score(&train).unwrap_or(0.5);
                ho += score(&test).unwrap_or(0.5);
                nr += rule.clauses.len() as f64;
                nl += rule.literal_count() as f64;
                ok += 1;
            }
            if ok == 0 {
                continue;
            }
            let n = ok as f64;
            cells.push(GridCell {
                lambda0,
                lambda1,
                train_balanced_accuracy: tr / n,
                heldout_balanced_accuracy: ho / n,
                mean_rules: nr / n,
                mean_literals: nl / n,
                failed_folds: failed,
            });
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyClass("no grid cell could be fit on any fold".into()));
    }
    let best = cells.iter().map(|c| c.train_balanced_accuracy).fold(f64::NEG_INFINITY, f64::max);
    let chosen = (0..cells.len())
        .filter(|&i| cells[i].train_balanced_accuracy >= best - grid.tolerance)
        .min_by(|&a, &b| {
            let (x, y) = (&cells[a], &cells[b]);
            x.mean_rules
                .total_cmp(&y.mean_rules)
                .then(x.mean_literals.total_cmp(&y.mean_literals))
                .then(y.train_balanced_accuracy.total_cmp(&x.train_balanced_accuracy))
        })
        .expect("best cell is eligible");
    Ok(GridSearchResult { cells, chosen })
}
