//! Synthetic benchmark for exclusion discovery: independent rare and common
//! binary features with every row satisfying `c_a = 1 ∧ c_b = 1` removed.
//! A support learner should recover the inclusion `c_a = 0 ∨ c_b = 0`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ReferenceConfig};
use crate::error::{invalid, Result};
use crate::pipeline::{fit_support, SupportConfig};
use crate::rules::{Conjunction, Literal, LiteralValue, Op, RuleForm, RuleSet};
use crate::solver::SearchConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    /// Rows drawn before the exclusion is applied.
    pub n_samples: usize,
    pub n_rare: usize,
    pub n_common: usize,
    pub p_rare: f64,
    pub p_common: f64,
    /// Zero-based indices into the common features.
    pub excluded_pair: (usize, usize),
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_samples: 10_000,
            n_rare: 10,
            n_common: 12,
            p_rare: 0.01,
            p_common: 0.5,
            excluded_pair: (10, 11),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.excluded_pair;
        if a >= self.n_common || b >= self.n_common || a == b {
            return Err(invalid("excluded_pair must name two distinct common features"));
        }
        // 0 and 1 are allowed as degenerate settings (nothing / everything removed)
        for p in [self.p_rare, self.p_common] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn feature_names(&self) -> Vec<String> {
        (1..=self.n_rare)
            .map(|i| format!("r{i}"))
            .chain((1..=self.n_common).map(|i| format!("c{i}")))
            .collect()
    }

    /// Feature indices of the excluded pair in the full row.
    pub fn excluded_features(&self) -> (usize, usize) {
        (self.n_rare + self.excluded_pair.0, self.n_rare + self.excluded_pair.1)
    }

    /// The planted exclusion `c_a = 1 ∧ c_b = 1`; its negation is the
    /// inclusion clause a CNF support should contain.
    pub fn target(&self) -> Conjunction {
        let (a, b) = self.excluded_features();
        let one = |f| Literal::new(f, Op::Eq, LiteralValue::Number(1.0), 0.5);
        Conjunction::new(vec![one(a), one(b)]).expect("distinct features")
    }
}

/// Raw 0/1 rows after the exclusion is applied.
pub fn gen_synthetic_rows(cfg: &SynthConfig) -> Result<Vec<Vec<u8>>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (a, b) = cfg.excluded_features();
    let d = cfg.n_rare + cfg.n_common;
    let mut rows = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        let row: Vec<u8> = (0..d)
            .map(|j| {
                let p = if j < cfg.n_rare { cfg.p_rare } else { cfg.p_common };
                u8::from(rng.gen_bool(p))
            })
            .collect();
        if !(row[a] == 1 && row[b] == 1) {
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn gen_synthetic(cfg: &SynthConfig) -> Result<Dataset> {
    let rows = gen_synthetic_rows(cfg)?;
    Dataset::from_binary_rows(&cfg.feature_names(), &rows)
}

/// Whether a CNF support contains the inclusion clause `¬target`. Exact
/// mode demands an identical clause; `loose` also accepts any stored
/// exclusion that implies the target (a weaker inclusion clause).
pub fn check_recovery(support: &RuleSet, target: &Conjunction, loose: bool) -> Result<bool> {
    if support.form != RuleForm::Cnf {
        return Err(invalid("recovery is defined for CNF support rules"));
    }
    Ok(support.clauses.iter().any(|e| {
        if loose {
            !e.is_all_true() && target.literals().iter().all(|l| e.literals().contains(l))
        } else {
            e == target
        }
    }))
}

/// One benchmark cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub alpha: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub beam_width: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub alpha: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub beam_width: usize,
    pub seed: u64,
    pub recovered: bool,
    pub recovered_loose: bool,
    /// Number of (inclusion) clauses in the learned support.
    pub n_rules: usize,
    /// Clauses that exclude no data row but some reference rows.
    pub n_perfect: usize,
    pub mean_length: f64,
    pub data_coverage: f64,
    pub seconds: f64,
}

/// Grid and fixed settings of a benchmark sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchGrid {
    pub alphas: Vec<f64>,
    pub lambda0s: Vec<f64>,
    pub lambda1s: Vec<f64>,
    pub beam_widths: Vec<usize>,
    pub seeds: Vec<u64>,
    pub synth: SynthConfig,
    pub reference: ReferenceConfig,
    pub search: SearchConfig,
}

impl Default for BenchGrid {
    fn default() -> Self {
        BenchGrid {
            alphas: vec![0.95, 0.96, 0.97, 0.98, 0.99],
            lambda0s: vec![0.0, 1e-6, 1e-4, 1e-2],
            lambda1s: vec![1e-6, 1e-4, 1e-2],
            beam_widths: vec![10, 15, 20, 25, 30],
            seeds: vec![0, 1, 2],
            synth: SynthConfig::default(),
            reference: ReferenceConfig::default(),
            search: SearchConfig::default(),
        }
    }
}

impl BenchGrid {
    pub fn cells(&self) -> Vec<BenchCell> {
        let mut out = Vec::new();
        for &alpha in &self.alphas {
            for &lambda0 in &self.lambda0s {
                for &lambda1 in &self.lambda1s {
                    for &beam_width in &self.beam_widths {
                        for &seed in &self.seeds {
                            out.push(BenchCell {
                                alpha,
                                lambda0,
                                lambda1,
                                beam_width,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Fits a CNF support on the cell's synthetic draw and scores recovery.
    /// The data seed and the reference seed both derive from `cell.seed`,
    /// so all cells sharing a seed see the same data.
    pub fn run_cell(&self, cell: &BenchCell) -> Result<BenchResult> {
        let start = Instant::now();
        let synth = SynthConfig {
            seed: cell.seed,
            ..self.synth.clone()
        };
        let data = gen_synthetic(&synth)?;
        let cfg = SupportConfig {
            alpha: cell.alpha,
            lambda0: cell.lambda0,
            lambda1: cell.lambda1,
            form: RuleForm::Cnf,
            reference: ReferenceConfig {
                seed: self.reference.seed.wrapping_add(cell.seed.wrapping_mul(0x9E37_79B9)),
                ..self.reference.clone()
            },
            search: SearchConfig {
                beam_width: cell.beam_width,
                ..self.search.clone()
            },
            ..SupportConfig::default()
        };
        let fit = fit_support(&data, &cfg)?;
        let target = synth.target();
        let mut n_perfect = 0;
        for e in &fit.rules.clauses {
            let excl_data = e.coverage(&fit.data)?.count_ones(..);
            let excl_ref = e.coverage(&fit.reference)?.count_ones(..);
            if excl_data == 0 && excl_ref > 0 {
                n_perfect += 1;
            }
        }
        let n_rules = fit.rules.clauses.len();
        let covered = fit.rules.coverage(&fit.data)?.count_ones(..);
        Ok(BenchResult {
            alpha: cell.alpha,
            lambda0: cell.lambda0,
            lambda1: cell.lambda1,
            beam_width: cell.beam_width,
            seed: cell.seed,
            recovered: check_recovery(&fit.rules, &target, false)?,
            recovered_loose: check_recovery(&fit.rules, &target, true)?,
            n_rules,
            n_perfect,
            mean_length: if n_rules == 0 { 0.0 } else { fit.rules.literal_count() as f64 / n_rules as f64 },
            data_coverage: covered as f64 / fit.data.n_rows() as f64,
            seconds: start.elapsed().as_secs_f64(),
        })
    }
}
