//! Coverage-constrained minimum-volume rule learning: LP relaxation over a
//! clause pool, column generation by beam search and greedy rounding.
//!
//! A DNF rule `C` covers at least a share `α` of the positives while its
//! (Hamming-relaxed) coverage of the negatives plus complexity is minimal.
//! A CNF rule is learned through its exclusion clauses `E = ¬C`: `E` should
//! capture as much of the negatives as possible while excluding at most
//! `(1 - α)·m` positives, counted clause by clause.

mod lp;
mod pricing;
mod rounding;
mod simplex;

use std::collections::HashSet;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{BinarizedDataset, LiteralSet};
use crate::error::{invalid, Result};
use crate::rules::{coverage_of_ids, Conjunction, Provenance, RuleForm, RuleSet};

use self::lp::{Budget, LpSolution, Master};
use self::pricing::{BeamParams, PricingInput};
use self::rounding::Candidate;

pub use self::pricing_api::default_max_degree;

/// One Neyman–Pearson style rule-learning instance.
#[derive(Clone, Copy, Debug)]
pub struct NpProblem<'a> {
    /// Rows the rule must cover (share `coverage_target`).
    pub positives: &'a BinarizedDataset,
    /// Rows whose coverage is penalised.
    pub negatives: &'a BinarizedDataset,
    pub coverage_target: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub form: RuleForm,
}

impl NpProblem<'_> {
    pub fn validate(&self) -> Result<()> {
        if self.positives.n_rows() == 0 || self.negatives.n_rows() == 0 {
            return Err(invalid("both the covered and the penalised set must be non-empty"));
        }
        if !self.positives.same_universe(self.negatives) {
            return Err(invalid("positives and negatives use different literal universes"));
        }
        if !(self.coverage_target > 0.0 && self.coverage_target <= 1.0) {
            return Err(invalid(format!("coverage target {} outside (0, 1]", self.coverage_target)));
        }
        if !(self.lambda0 >= 0.0 && self.lambda1 >= 0.0) {
            return Err(invalid("complexity weights must be non-negative"));
        }
        Ok(())
    }

    /// `⌈α·m⌉` positives that must be covered.
    pub fn required(&self) -> usize {
        let m = self.positives.n_rows() as f64;
        ((self.coverage_target * m - 1e-9).ceil().max(0.0)) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub beam_width: usize,
    /// Columns added per pricing round; `None` uses the beam width.
    pub columns_per_iter: Option<usize>,
    pub max_cg_iterations: usize,
    /// Depth cap for the beam; `None` derives it from `λ1`.
    pub max_degree: Option<usize>,
    pub lp_tolerance: f64,
    pub rc_tolerance: f64,
    /// Covered rows beyond this count are subsampled inside the LP.
    pub max_cover_rows: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            beam_width: 15,
            columns_per_iter: None,
            max_cg_iterations: 100,
            max_degree: None,
            lp_tolerance: 1e-7,
            rc_tolerance: 1e-6,
            max_cover_rows: 20_000,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 || self.columns_per_iter == Some(0) || self.max_cg_iterations == 0 {
            return Err(invalid("beam width, columns per iteration and CG iterations must be >= 1"));
        }
        if self.max_degree == Some(0) {
            return Err(invalid("max degree must be >= 1"));
        }
        if self.max_cover_rows == 0 {
            return Err(invalid("max_cover_rows must be positive"));
        }
        Ok(())
    }

    pub fn columns(&self) -> usize {
        self.columns_per_iter.unwrap_or(self.beam_width)
    }

    pub fn degree_cap(&self, lambda1: f64) -> usize {
        self.max_degree.unwrap_or_else(|| default_max_degree(lambda1))
    }
}

mod pricing_api {
    /// `1 + ⌊log2(1/λ1)⌋` for `0 < λ1 ≤ 1`; 5 when `λ1 = 0`; 1 for `λ1 > 1`.
    pub fn default_max_degree(lambda1: f64) -> usize {
        if lambda1 <= 0.0 {
            5
        } else if lambda1 >= 1.0 {
            1
        } else {
            crate::theory::max_degree(lambda1).unwrap_or(1)
        }
    }
}

/// Restricted-LP solution over a clause pool. For CNF the LP is posed on
/// the exclusion clauses, so `mu`/`xi` refer to the negatives.
#[derive(Clone, Debug)]
pub struct LpState {
    pub form: RuleForm,
    pub pool: Vec<Conjunction>,
    pub costs: Vec<f64>,
    pub r: Vec<f64>,
    pub xi: Vec<f64>,
    pub mu: Vec<f64>,
    pub nu: f64,
    pub objective: f64,
    pub dual_objective: f64,
    /// Row indices (into the covered set) used by the LP.
    pub cover_rows: Vec<usize>,
}

/// Result of [`fit_np_rules_report`]: the rounded rule plus the final LP.
#[derive(Clone, Debug)]
pub struct NpFit {
    pub rules: RuleSet,
    pub lp: LpState,
    pub cg_iterations: usize,
    pub converged: bool,
}

/// Preprocessed instance: literal columns restricted to the LP's covered
/// rows and to the penalised rows.
struct Instance<'a> {
    problem: &'a NpProblem<'a>,
    set: Arc<LiteralSet>,
    budget_kind: Budget,
    cover_full: &'a BinarizedDataset,
    pen_full: &'a BinarizedDataset,
    cover_rows: Vec<usize>,
    cover_cols: Vec<FixedBitSet>,
    pen_cols: Vec<FixedBitSet>,
    budget: f64,
}

impl<'a> Instance<'a> {
    fn new(problem: &'a NpProblem<'a>, cfg: &SearchConfig) -> Result<Self> {
        problem.validate()?;
        cfg.validate()?;
        let (budget_kind, cover_full, pen_full) = match problem.form {
            RuleForm::Dnf => (Budget::Slack, problem.positives, problem.negatives),
            RuleForm::Cnf => (Budget::Hamming, problem.negatives, problem.positives),
        };
        let n = cover_full.n_rows();
        let cover_rows: Vec<usize> = if n > cfg.max_cover_rows {
            log::warn!(
                "subsampling {} of {n} covered rows inside the LP (max_cover_rows)",
                cfg.max_cover_rows
            );
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut idx = rand::seq::index::sample(&mut rng, n, cfg.max_cover_rows).into_vec();
            idx.sort_unstable();
            idx
        } else {
            (0..n).collect()
        };
        let sub = if cover_rows.len() == n { None } else { Some(cover_full.select(&cover_rows)) };
        let src = sub.as_ref().unwrap_or(cover_full);
        let cover_cols = (0..src.n_literals()).map(|l| src.column(l).clone()).collect();
        let pen_cols = (0..pen_full.n_literals()).map(|l| pen_full.column(l).clone()).collect();
        let one_minus = 1.0 - problem.coverage_target;
        let budget = match budget_kind {
            Budget::Slack => one_minus * cover_rows.len() as f64,
            Budget::Hamming => one_minus * problem.positives.n_rows() as f64,
        };
        Ok(Instance {
            problem,
            set: Arc::clone(problem.positives.literal_set()),
            budget_kind,
            cover_full,
            pen_full,
            cover_rows,
            cover_cols,
            pen_cols,
            budget,
        })
    }

    fn n_cover(&self) -> usize {
        self.cover_rows.len()
    }

    fn and_cols(cols: &[FixedBitSet], n: usize, ids: &[usize]) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(n);
        match ids.split_first() {
            None => out.insert_range(..),
            Some((&f, rest)) => {
                out.union_with(&cols[f]);
                rest.iter().for_each(|&i| out.intersect_with(&cols[i]));
            }
        }
        out
    }

    fn cover_of(&self, ids: &[usize]) -> FixedBitSet {
        Self::and_cols(&self.cover_cols, self.n_cover(), ids)
    }

    fn pen_count(&self, ids: &[usize]) -> usize {
        Self::and_cols(&self.pen_cols, self.pen_full.n_rows(), ids).count_ones(..)
    }

    fn regularizer(&self, ids: &[usize]) -> f64 {
        if ids.is_empty() {
            0.0
        } else {
            self.problem.lambda0 + self.problem.lambda1 * ids.len() as f64
        }
    }

    /// LP cost `c_k` and budget usage `h_k` of a clause.
    fn cost(&self, ids: &[usize]) -> (f64, f64) {
        let pen = self.pen_count(ids) as f64;
        match self.budget_kind {
            Budget::Slack => (pen / self.pen_full.n_rows() as f64 + self.regularizer(ids), 0.0),
            Budget::Hamming => (self.regularizer(ids), pen),
        }
    }

    fn initial_pool(&self) -> Vec<Vec<usize>> {
        let mut pool = Vec::new();
        if self.budget_kind == Budget::Slack {
            pool.push(Vec::new());
        }
        pool.extend((0..self.set.len()).map(|l| vec![l]));
        pool
    }

    fn master(&self, cfg: &SearchConfig) -> Master {
        Master::new(self.budget_kind, self.n_cover(), self.budget, cfg.lp_tolerance.min(1e-9))
    }

    fn add(&self, master: &mut Master, ids: &[usize]) -> f64 {
        let (c, h) = self.cost(ids);
        master.add_column(self.cover_of(ids), c, h);
        c
    }

    fn price(&self, sol: &LpSolution, pooled: &HashSet<Vec<usize>>, cfg: &SearchConfig) -> Vec<(Vec<usize>, f64)> {
        let pen_weight = match self.budget_kind {
            Budget::Slack => 1.0 / self.pen_full.n_rows() as f64,
            Budget::Hamming => sol.nu,
        };
        let input = PricingInput {
            set: &self.set,
            cover_cols: &self.cover_cols,
            pen_cols: &self.pen_cols,
            mu: &sol.mu,
            pen_weight,
            lambda0: self.problem.lambda0,
            lambda1: self.problem.lambda1,
            pooled,
        };
        let params = BeamParams {
            beam_width: cfg.beam_width,
            max_columns: cfg.columns(),
            max_degree: cfg.degree_cap(self.problem.lambda1),
            rc_tol: cfg.rc_tolerance,
        };
        pricing::price(&input, &params)
    }

    fn state(&self, pool: &[Vec<usize>], costs: Vec<f64>, sol: LpSolution) -> Result<LpState> {
        let pool = pool
            .iter()
            .map(|ids| Conjunction::from_ids(&self.set, ids))
            .collect::<Result<Vec<_>>>()?;
        Ok(LpState {
            form: self.problem.form,
            pool,
            costs,
            r: sol.r,
            xi: sol.s,
            mu: sol.mu,
            nu: sol.nu,
            objective: sol.objective,
            dual_objective: sol.dual_objective,
            cover_rows: self.cover_rows.clone(),
        })
    }

    fn round(&self, pool: &[Vec<usize>], costs: &[f64]) -> (Vec<usize>, Provenance) {
        let p = self.problem;
        let m = p.positives.n_rows();
        let required = p.required();
        match self.budget_kind {
            Budget::Slack => {
                let covers: Vec<FixedBitSet> = pool.iter().map(|ids| coverage_of_ids(self.cover_full, ids)).collect();
                let cands: Vec<Candidate<'_>> = pool
                    .iter()
                    .zip(&covers)
                    .zip(costs)
                    .map(|((ids, cover), &cost)| Candidate { ids, cover, cost, used: 0 })
                    .collect();
                let (chosen, covered) = rounding::greedy_partial_cover(&cands, m, required);
                let chosen = rounding::drop_subsumed(pool, chosen);
                let objective = chosen.iter().map(|&k| costs[k]).sum();
                let prov = Provenance {
                    objective,
                    covered,
                    required,
                    coverage_shortfall: covered < required,
                    ..Provenance::default()
                };
                (chosen, prov)
            }
            Budget::Hamming => {
                let n = self.cover_full.n_rows();
                let covers: Vec<FixedBitSet> = pool.iter().map(|ids| coverage_of_ids(self.cover_full, ids)).collect();
                let pens: Vec<FixedBitSet> = pool.iter().map(|ids| coverage_of_ids(self.pen_full, ids)).collect();
                let cands: Vec<Candidate<'_>> = pool
                    .iter()
                    .zip(&covers)
                    .zip(&pens)
                    .zip(costs)
                    .map(|(((ids, cover), pen), &cost)| Candidate {
                        ids,
                        cover,
                        cost,
                        used: pen.count_ones(..),
                    })
                    .collect();
                let budget = ((1.0 - p.coverage_target) * m as f64 + 1e-9).floor() as usize;
                let chosen = rounding::drop_subsumed(pool, rounding::greedy_exclusions(&cands, n, budget));
                let mut excluded_ref = FixedBitSet::with_capacity(n);
                let mut excluded_pos = FixedBitSet::with_capacity(m);
                for &k in &chosen {
                    excluded_ref.union_with(&covers[k]);
                    excluded_pos.union_with(&pens[k]);
                }
                let kept_ref = n - excluded_ref.count_ones(..);
                let objective =
                    chosen.iter().map(|&k| costs[k]).sum::<f64>() + kept_ref as f64 / n as f64;
                let covered = m - excluded_pos.count_ones(..);
                let prov = Provenance {
                    objective,
                    covered,
                    required,
                    coverage_shortfall: covered < required,
                    ..Provenance::default()
                };
                (chosen, prov)
            }
        }
    }

    fn rule_set(&self, pool: &[Vec<usize>], chosen: &[usize], prov: Provenance) -> Result<RuleSet> {
        let mut clauses = chosen
            .iter()
            .map(|&k| Conjunction::from_ids(&self.set, &pool[k]))
            .collect::<Result<Vec<_>>>()?;
        clauses.sort();
        // an all-true clause absorbs everything else
        if clauses.iter().any(Conjunction::is_all_true) {
            clauses = vec![Conjunction::all_true()];
        }
        let rs = match self.problem.form {
            RuleForm::Dnf => RuleSet::dnf(clauses),
            RuleForm::Cnf => RuleSet::cnf(clauses),
        };
        Ok(rs.with_provenance(prov))
    }

    fn resolve_pool(&self, pool: &[Conjunction]) -> Result<Vec<Vec<usize>>> {
        pool.iter().map(|c| c.resolve(&self.set)).collect()
    }
}

/// Solves the LP relaxation restricted to `pool`.
pub fn solve_restricted_lp(problem: &NpProblem<'_>, pool: &[Conjunction], cfg: &SearchConfig) -> Result<LpState> {
    if pool.is_empty() {
        return Err(invalid("the column pool must not be empty"));
    }
    let inst = Instance::new(problem, cfg)?;
    let ids = inst.resolve_pool(pool)?;
    let mut master = inst.master(cfg);
    let costs = ids.iter().map(|c| inst.add(&mut master, c)).collect();
    let sol = master.solve()?;
    inst.state(&ids, costs, sol)
}

/// Beam-search pricing against the duals of `state`; returns clauses with
/// negative reduced cost not already pooled (empty at convergence).
pub fn price_columns(problem: &NpProblem<'_>, state: &LpState, cfg: &SearchConfig) -> Result<Vec<Conjunction>> {
    let inst = Instance::new(problem, cfg)?;
    if state.mu.len() != inst.n_cover() {
        return Err(invalid("LP state does not match the problem"));
    }
    let ids = inst.resolve_pool(&state.pool)?;
    let pooled: HashSet<Vec<usize>> = ids.into_iter().collect();
    let sol = LpSolution {
        r: state.r.clone(),
        s: state.xi.clone(),
        objective: state.objective,
        dual_objective: state.dual_objective,
        mu: state.mu.clone(),
        nu: state.nu,
    };
    inst.price(&sol, &pooled, cfg)
        .into_iter()
        .map(|(ids, _)| Conjunction::from_ids(&inst.set, &ids))
        .collect()
}

/// Greedy set-cover rounding over the pool of `state`.
pub fn round_greedy(problem: &NpProblem<'_>, state: &LpState) -> Result<RuleSet> {
    let inst = Instance::new(problem, &SearchConfig::default())?;
    let ids = inst.resolve_pool(&state.pool)?;
    let costs: Vec<f64> = ids.iter().map(|c| inst.cost(c).0).collect();
    let (chosen, mut prov) = inst.round(&ids, &costs);
    prov.lp_objective = state.objective;
    prov.pool_size = ids.len();
    inst.rule_set(&ids, &chosen, prov)
}

/// Column generation followed by greedy rounding. A coverage shortfall is
/// flagged in the provenance, not raised.
pub fn fit_np_rules(problem: &NpProblem<'_>, cfg: &SearchConfig) -> Result<RuleSet> {
    fit_np_rules_report(problem, cfg).map(|f| f.rules)
}

pub fn fit_np_rules_report(problem: &NpProblem<'_>, cfg: &SearchConfig) -> Result<NpFit> {
    let inst = Instance::new(problem, cfg)?;
    let mut master = inst.master(cfg);
    let mut pool = inst.initial_pool();
    let mut pooled: HashSet<Vec<usize>> = pool.iter().cloned().collect();
    let mut costs: Vec<f64> = pool.iter().map(|ids| inst.add(&mut master, ids)).collect();

    let mut converged = false;
    let mut iterations = 0;
    let mut sol = master.solve()?;
    while iterations < cfg.max_cg_iterations {
        iterations += 1;
        let new = inst.price(&sol, &pooled, cfg);
        log::debug!(
            "cg iteration {iterations}: lp {:.6}, {} new columns, best rc {:?}",
            sol.objective,
            new.len(),
            new.first().map(|c| c.1)
        );
        if new.is_empty() {
            converged = true;
            break;
        }
        for (ids, _) in new {
            costs.push(inst.add(&mut master, &ids));
            pooled.insert(ids.clone());
            pool.push(ids);
        }
        sol = master.solve()?;
    }
    if !converged {
        log::warn!("column generation stopped after {iterations} iterations without converging");
    }
    let (chosen, mut prov) = inst.round(&pool, &costs);
    prov.lp_objective = sol.objective;
    prov.cg_iterations = iterations;
    prov.cg_converged = converged;
    prov.pool_size = pool.len();
    let rules = inst.rule_set(&pool, &chosen, prov)?;
    let lp = inst.state(&pool, costs, sol)?;
    Ok(NpFit {
        rules,
        lp,
        cg_iterations: iterations,
        converged,
    })
}
