//! Restricted master LP over the clause pool.
//!
//! Generic form shared by both rule shapes:
//!
//! ```text
//!   min  Σ_k c_k r_k + w Σ_i s_i
//!   s.t. Σ_k a_ik r_k + s_i ≥ 1        for every covered sample i
//!        g Σ_i s_i + Σ_k h_k r_k ≤ b
//!        0 ≤ r_k ≤ 1, s_i ≥ 0
//! ```
//!
//! * `Budget::Slack` (DNF): `w = 0, g = 1, h = 0` — the false-negative
//!   budget limits the uncovered positives. The budget multiplier is found
//!   by a one-dimensional search over the Lagrangian, each point solved by
//!   the dual simplex with `μ_i ≤ ν`.
//! * `Budget::Hamming` (exclusion clauses of a CNF): `w = 1/n, g = 0` and
//!   `h_k` = number of data rows clause `k` excludes.

use fixedbitset::FixedBitSet;

use super::simplex::{DualSimplex, Row};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Budget {
    Slack,
    Hamming,
}

#[derive(Clone, Debug)]
pub(crate) struct LpSolution {
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    /// Duals of the covering rows (unscaled).
    pub mu: Vec<f64>,
    /// Dual of the budget row (unscaled).
    pub nu: f64,
}

#[derive(Clone, Debug)]
struct Eval {
    nu: f64,
    value: f64,
    slope: f64,
    r: Vec<f64>,
    mu: Vec<f64>,
}

pub(crate) struct Master {
    budget_kind: Budget,
    n_cover: usize,
    budget: f64,
    /// Objective multiplier applied before handing costs to the simplex
    /// (keeps the Hamming form's duals on a unit scale).
    scale: f64,
    costs: Vec<f64>,
    h: Vec<f64>,
    simplex: DualSimplex,
    last_nu: Option<f64>,
    pub pivots_limit: usize,
}

impl Master {
    pub fn new(budget_kind: Budget, n_cover: usize, budget: f64, tol: f64) -> Self {
        let (scale, simplex) = match budget_kind {
            Budget::Slack => (1.0, DualSimplex::new(n_cover, 2.0, None, tol)),
            Budget::Hamming => {
                let scale = n_cover as f64;
                (scale, DualSimplex::new(n_cover, 1.0, Some(budget), tol))
            }
        };
        Master {
            budget_kind,
            n_cover,
            budget,
            scale,
            costs: Vec::new(),
            h: Vec::new(),
            simplex,
            last_nu: None,
            pivots_limit: 200_000,
        }
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn add_column(&mut self, cover: FixedBitSet, cost: f64, h: f64) {
        debug_assert_eq!(cover.len(), self.n_cover);
        self.costs.push(cost);
        self.h.push(h);
        self.simplex.add_row(Row::new(cover, cost * self.scale, h));
    }

    fn primal_from_duals(&self) -> (Vec<f64>, Vec<f64>) {
        let r: Vec<f64> = self.simplex.row_duals().iter().map(|y| (-y).clamp(0.0, 1.0)).collect();
        let s = self.slacks(&r);
        (r, s)
    }

    fn slacks(&self, r: &[f64]) -> Vec<f64> {
        let mut cov = vec![0.0; self.n_cover];
        for (row, &rk) in self.simplex.rows().iter().zip(r) {
            if rk > 0.0 {
                for &i in &row.list {
                    cov[i as usize] += rk;
                }
            }
        }
        cov.into_iter().map(|c| (1.0 - c).max(0.0)).collect()
    }

    fn evaluate(&mut self, nu: f64) -> Result<Eval> {
        self.simplex.set_mu_upper(nu);
        self.simplex.solve(self.pivots_limit)?;
        let (r, s) = self.primal_from_duals();
        let ssum: f64 = s.iter().sum();
        let inner = self.simplex.dual_objective();
        Ok(Eval {
            nu,
            value: inner - self.budget * nu,
            slope: ssum - self.budget,
            r,
            mu: self.simplex.mu_values(),
        })
    }

    pub fn solve(&mut self) -> Result<LpSolution> {
        if self.costs.is_empty() {
            return Err(Error::Numerical("empty column pool".into()));
        }
        match self.budget_kind {
            Budget::Hamming => self.solve_hamming(),
            Budget::Slack => self.solve_slack(),
        }
    }

    fn solve_hamming(&mut self) -> Result<LpSolution> {
        self.simplex.solve(self.pivots_limit)?;
        let (r, s) = self.primal_from_duals();
        let w = 1.0 / self.n_cover as f64;
        let objective = dot(&self.costs, &r) + w * s.iter().sum::<f64>();
        let used = dot(&self.h, &r);
        if used > self.budget + 1e-6 * (1.0 + self.budget) {
            return Err(Error::Numerical(format!(
                "recovered primal violates the budget ({used} > {})",
                self.budget
            )));
        }
        Ok(LpSolution {
            r,
            s,
            objective,
            dual_objective: self.simplex.dual_objective() / self.scale,
            mu: self.simplex.mu_values().iter().map(|m| m / self.scale).collect(),
            nu: self.simplex.nu_value() / self.scale,
        })
    }

    /// Maximises the concave piecewise-linear `L(ν) = inner(ν) - bν` by
    /// intersecting supporting lines, then mixes the two optimal Lagrangian
    /// solutions at the kink so the budget row holds.
    fn solve_slack(&mut self) -> Result<LpSolution> {
        let m = self.n_cover as f64;
        let eps = 1e-9 * (1.0 + m);
        let mut lo = Eval {
            nu: 0.0,
            value: 0.0,
            slope: m - self.budget,
            r: vec![0.0; self.len()],
            mu: vec![0.0; self.n_cover],
        };
        let hi_start = 2.0;
        let mut hi = match self.last_nu {
            Some(nu) if nu > 0.0 && nu < hi_start => {
                let e = self.evaluate(nu)?;
                if e.slope > eps {
                    lo = e;
                    self.evaluate(hi_start)?
                } else {
                    e
                }
            }
            _ => self.evaluate(hi_start)?,
        };
        // without an all-true column the budget may need a larger multiplier
        while hi.slope > eps {
            if hi.nu > 1e6 {
                return Err(Error::Numerical("coverage budget cannot be met by the pool".into()));
            }
            let next = self.evaluate(hi.nu * 4.0)?;
            lo = std::mem::replace(&mut hi, next);
        }
        let mut chosen: Option<Eval> = None;
        for _ in 0..500 {
            if hi.slope >= -eps {
                chosen = Some(hi.clone());
                break;
            }
            if lo.slope <= eps {
                chosen = Some(lo.clone());
                break;
            }
            let nu = (hi.value - lo.value + lo.slope * lo.nu - hi.slope * hi.nu) / (lo.slope - hi.slope);
            let nu = nu.clamp(lo.nu, hi.nu);
            let predicted = lo.value + lo.slope * (nu - lo.nu);
            let e = self.evaluate(nu)?;
            if e.slope.abs() <= eps {
                chosen = Some(e);
                break;
            }
            if e.value >= predicted - 1e-10 * (1.0 + predicted.abs()) || hi.nu - lo.nu < 1e-13 {
                // both lines support L at ν: lo and hi are optimal there
                let theta = (-hi.slope) / (lo.slope - hi.slope);
                let r: Vec<f64> = lo
                    .r
                    .iter()
                    .zip(&hi.r)
                    .map(|(a, b)| theta * a + (1.0 - theta) * b)
                    .collect();
                chosen = Some(Eval {
                    nu,
                    value: e.value,
                    slope: 0.0,
                    r,
                    mu: e.mu,
                });
                break;
            }
            if e.slope > 0.0 {
                lo = e;
            } else {
                hi = e;
            }
        }
        let best = chosen.ok_or_else(|| Error::Numerical("budget multiplier search did not converge".into()))?;
        self.last_nu = Some(best.nu);
        let mut r = best.r;
        r.resize(self.len(), 0.0);
        let s = self.slacks(&r);
        let objective = dot(&self.costs, &r);
        let ssum: f64 = s.iter().sum();
        if ssum > self.budget + 1e-6 * (1.0 + self.budget) {
            return Err(Error::Numerical(format!(
                "recovered primal violates the budget ({ssum} > {})",
                self.budget
            )));
        }
        Ok(LpSolution {
            r,
            s,
            objective,
            dual_objective: best.value,
            mu: best.mu,
            nu: best.nu,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
