//! Bounded dual simplex on the dual of the restricted covering LP.
//!
//! Rows correspond to pooled clauses `k`, so the basis stays as small as
//! the pool even when the number of covered samples is large:
//!
//! ```text
//!   min  -Σ_i μ_i + b·ν + Σ_k ρ_k
//!   s.t. Σ_i a_ik μ_i - h_k ν - ρ_k + t_k = c_k     (one row per clause)
//!        0 ≤ μ_i ≤ U,  ν, ρ_k, t_k ≥ 0
//! ```
//!
//! `ν` is present only when the budget multiplier is a free variable. The
//! multipliers of the rows give the primal clause weights, `r_k = -y_k`.
#![allow(clippy::needless_range_loop)]

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use fixedbitset::FixedBitSet;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Minimum number of basis updates between reinversions; larger bases
/// reinvert less often since inversion is cubic in the row count.
const REFACTOR_EVERY: usize = 100;
/// Updates after which the final basis is reinverted before being accepted.
const VERIFY_AFTER: usize = 25;
const PIVOT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
/// Scale of the random cost perturbation of the `μ_i` that breaks the
/// massive ties among identically covered samples.
const PERTURBATION: f64 = 1e-7;

/// Ratio-test breakpoint `(ratio, candidate)`, ordered by ratio then index.
#[derive(Clone, Copy, Debug)]
struct Breakpoint(f64, usize);

impl PartialEq for Breakpoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Breakpoint {}

impl PartialOrd for Breakpoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Breakpoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    Mu(usize),
    Nu,
    Rho(usize),
    Slack(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Lower,
    Upper,
    Basic,
}

/// One dual row: the samples a pooled clause covers, its cost and its
/// budget usage.
#[derive(Clone, Debug)]
pub(crate) struct Row {
    pub cover: FixedBitSet,
    pub list: Vec<u32>,
    pub cost: f64,
    pub h: f64,
}

impl Row {
    pub fn new(cover: FixedBitSet, cost: f64, h: f64) -> Self {
        let list = cover.ones().map(|i| i as u32).collect();
        Row { cover, list, cost, h }
    }
}

pub(crate) struct DualSimplex {
    n_mu: usize,
    mu_upper: f64,
    nu_cost: Option<f64>,
    rows: Vec<Row>,
    head: Vec<Var>,
    binv: Vec<Vec<f64>>,
    xb: Vec<f64>,
    st_mu: Vec<Status>,
    st_nu: Status,
    st_rho: Vec<Status>,
    st_t: Vec<Status>,
    d_mu: Vec<f64>,
    d_nu: f64,
    d_rho: Vec<f64>,
    d_t: Vec<f64>,
    since_refactor: usize,
    pub pivots: usize,
    primal_tol: f64,
    pert: Vec<f64>,
    perturbed: bool,
}

impl DualSimplex {
    /// Starts from the slack basis with every `μ_i` at its upper bound, which
    /// is dual feasible for non-negative `b`.
    pub fn new(n_mu: usize, mu_upper: f64, nu_cost: Option<f64>, primal_tol: f64) -> Self {
        DualSimplex {
            n_mu,
            mu_upper,
            nu_cost,
            rows: Vec::new(),
            head: Vec::new(),
            binv: Vec::new(),
            xb: Vec::new(),
            st_mu: vec![Status::Upper; n_mu],
            st_nu: Status::Lower,
            st_rho: Vec::new(),
            st_t: Vec::new(),
            d_mu: vec![-1.0; n_mu],
            d_nu: nu_cost.unwrap_or(0.0),
            d_rho: Vec::new(),
            d_t: Vec::new(),
            since_refactor: 0,
            pivots: 0,
            primal_tol,
            pert: perturbation(n_mu),
            perturbed: false,
        }
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    fn cost(&self, v: Var) -> f64 {
        match v {
            Var::Mu(i) => -1.0 - self.mu_pert(i),
            Var::Nu => self.nu_cost.unwrap_or(0.0),
            Var::Rho(_) => 1.0,
            Var::Slack(_) => 0.0,
        }
    }

    fn mu_pert(&self, i: usize) -> f64 {
        if self.perturbed {
            self.pert[i]
        } else {
            0.0
        }
    }

    fn upper(&self, v: Var) -> f64 {
        match v {
            Var::Mu(_) => self.mu_upper,
            _ => f64::INFINITY,
        }
    }

    fn entry(&self, k: usize, v: Var) -> f64 {
        match v {
            Var::Mu(i) => f64::from(u8::from(self.rows[k].cover.contains(i))),
            Var::Nu => -self.rows[k].h,
            Var::Rho(j) => {
                if j == k {
                    -1.0
                } else {
                    0.0
                }
            }
            Var::Slack(j) => {
                if j == k {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn nonbasic_value(&self, st: Status) -> f64 {
        if st == Status::Upper {
            self.mu_upper
        } else {
            0.0
        }
    }

    fn basic_row(&self, v: Var) -> Option<usize> {
        self.head.iter().position(|&h| h == v)
    }

    pub fn mu_value(&self, i: usize) -> f64 {
        match self.st_mu[i] {
            Status::Basic => {
                let r = self.basic_row(Var::Mu(i)).expect("basic μ has a row");
                self.xb[r].clamp(0.0, self.mu_upper)
            }
            st => self.nonbasic_value(st),
        }
    }

    pub fn mu_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.st_mu.iter().map(|&st| self.nonbasic_value(st)).collect();
        for (r, &v) in self.head.iter().enumerate() {
            if let Var::Mu(i) = v {
                out[i] = self.xb[r].clamp(0.0, self.mu_upper);
            }
        }
        out
    }

    pub fn nu_value(&self) -> f64 {
        match self.basic_row(Var::Nu) {
            Some(r) => self.xb[r].max(0.0),
            None => 0.0,
        }
    }

    fn rho_value(&self, k: usize) -> f64 {
        match self.basic_row(Var::Rho(k)) {
            Some(r) => self.xb[r].max(0.0),
            None => 0.0,
        }
    }

    /// Objective of the dual problem in its maximisation form,
    /// `Σμ - bν - Σρ`.
    pub fn dual_objective(&self) -> f64 {
        let mu: f64 = self.mu_values().iter().sum();
        let rho: f64 = (0..self.rows.len()).map(|k| self.rho_value(k)).sum();
        mu - self.nu_cost.unwrap_or(0.0) * self.nu_value() - rho
    }

    /// Row multipliers `y = c_B B⁻¹`.
    pub fn row_duals(&self) -> Vec<f64> {
        let k = self.rows.len();
        let mut y = vec![0.0; k];
        for (j, &v) in self.head.iter().enumerate() {
            let c = self.cost(v);
            if c != 0.0 {
                for (yk, b) in y.iter_mut().zip(&self.binv[j]) {
                    *yk += c * b;
                }
            }
        }
        y
    }

    /// Appends a row for a new clause. The new slack becomes basic, which
    /// keeps the current basis dual feasible.
    pub fn add_row(&mut self, row: Row) {
        let k = self.rows.len();
        // new B⁻¹ row: -a_Bᵀ B⁻¹ (entries of the new row on current basics)
        let mut new_row = vec![0.0; k + 1];
        for (j, &v) in self.head.iter().enumerate() {
            let a = match v {
                Var::Mu(i) => f64::from(u8::from(row.cover.contains(i))),
                Var::Nu => -row.h,
                _ => 0.0,
            };
            if a != 0.0 {
                for (n, b) in new_row.iter_mut().zip(&self.binv[j]) {
                    *n -= a * b;
                }
            }
        }
        new_row[k] = 1.0;
        for r in &mut self.binv {
            r.push(0.0);
        }
        self.binv.push(new_row);

        let mut t = row.cost + row.h * self.nu_value();
        for &i in &row.list {
            t -= self.mu_value(i as usize);
        }
        self.rows.push(row);
        self.head.push(Var::Slack(k));
        self.xb.push(t);
        self.st_rho.push(Status::Lower);
        self.st_t.push(Status::Basic);
        self.d_rho.push(1.0);
        self.d_t.push(0.0);
    }

    /// Changes the common upper bound of the `μ_i`; the basis stays dual
    /// feasible, primal values are recomputed.
    pub fn set_mu_upper(&mut self, u: f64) {
        self.mu_upper = u;
        self.compute_xb();
    }

    fn compute_xb(&mut self) {
        let k = self.rows.len();
        let mut rhs: Vec<f64> = self.rows.iter().map(|r| r.cost).collect();
        if self.mu_upper != 0.0 {
            for (kk, row) in self.rows.iter().enumerate() {
                let n_up = row
                    .list
                    .iter()
                    .filter(|&&i| self.st_mu[i as usize] == Status::Upper)
                    .count();
                rhs[kk] -= self.mu_upper * n_up as f64;
            }
        }
        self.xb = (0..k)
            .map(|j| self.binv[j].iter().zip(&rhs).map(|(b, r)| b * r).sum())
            .collect();
    }

    fn compute_reduced_costs(&mut self) {
        let y = self.row_duals();
        let mut acc = vec![0.0; self.n_mu];
        for (row, &yk) in self.rows.iter().zip(&y) {
            if yk != 0.0 {
                for &i in &row.list {
                    acc[i as usize] += yk;
                }
            }
        }
        for i in 0..self.n_mu {
            self.d_mu[i] = if self.st_mu[i] == Status::Basic {
                0.0
            } else {
                -1.0 - self.mu_pert(i) - acc[i]
            };
        }
        let yh: f64 = self.rows.iter().zip(&y).map(|(r, yk)| yk * r.h).sum();
        self.d_nu = if self.st_nu == Status::Basic {
            0.0
        } else {
            self.nu_cost.unwrap_or(0.0) + yh
        };
        for (k, &yk) in y.iter().enumerate() {
            self.d_rho[k] = if self.st_rho[k] == Status::Basic { 0.0 } else { 1.0 + yk };
            self.d_t[k] = if self.st_t[k] == Status::Basic { 0.0 } else { -yk };
        }
    }

    fn refactor(&mut self) -> Result<()> {
        self.refactor_inner()
    }

    /// Reinverts the basis exploiting its shape: slack and `ρ` columns are
    /// signed unit vectors, so only the block of dense (`μ`, `ν`) columns
    /// on the rows without a basic unit column needs a true inverse.
    fn refactor_inner(&mut self) -> Result<()> {
        let k = self.rows.len();
        if k == 0 {
            return Ok(());
        }
        let singular = || Error::Numerical(format!("singular basis after {} pivots", self.pivots));
        // unit[row] = (basis position, sign) of the unit column on that row
        let mut unit: Vec<Option<(usize, f64)>> = vec![None; k];
        let mut dense: Vec<usize> = Vec::new();
        for (j, &v) in self.head.iter().enumerate() {
            let (row, sign) = match v {
                Var::Slack(r) => (r, 1.0),
                Var::Rho(r) => (r, -1.0),
                _ => {
                    dense.push(j);
                    continue;
                }
            };
            if unit[row].is_some() {
                return Err(singular());
            }
            unit[row] = Some((j, sign));
        }
        let free_rows: Vec<usize> = (0..k).filter(|&r| unit[r].is_none()).collect();
        let p = dense.len();
        if free_rows.len() != p {
            return Err(singular());
        }
        let inv = if p == 0 {
            DMatrix::<f64>::zeros(0, 0)
        } else {
            DMatrix::from_fn(p, p, |a, b| self.entry(free_rows[a], self.head[dense[b]]))
                .try_inverse()
                .ok_or_else(singular)?
        };
        for row in self.binv.iter_mut() {
            row.iter_mut().for_each(|x| *x = 0.0);
        }
        // dense basics depend only on the free rows
        for (a, &j) in dense.iter().enumerate() {
            for (b, &r) in free_rows.iter().enumerate() {
                self.binv[j][r] = inv[(a, b)];
            }
        }
        // unit basic on row r: σ·(e_r - Σ_a a_{r,dense a}·inv[a, ·])
        let mut coef = vec![0.0; p];
        for r in 0..k {
            let Some((j, sign)) = unit[r] else { continue };
            for (a, &jd) in dense.iter().enumerate() {
                coef[a] = self.entry(r, self.head[jd]);
            }
            let mut out = vec![0.0; k];
            out[r] = sign;
            for (a, &c) in coef.iter().enumerate() {
                if c != 0.0 {
                    for (b, &fr) in free_rows.iter().enumerate() {
                        out[fr] -= sign * c * inv[(a, b)];
                    }
                }
            }
            self.binv[j] = out;
        }
        self.since_refactor = 0;
        self.recompute();
        Ok(())
    }

    /// Recomputes basic values and reduced costs from the current inverse.
    fn recompute(&mut self) {
        self.compute_xb();
        self.compute_reduced_costs();
    }

    fn refactor_interval(&self) -> usize {
        REFACTOR_EVERY.max(self.rows.len() / 4)
    }

    /// Dual steepest edge: the infeasible basic variable maximising
    /// `infeasibility² / ‖e_rᵀB⁻¹‖²`.
    fn leaving_row(&self) -> Option<(usize, bool)> {
        let mut best: Option<(usize, bool, f64)> = None;
        for (r, (&v, &x)) in self.head.iter().zip(&self.xb).enumerate() {
            let ub = self.upper(v);
            let tol = self.primal_tol * (1.0 + x.abs().min(1e6));
            let (infeas, below) = if x < -tol {
                (-x, true)
            } else if x > ub + tol {
                (x - ub, false)
            } else {
                continue;
            };
            let w: f64 = self.binv[r].iter().map(|b| b * b).sum();
            let score = infeas * infeas / w.max(1e-12);
            if best.is_none_or(|(_, _, b)| score > b) {
                best = Some((r, below, score));
            }
        }
        best.map(|(r, below, _)| (r, below))
    }

    /// Puts every nonbasic `μ_i` at the bound its reduced cost asks for.
    /// Returns whether any bound changed.
    fn restore_dual_feasibility(&mut self) -> bool {
        let mut changed = false;
        for i in 0..self.n_mu {
            let want = match self.st_mu[i] {
                Status::Basic => continue,
                Status::Upper if self.d_mu[i] > DUAL_TOL => Status::Lower,
                Status::Lower if self.d_mu[i] < -DUAL_TOL => Status::Upper,
                st => st,
            };
            if self.st_mu[i] != want {
                self.st_mu[i] = want;
                changed = true;
            }
        }
        if changed {
            self.compute_xb();
        }
        changed
    }

    /// Optimises the current restricted problem: a perturbed phase that
    /// avoids stalling on tied reduced costs, then a clean-up phase on the
    /// true costs starting from the perturbed optimum.
    pub fn solve(&mut self, max_pivots: usize) -> Result<()> {
        if self.rows.is_empty() {
            return Ok(());
        }
        for perturbed in [true, false] {
            self.perturbed = perturbed;
            if self.since_refactor >= self.refactor_interval() {
                self.refactor()?;
            } else {
                self.recompute();
            }
            self.restore_dual_feasibility();
            self.run(max_pivots)?;
        }
        Ok(())
    }

    /// Runs dual simplex pivots until the basis is primal feasible.
    fn run(&mut self, max_pivots: usize) -> Result<()> {
        let k = self.rows.len();
        if k == 0 {
            return Ok(());
        }
        let start = self.pivots;
        let mut verified = false;
        let mut alpha_mu = vec![0.0; self.n_mu];
        loop {
            if self.since_refactor >= self.refactor_interval() {
                self.refactor()?;
            }
            let lr = self.leaving_row();            let Some((r, below)) = lr else {
                if verified || self.since_refactor == 0 {
                    return Ok(());
                }
                if self.since_refactor >= VERIFY_AFTER {
                    self.refactor()?;
                } else {
                    self.recompute();
                }
                verified = true;
                continue;
            };
            verified = false;
            if self.pivots - start > max_pivots {
                return Err(Error::Numerical(format!(
                    "dual simplex exceeded {max_pivots} pivots ({k} rows, {} samples)",
                    self.n_mu
                )));
            }
            let sigma = if below { -1.0 } else { 1.0 };
            let rho_r = self.binv[r].clone();

            alpha_mu.iter_mut().for_each(|a| *a = 0.0);
            for (row, &w) in self.rows.iter().zip(&rho_r) {
                if w != 0.0 {
                    for &i in &row.list {
                        alpha_mu[i as usize] += w;
                    }
                }
            }
            let alpha_nu: f64 = -self.rows.iter().zip(&rho_r).map(|(row, w)| w * row.h).sum::<f64>();
            // candidate list: (var, scaled alpha, reduced cost)
            let mut cands: Vec<(Var, f64, f64)> = Vec::new();
            let mut consider = |v: Var, st: Status, a: f64, d: f64| {
                let ah = sigma * a;
                if (st == Status::Lower && ah > PIVOT_TOL) || (st == Status::Upper && ah < -PIVOT_TOL) {
                    cands.push((v, ah, d));
                }
            };
            for i in 0..self.n_mu {
                if self.st_mu[i] != Status::Basic {
                    consider(Var::Mu(i), self.st_mu[i], alpha_mu[i], self.d_mu[i]);
                }
            }
            if self.nu_cost.is_some() && self.st_nu != Status::Basic {
                consider(Var::Nu, self.st_nu, alpha_nu, self.d_nu);
            }
            for kk in 0..k {
                if self.st_rho[kk] != Status::Basic {
                    consider(Var::Rho(kk), self.st_rho[kk], -rho_r[kk], self.d_rho[kk]);
                }
                if self.st_t[kk] != Status::Basic {
                    consider(Var::Slack(kk), self.st_t[kk], rho_r[kk], self.d_t[kk]);
                }
            }
            if cands.is_empty() {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    continue;
                }
                return Err(Error::Numerical("restricted LP dual unbounded".into()));
            }

            // Bound-flipping ratio test: walk the breakpoints in order; boxed
            // μ's whose flip leaves the leaving row still infeasible are
            // flipped instead of entering. Harris-style tolerance picks the
            // entering variable among near-ties by pivot magnitude.
            let infeas = if below { -self.xb[r] } else { self.xb[r] - self.upper(self.head[r]) };
            let ratios: Vec<f64> = cands.iter().map(|&(_, ah, d)| (d / ah).max(0.0)).collect();
            let mut heap: BinaryHeap<Reverse<Breakpoint>> =
                ratios.iter().enumerate().map(|(j, &t)| Reverse(Breakpoint(t, j))).collect();
            let mut slope = infeas;
            let mut flipped: Vec<usize> = Vec::new();
            while let Some(Reverse(Breakpoint(_, j))) = heap.pop() {
                let (v, ah, _) = cands[j];
                let width = ah.abs() * self.upper(v);
                if heap.is_empty() || !matches!(v, Var::Mu(_)) || slope - width <= self.primal_tol {
                    break;
                }
                slope -= width;
                flipped.push(j);
            }
            let mut is_flipped = vec![false; cands.len()];
            flipped.iter().for_each(|&j| is_flipped[j] = true);
            let rest: Vec<usize> = (0..cands.len()).filter(|&j| !is_flipped[j]).collect();
            let theta_max = rest
                .iter()
                .map(|&j| {
                    let (_, ah, d) = cands[j];
                    (d.abs() + DUAL_TOL) / ah.abs()
                })
                .fold(f64::INFINITY, f64::min);
            let jq = rest
                .iter()
                .copied()
                .filter(|&j| ratios[j] <= theta_max)
                .max_by(|&a, &b| cands[a].1.abs().total_cmp(&cands[b].1.abs()).then(b.cmp(&a)))
                .unwrap_or(rest[0]);
            let (q, ahq, dq) = cands[jq];
            let theta_d = (dq / ahq).max(0.0);
            let flips: Vec<Var> = flipped.iter().map(|&j| cands[j].0).collect();
            // entering column
            let col: Vec<f64> = match q {
                Var::Mu(i) => {
                    let ks: Vec<usize> = (0..k).filter(|&kk| self.rows[kk].cover.contains(i)).collect();
                    self.binv.iter().map(|b| ks.iter().map(|&kk| b[kk]).sum()).collect()
                }
                Var::Nu => self
                    .binv
                    .iter()
                    .map(|b| -b.iter().zip(&self.rows).map(|(x, row)| x * row.h).sum::<f64>())
                    .collect(),
                Var::Rho(kk) => self.binv.iter().map(|b| -b[kk]).collect(),
                Var::Slack(kk) => self.binv.iter().map(|b| b[kk]).collect(),
            };
            let alpha_q = sigma * ahq;
            if (col[r] - alpha_q).abs() > 1e-7 * (1.0 + alpha_q.abs()) {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    continue;
                }
                return Err(Error::Numerical("inconsistent pivot element".into()));
            }
            // dual update
            for i in 0..self.n_mu {
                if self.st_mu[i] != Status::Basic {
                    self.d_mu[i] -= theta_d * sigma * alpha_mu[i];
                }
            }
            if self.st_nu != Status::Basic {
                self.d_nu -= theta_d * sigma * alpha_nu;
            }
            for kk in 0..k {
                if self.st_rho[kk] != Status::Basic {
                    self.d_rho[kk] -= theta_d * sigma * -rho_r[kk];
                }
                if self.st_t[kk] != Status::Basic {
                    self.d_t[kk] -= theta_d * sigma * rho_r[kk];
                }
            }
            // bound flips, then the primal step
            if !flips.is_empty() {
                let mut delta = vec![0.0; k];
                for &v in &flips {
                    let Var::Mu(i) = v else { unreachable!("only μ is boxed") };
                    let (st, d) = match self.st_mu[i] {
                        Status::Upper => (Status::Lower, -self.mu_upper),
                        _ => (Status::Upper, self.mu_upper),
                    };
                    self.st_mu[i] = st;
                    for (kk, row) in self.rows.iter().enumerate() {
                        if row.cover.contains(i) {
                            delta[kk] += d;
                        }
                    }
                }
                for (x, b) in self.xb.iter_mut().zip(&self.binv) {
                    *x -= b.iter().zip(&delta).map(|(p, q)| p * q).sum::<f64>();
                }
            }
            let leaving = self.head[r];
            let target = if below { 0.0 } else { self.upper(leaving) };
            let theta_p = (self.xb[r] - target) / col[r];
            let q_old = match q {
                Var::Mu(i) => self.nonbasic_value(self.st_mu[i]),
                _ => 0.0,
            };
            for (x, c) in self.xb.iter_mut().zip(&col) {
                *x -= theta_p * c;
            }
            self.xb[r] = q_old + theta_p;
            // basis inverse update
            let piv = col[r];
            for x in self.binv[r].iter_mut() {
                *x /= piv;
            }
            let pivot_row = self.binv[r].clone();
            for (j, row) in self.binv.iter_mut().enumerate() {
                let f = col[j];
                if j != r && f != 0.0 {
                    for (x, p) in row.iter_mut().zip(&pivot_row) {
                        *x -= f * p;
                    }
                }
            }

            let leave_status = if below { Status::Lower } else { Status::Upper };
            let leave_d = -sigma * theta_d;
            self.set_status(leaving, leave_status, leave_d);
            self.set_status(q, Status::Basic, 0.0);
            self.head[r] = q;
            self.pivots += 1;
            self.since_refactor += 1;
        }
    }

    fn set_status(&mut self, v: Var, st: Status, d: f64) {
        match v {
            Var::Mu(i) => {
                self.st_mu[i] = st;
                self.d_mu[i] = d;
            }
            Var::Nu => {
                self.st_nu = st;
                self.d_nu = d;
            }
            Var::Rho(k) => {
                self.st_rho[k] = st;
                self.d_rho[k] = d;
            }
            Var::Slack(k) => {
                self.st_t[k] = st;
                self.d_t[k] = d;
            }
        }
    }
}

fn perturbation(n: usize) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    (0..n).map(|_| PERTURBATION * (1.0 + rng.gen::<f64>())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(n: usize, on: &[usize]) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(n);
        on.iter().for_each(|&i| b.insert(i));
        b
    }

    #[test]
    fn two_column_cover() {
        // 4 samples, column A covers all at cost 0.1, B covers all at 0.3,
        // no slack allowed (U large means ξ is expensive)
        let mut s = DualSimplex::new(4, 10.0, None, 1e-10);
        s.add_row(Row::new(bits(4, &[0, 1, 2, 3]), 0.1, 0.0));
        s.add_row(Row::new(bits(4, &[0, 1, 2, 3]), 0.3, 0.0));
        s.solve(1000).unwrap();
        let y = s.row_duals();
        approx::assert_abs_diff_eq!(-y[0], 1.0, epsilon = 1e-9);
        approx::assert_abs_diff_eq!(-y[1], 0.0, epsilon = 1e-9);
        approx::assert_abs_diff_eq!(s.dual_objective(), 0.1, epsilon = 1e-9);
    }

    #[test]
    fn warm_start_after_bound_change() {
        let mut s = DualSimplex::new(3, 5.0, None, 1e-10);
        s.add_row(Row::new(bits(3, &[0, 1]), 0.2, 0.0));
        s.add_row(Row::new(bits(3, &[2]), 0.5, 0.0));
        s.solve(1000).unwrap();
        approx::assert_abs_diff_eq!(s.dual_objective(), 0.7, epsilon = 1e-9);
        // with μ ≤ 0.3 leaving sample 2 uncovered is cheaper (0.3 < 0.5)
        s.set_mu_upper(0.3);
        s.solve(1000).unwrap();
        approx::assert_abs_diff_eq!(s.dual_objective(), 0.2 + 0.3, epsilon = 1e-9);
    }
}
