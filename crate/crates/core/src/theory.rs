//! Closed-form diagnostics for binary-feature rule classes: the degree bound
//! implied by the per-literal penalty, the uniform deviation bound on
//! empirical rule mass, and the log of the candidate-rule count.
//!
//! These are nominal values. The solver enforces only the degree cap, not the
//! other necessary optimality conditions the bounds assume.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

fn check_lambda1(lambda1: f64) -> Result<()> {
    if !(lambda1 > 0.0 && lambda1 <= 1.0) {
        return Err(invalid(format!("lambda1 must lie in (0, 1], got {lambda1}")));
    }
    Ok(())
}

/// `1 + floor(log2(1/λ1))`: no optimal clause is longer than this.
pub fn max_degree(lambda1: f64) -> Result<usize> {
    check_lambda1(lambda1)?;
    // exact powers of two must not fall one short through rounding
    let l = (1.0 / lambda1).log2();
    let r = l.round();
    let fl = if (l - r).abs() < 1e-12 { r } else { l.floor() };
    Ok(1 + fl as usize)
}

/// Deviation bound for `samples` draws:
/// `sqrt((log(2d)/λ1 + ceil(1 + log2(1/λ1))·log(1/λ1) + log(4/δ)) / (2·samples))`.
/// Use `m` (data rows) for ε_m and `n` (reference rows) for ε_n.
pub fn epsilon_bound(samples: usize, d: usize, lambda1: f64, delta: f64) -> Result<f64> {
    check_lambda1(lambda1)?;
    if samples == 0 || d == 0 {
        return Err(invalid("samples and d must be at least 1"));
    }
    if !(delta > 0.0 && delta < 4.0) {
        return Err(invalid(format!("delta must lie in (0, 4), got {delta}")));
    }
    let inv = 1.0 / lambda1;
    let depth = (1.0 + inv.log2() - 1e-12).ceil();
    let num = inv * (2.0 * d as f64).ln() + depth * inv.ln() + (4.0 / delta).ln();
    Ok((num / (2.0 * samples as f64)).sqrt())
}

/// `log 2 + (1/λ1)·log(2d) + p_max·log(1/λ1)`, the log of the bound on the
/// number of candidate rules.
pub fn candidate_bound_log(d: usize, lambda1: f64) -> Result<f64> {
    check_lambda1(lambda1)?;
    if d == 0 {
        return Err(invalid("d must be at least 1"));
    }
    let inv = 1.0 / lambda1;
    Ok(2f64.ln() + inv * (2.0 * d as f64).ln() + max_degree(lambda1)? as f64 * inv.ln())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub lambda1: f64,
    pub delta: f64,
    pub p_max: usize,
    pub epsilon_m: f64,
    pub epsilon_n: f64,
    pub log_candidate_bound: f64,
}

impl TheoryReport {
    pub fn new(m: usize, n: usize, d: usize, lambda1: f64, delta: f64) -> Result<Self> {
        Ok(TheoryReport {
            m,
            n,
            d,
            lambda1,
            delta,
            p_max: max_degree(lambda1)?,
            epsilon_m: epsilon_bound(m, d, lambda1, delta)?,
            epsilon_n: epsilon_bound(n, d, lambda1, delta)?,
            log_candidate_bound: candidate_bound_log(d, lambda1)?,
        })
    }
}
