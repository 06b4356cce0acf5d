//! Shared test oracles: a dense two-phase tableau simplex (Bland's rule)
//! and helpers for tiny all-binary rule-learning instances.
#![allow(dead_code)]

use std::sync::Arc;

use overrule_core::data::{BinarizationConfig, BinarizedDataset, Dataset, LiteralSet, SampleKind};
use overrule_core::rules::{Conjunction, Literal, LiteralValue, Op};
use rand::Rng;

const EPS: f64 = 1e-10;

fn pivot(t: &mut [Vec<f64>], r: usize, c: usize) {
    let p = t[r][c];
    for x in t[r].iter_mut() {
        *x /= p;
    }
    let row = t[r].clone();
    for (i, ti) in t.iter_mut().enumerate() {
        if i != r {
            let f = ti[c];
            if f != 0.0 {
                for (x, y) in ti.iter_mut().zip(&row) {
                    *x -= f * y;
                }
            }
        }
    }
}

/// Bland's-rule primal simplex on the tableau; columns `>= allowed` never enter.
fn run(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) -> bool {
    let rhs = t[0].len() - 1;
    loop {
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let d = cost[j] - basis.iter().enumerate().map(|(i, &b)| cost[b] * t[i][j]).sum::<f64>();
            d < -1e-9
        });
        let Some(j) = entering else { return true };
        let mut best: Option<(usize, f64)> = None;
        for i in 0..t.len() {
            if t[i][j] > EPS {
                let ratio = t[i][rhs] / t[i][j];
                match best {
                    None => best = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12 || (ratio <= br + 1e-12 && basis[i] < basis[bi]) {
                            best = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((r, _)) = best else { return false };
        pivot(t, r, j);
        basis[r] = j;
    }
}

/// `min cᵀx` s.t. `A x = b`, `x ≥ 0`. Returns `None` if infeasible or
/// unbounded.
pub fn lp_min(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = a.len();
    let n = c.len();
    let mut t = vec![vec![0.0; n + m + 1]; m];
    for i in 0..m {
        let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = s * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][n + m] = s * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut cost1 = vec![0.0; n + m];
    cost1[n..].iter_mut().for_each(|x| *x = 1.0);
    run(&mut t, &mut basis, &cost1, n + m);
    let infeas: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &bj)| bj >= n)
        .map(|(i, _)| t[i][n + m])
        .sum();
    if infeas > 1e-8 {
        return None;
    }
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > 1e-9 && !basis.contains(&j)) {
                pivot(&mut t, i, j);
                basis[i] = j;
            }
        }
    }
    let mut cost2 = c.to_vec();
    cost2.extend(std::iter::repeat_n(0.0, m));
    if !run(&mut t, &mut basis, &cost2, n) {
        return None;
    }
    let mut x = vec![0.0; n];
    for (i, &bj) in basis.iter().enumerate() {
        if bj < n {
            x[bj] = t[i][n + m];
        }
    }
    let obj = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    Some((obj, x))
}

/// Binary literal `feature = level`.
pub fn blit(feature: usize, level: u8) -> Literal {
    Literal::new(feature, Op::Eq, LiteralValue::Number(f64::from(level)), 0.5)
}

pub fn conj(lits: &[(usize, u8)]) -> Conjunction {
    Conjunction::new(lits.iter().map(|&(f, v)| blit(f, v)).collect()).unwrap()
}

/// Raw evaluation of a binary-literal conjunction on a 0/1 row.
pub fn raw_covers(c: &Conjunction, row: &[u8]) -> bool {
    c.literals().iter().all(|l| match l.value {
        LiteralValue::Number(v) => f64::from(row[l.feature]) == v,
        LiteralValue::Category(_) => unreachable!("binary only"),
    })
}

pub fn names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("f{j}")).collect()
}

/// Binarizes positives and negatives against one literal universe built
/// from both (so no feature is constant unless it is in both).
pub fn binarize_pair(pos: &[Vec<u8>], neg: &[Vec<u8>]) -> (BinarizedDataset, BinarizedDataset) {
    let d = pos[0].len();
    let all: Vec<Vec<u8>> = pos.iter().chain(neg).cloned().collect();
    let full = Dataset::from_binary_rows(&names(d), &all).unwrap();
    let set = Arc::new(LiteralSet::build(&full, &BinarizationConfig::default()).unwrap());
    let p = set
        .binarize(&Dataset::from_binary_rows(&names(d), pos).unwrap(), SampleKind::Data)
        .unwrap();
    let n = set
        .binarize(&Dataset::from_binary_rows(&names(d), neg).unwrap(), SampleKind::Reference)
        .unwrap();
    (p, n)
}

pub fn random_rows(rng: &mut impl Rng, n: usize, d: usize, p: f64) -> Vec<Vec<u8>> {
    (0..n)
        .map(|_| (0..d).map(|_| u8::from(rng.gen_bool(p))).collect())
        .collect()
}

/// Every conjunction of degree 1..=max_degree over features that are not
/// constant in `rows` (at most one literal per feature).
pub fn all_conjunctions(rows: &[Vec<u8>], max_degree: usize) -> Vec<Conjunction> {
    let d = rows[0].len();
    let live: Vec<usize> = (0..d).filter(|&j| rows.iter().any(|r| r[j] != rows[0][j])).collect();
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<(usize, u8)>)> = vec![(0, Vec::new())];
    while let Some((start, cur)) = stack.pop() {
        if !cur.is_empty() {
            out.push(conj(&cur));
        }
        if cur.len() == max_degree {
            continue;
        }
        for (k, &j) in live.iter().enumerate().skip(start) {
            for v in 0..2u8 {
                let mut next = cur.clone();
                next.push((j, v));
                stack.push((k + 1, next));
            }
        }
    }
    out.sort();
    out
}

/// Oracle LP value of the covering relaxation restricted to `pool`, posed
/// directly from raw rows. `dnf = false` poses the exclusion (CNF) form.
pub fn oracle_lp(
    pool: &[Conjunction],
    pos: &[Vec<u8>],
    neg: &[Vec<u8>],
    alpha: f64,
    l0: f64,
    l1: f64,
    dnf: bool,
) -> f64 {
    let (cover, pen) = if dnf { (pos, neg) } else { (neg, pos) };
    let k = pool.len();
    let mi = cover.len();
    let reg = |c: &Conjunction| {
        if c.is_all_true() {
            0.0
        } else {
            l0 + l1 * c.degree() as f64
        }
    };
    let pen_cnt: Vec<f64> = pool
        .iter()
        .map(|c| pen.iter().filter(|r| raw_covers(c, r)).count() as f64)
        .collect();
    // variables: r (k), s (mi), e (mi), u (k), z (1)
    let nv = 2 * k + 2 * mi + 1;
    let mut cvec = vec![0.0; nv];
    for (j, c) in pool.iter().enumerate() {
        cvec[j] = if dnf { pen_cnt[j] / pen.len() as f64 + reg(c) } else { reg(c) };
    }
    if !dnf {
        for i in 0..mi {
            cvec[k + i] = 1.0 / mi as f64;
        }
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, row) in cover.iter().enumerate() {
        let mut r = vec![0.0; nv];
        for (j, c) in pool.iter().enumerate() {
            if raw_covers(c, row) {
                r[j] = 1.0;
            }
        }
        r[k + i] = 1.0;
        r[k + mi + i] = -1.0;
        a.push(r);
        b.push(1.0);
    }
    for j in 0..k {
        let mut r = vec![0.0; nv];
        r[j] = 1.0;
        r[k + 2 * mi + j] = 1.0;
        a.push(r);
        b.push(1.0);
    }
    let mut r = vec![0.0; nv];
    if dnf {
        for i in 0..mi {
            r[k + i] = 1.0;
        }
    } else {
        r[..k].copy_from_slice(&pen_cnt);
    }
    r[nv - 1] = 1.0;
    a.push(r);
    b.push((1.0 - alpha) * pos.len() as f64);
    lp_min(&cvec, &a, &b).expect("covering LP is feasible").0
}

/// Hamming objective of a DNF clause list (all-true rule costs 1, R = 0).
pub fn dnf_objective(clauses: &[Conjunction], neg: &[Vec<u8>], l0: f64, l1: f64) -> f64 {
    if clauses.iter().any(Conjunction::is_all_true) {
        return 1.0;
    }
    clauses
        .iter()
        .map(|c| {
            neg.iter().filter(|r| raw_covers(c, r)).count() as f64 / neg.len() as f64
                + l0
                + l1 * c.degree() as f64
        })
        .sum()
}

pub fn dnf_covered(clauses: &[Conjunction], pos: &[Vec<u8>]) -> usize {
    pos.iter().filter(|r| clauses.iter().any(|c| raw_covers(c, r))).count()
}

/// Exhaustive optimum over DNFs with at most `max_clauses` clauses of degree
/// ≤ `max_degree` (plus the all-true rule) covering ≥ `required` positives.
pub fn brute_force_dnf(
    pos: &[Vec<u8>],
    neg: &[Vec<u8>],
    required: usize,
    l0: f64,
    l1: f64,
    max_clauses: usize,
    max_degree: usize,
) -> f64 {
    let all: Vec<Vec<u8>> = pos.iter().chain(neg).cloned().collect();
    let cands = all_conjunctions(&all, max_degree);
    let mut best = 1.0; // all-true
    if required == 0 {
        return 0.0;
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        depth: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        cands: &[Conjunction],
        pos: &[Vec<u8>],
        neg: &[Vec<u8>],
        required: usize,
        l0: f64,
        l1: f64,
        max_clauses: usize,
        best: &mut f64,
    ) {
        if !chosen.is_empty() {
            let cl: Vec<Conjunction> = chosen.iter().map(|&i| cands[i].clone()).collect();
            if dnf_covered(&cl, pos) >= required {
                let obj = dnf_objective(&cl, neg, l0, l1);
                if obj < *best {
                    *best = obj;
                }
            }
        }
        if depth == max_clauses {
            return;
        }
        for i in start..cands.len() {
            chosen.push(i);
            rec(depth + 1, i + 1, chosen, cands, pos, neg, required, l0, l1, max_clauses, best);
            chosen.pop();
        }
    }
    let mut chosen = Vec::new();
    rec(0, 0, &mut chosen, &cands, pos, neg, required, l0, l1, max_clauses, &mut best);
    best
}

/// Reduced cost of `c` at the duals of the final LP, computed from raw rows.
pub fn reduced_cost(
    c: &Conjunction,
    st: &overrule_core::solver::LpState,
    pos: &[Vec<u8>],
    neg: &[Vec<u8>],
    l0: f64,
    l1: f64,
    dnf: bool,
) -> f64 {
    let (cover, pen) = if dnf { (pos, neg) } else { (neg, pos) };
    let gain: f64 = cover
        .iter()
        .zip(&st.mu)
        .filter(|(r, _)| raw_covers(c, r))
        .map(|(_, m)| m)
        .sum();
    let pen_cnt = pen.iter().filter(|r| raw_covers(c, r)).count() as f64;
    let reg = l0 + l1 * c.degree() as f64;
    if dnf {
        reg + pen_cnt / pen.len() as f64 - gain
    } else {
        reg + st.nu * pen_cnt - gain
    }
}
