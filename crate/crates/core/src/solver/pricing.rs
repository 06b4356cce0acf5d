//! Beam-search pricing: finds clauses with negative reduced cost
//! `λ0 + λ1·p + w_pen·(penalised rows covered) - Σ_{covered} μ_i`.

use std::cmp::Ordering;
use std::collections::HashSet;

use fixedbitset::FixedBitSet;

use crate::data::{FeatureKind, LiteralSet};
use crate::rules::{LiteralValue, Op};

/// Everything pricing needs from the master problem, as bitsets over the
/// covered rows (`cover_cols`) and the penalised rows (`pen_cols`).
pub(crate) struct PricingInput<'a> {
    pub set: &'a LiteralSet,
    pub cover_cols: &'a [FixedBitSet],
    pub pen_cols: &'a [FixedBitSet],
    pub mu: &'a [f64],
    pub pen_weight: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub pooled: &'a HashSet<Vec<usize>>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct BeamParams {
    pub beam_width: usize,
    pub max_columns: usize,
    pub max_degree: usize,
    pub rc_tol: f64,
}

struct Candidate {
    ids: Vec<usize>,
    rc: f64,
    bound: f64,
    parent: Option<usize>,
    lit: usize,
}

struct Member {
    ids: Vec<usize>,
    cover: FixedBitSet,
    pen: FixedBitSet,
}

fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    a.rc.total_cmp(&b.rc)
        .then(a.ids.len().cmp(&b.ids.len()))
        .then_with(|| a.ids.cmp(&b.ids))
}

/// Can literal `new` join the clause `ids` without being redundant or
/// contradictory? Continuous features admit one lower and one upper bound
/// forming a non-empty interval; categorical features admit several
/// exclusions; binary features admit a single level.
pub(crate) fn compatible(set: &LiteralSet, ids: &[usize], new: usize) -> bool {
    let l = set.literal(new);
    let kind = set.features()[l.feature].kind;
    for &e in ids {
        if e == new {
            return false;
        }
        let o = set.literal(e);
        if o.feature != l.feature {
            continue;
        }
        match kind {
            FeatureKind::Binary => return false,
            FeatureKind::Categorical => {
                if !(o.op == Op::Ne && l.op == Op::Ne) {
                    return false;
                }
            }
            FeatureKind::Continuous => {
                let (le, gt) = match (o.op, l.op) {
                    (Op::Le, Op::Gt) => (o.value, l.value),
                    (Op::Gt, Op::Le) => (l.value, o.value),
                    _ => return false,
                };
                if let (LiteralValue::Number(le), LiteralValue::Number(gt)) = (le, gt) {
                    if gt >= le {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Σ μ_i over rows set in both `a` and `b` (and `mask`).
fn weighted_and(a: &FixedBitSet, b: &FixedBitSet, mask: &FixedBitSet, mu: &[f64]) -> f64 {
    let mut total = 0.0;
    let bits = usize::BITS as usize;
    for (w, ((x, y), m)) in a.as_slice().iter().zip(b.as_slice()).zip(mask.as_slice()).enumerate() {
        let mut word = x & y & m;
        while word != 0 {
            let t = word.trailing_zeros() as usize;
            total += mu[w * bits + t];
            word &= word - 1;
        }
    }
    total
}

/// Returns up to `max_columns` new clauses (literal ids, reduced cost) with
/// reduced cost below `-rc_tol`, most negative first.
pub(crate) fn price(input: &PricingInput<'_>, p: &BeamParams) -> Vec<(Vec<usize>, f64)> {
    let n_lits = input.set.len();
    if n_lits == 0 || p.max_degree == 0 {
        return Vec::new();
    }
    let n_cover = input.mu.len();
    let mut mask = FixedBitSet::with_capacity(n_cover);
    for (i, &m) in input.mu.iter().enumerate() {
        if m > 0.0 {
            mask.insert(i);
        }
    }
    let mut full_cover = FixedBitSet::with_capacity(n_cover);
    full_cover.insert_range(..);
    let n_pen = input.pen_cols.first().map_or(0, FixedBitSet::len);
    let mut full_pen = FixedBitSet::with_capacity(n_pen);
    full_pen.insert_range(..);

    let mut found: Vec<Candidate> = Vec::new();
    let mut beam: Vec<Member> = vec![Member {
        ids: Vec::new(),
        cover: full_cover,
        pen: full_pen,
    }];
    let mut seen: HashSet<Vec<usize>> = HashSet::new();

    for degree in 1..=p.max_degree {
        let mut level: Vec<Candidate> = Vec::new();
        for (bi, member) in beam.iter().enumerate() {
            for lit in 0..n_lits {
                if !compatible(input.set, &member.ids, lit) {
                    continue;
                }
                let mut ids = member.ids.clone();
                let pos = ids.partition_point(|&x| x < lit);
                ids.insert(pos, lit);
                if !seen.insert(ids.clone()) {
                    continue;
                }
                let gain = weighted_and(&member.cover, &input.cover_cols[lit], &mask, input.mu);
                let pen = member.pen.intersection_count(&input.pen_cols[lit]) as f64;
                let reg = input.lambda0 + input.lambda1 * degree as f64;
                level.push(Candidate {
                    rc: reg + input.pen_weight * pen - gain,
                    // extensions only lose coverage; penalty optimistically zero
                    bound: reg + input.lambda1 - gain,
                    ids,
                    parent: Some(bi),
                    lit,
                });
            }
        }
        if level.is_empty() {
            break;
        }
        level.sort_by(rank);

        let mut next: Vec<Member> = Vec::new();
        if degree < p.max_degree {
            for c in level.iter().filter(|c| c.bound < -p.rc_tol).take(p.beam_width) {
                let parent = &beam[c.parent.expect("extension has a parent")];
                let mut cover = parent.cover.clone();
                cover.intersect_with(&input.cover_cols[c.lit]);
                let mut pen = parent.pen.clone();
                pen.intersect_with(&input.pen_cols[c.lit]);
                next.push(Member {
                    ids: c.ids.clone(),
                    cover,
                    pen,
                });
            }
        }
        found.extend(
            level
                .into_iter()
                .filter(|c| c.rc < -p.rc_tol && !input.pooled.contains(&c.ids)),
        );
        found.sort_by(rank);
        found.truncate(p.max_columns);
        if next.is_empty() {
            break;
        }
        beam = next;
    }
    found.into_iter().map(|c| (c.ids, c.rc)).collect()
}
