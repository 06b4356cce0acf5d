//! Greedy rounding of the LP relaxation into an integral clause set.

use std::cmp::Ordering;

use fixedbitset::FixedBitSet;

/// Pool column as seen by the rounding step.
pub(crate) struct Candidate<'a> {
    pub ids: &'a [usize],
    /// Rows of the covered set (positives, or reference rows for exclusions).
    pub cover: &'a FixedBitSet,
    pub cost: f64,
    /// Penalised rows used (exclusions only).
    pub used: usize,
}

fn tie(a: &Candidate<'_>, b: &Candidate<'_>) -> Ordering {
    a.ids.len().cmp(&b.ids.len()).then_with(|| a.ids.cmp(b.ids))
}

/// Partial weighted set cover: repeatedly take the column with the lowest
/// cost per newly covered row until `required` rows are covered. Returns the
/// chosen columns and the number covered (which may fall short).
pub(crate) fn greedy_partial_cover(cands: &[Candidate<'_>], n_rows: usize, required: usize) -> (Vec<usize>, usize) {
    let mut covered = FixedBitSet::with_capacity(n_rows);
    let mut chosen = Vec::new();
    let mut count = 0;
    while count < required {
        let mut best: Option<(usize, f64)> = None;
        for (k, c) in cands.iter().enumerate() {
            let new = c.cover.difference_count(&covered);
            if new == 0 {
                continue;
            }
            let ratio = c.cost / new as f64;
            let better = match best {
                None => true,
                Some((b, br)) => match ratio.total_cmp(&br) {
                    Ordering::Less => true,
                    Ordering::Equal => tie(c, &cands[b]) == Ordering::Less,
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((k, ratio));
            }
        }
        let Some((k, _)) = best else { break };
        covered.union_with(cands[k].cover);
        count = covered.count_ones(..);
        chosen.push(k);
    }
    // drop clauses made redundant by later picks, most expensive first
    let mut order: Vec<usize> = (0..chosen.len()).collect();
    order.sort_by(|&a, &b| cands[chosen[b]].cost.total_cmp(&cands[chosen[a]].cost));
    let mut keep = vec![true; chosen.len()];
    for &j in &order {
        keep[j] = false;
        let mut cov = FixedBitSet::with_capacity(n_rows);
        for (jj, &k) in chosen.iter().enumerate() {
            if keep[jj] {
                cov.union_with(cands[k].cover);
            }
        }
        if cov.count_ones(..) < required.min(count) {
            keep[j] = true;
        }
    }
    let chosen: Vec<usize> = chosen.into_iter().zip(keep).filter(|&(_, k)| k).map(|(c, _)| c).collect();
    let mut cov = FixedBitSet::with_capacity(n_rows);
    for &k in &chosen {
        cov.union_with(cands[k].cover);
    }
    (chosen, cov.count_ones(..))
}

/// Chooses exclusion clauses maximising `(excluded reference rows)/n - cost`
/// under a Hamming budget on penalised rows. Free clauses (no penalised rows)
/// go first by net gain, then the rest by net gain per penalised row.
pub(crate) fn greedy_exclusions(cands: &[Candidate<'_>], n_rows: usize, budget: usize) -> Vec<usize> {
    let w = 1.0 / n_rows.max(1) as f64;
    let mut excluded = FixedBitSet::with_capacity(n_rows);
    let mut chosen: Vec<usize> = Vec::new();
    let mut used = 0usize;
    for free_phase in [true, false] {
        loop {
            let mut best: Option<(usize, f64)> = None;
            for (k, c) in cands.iter().enumerate() {
                if chosen.contains(&k) || (c.used == 0) != free_phase || used + c.used > budget {
                    continue;
                }
                let gain = w * c.cover.difference_count(&excluded) as f64 - c.cost;
                if gain <= 1e-12 {
                    continue;
                }
                let score = if free_phase { gain } else { gain / c.used as f64 };
                let better = match best {
                    None => true,
                    Some((b, bs)) => match score.total_cmp(&bs) {
                        Ordering::Greater => true,
                        Ordering::Equal => tie(c, &cands[b]) == Ordering::Less,
                        Ordering::Less => false,
                    },
                };
                if better {
                    best = Some((k, score));
                }
            }
            let Some((k, _)) = best else { break };
            excluded.union_with(cands[k].cover);
            used += cands[k].used;
            chosen.push(k);
        }
    }
    chosen
}

/// Removes chosen clauses whose literals include all literals of another
/// chosen clause: their coverage is contained in it, so they only add cost.
pub(crate) fn drop_subsumed(pool: &[Vec<usize>], chosen: Vec<usize>) -> Vec<usize> {
    let subsumes = |a: &[usize], b: &[usize]| a.iter().all(|x| b.contains(x));
    chosen
        .iter()
        .enumerate()
        .filter(|&(i, &k)| {
            !chosen.iter().enumerate().any(|(j, &o)| {
                j != i && subsumes(&pool[o], &pool[k]) && (pool[o].len() < pool[k].len() || j < i)
            })
        })
        .map(|(_, &k)| k)
        .collect()
}
