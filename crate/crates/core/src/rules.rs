//! Literals, conjunctions and DNF/CNF rule sets over binarized data.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::data::{BinarizedDataset, BinarizedRow, FeatureKind, FeatureMeta, LiteralSet, UNKNOWN_CATEGORY};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

/// Threshold (continuous), 0/1 level (binary) or category code (categorical).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiteralValue {
    Number(f64),
    Category(u32),
}

impl LiteralValue {
    fn key(&self) -> (u8, u64) {
        match *self {
            // normalise -0.0 so equal thresholds hash equally
            LiteralValue::Number(x) => (0, (x + 0.0).to_bits()),
            LiteralValue::Category(c) => (1, u64::from(c)),
        }
    }
}

impl PartialEq for LiteralValue {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for LiteralValue {}

impl Hash for LiteralValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl Ord for LiteralValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (LiteralValue::Number(a), LiteralValue::Number(b)) => a.total_cmp(b),
            (LiteralValue::Category(a), LiteralValue::Category(b)) => a.cmp(b),
            (LiteralValue::Number(_), LiteralValue::Category(_)) => Ordering::Less,
            (LiteralValue::Category(_), LiteralValue::Number(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for LiteralValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A single test on one feature. Identity (equality, hashing, ordering)
/// ignores `fraction`, which is derived from the feature domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Literal {
    pub feature: usize,
    pub op: Op,
    pub value: LiteralValue,
    /// Share of the feature's domain satisfying the literal.
    pub fraction: f64,
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        self.feature == other.feature && self.op == other.op && self.value == other.value
    }
}

impl Eq for Literal {}

impl Hash for Literal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.feature.hash(state);
        self.op.hash(state);
        self.value.hash(state);
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.feature, self.op, self.value).cmp(&(other.feature, other.op, other.value))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Literal {
    pub fn new(feature: usize, op: Op, value: LiteralValue, fraction: f64) -> Self {
        Literal {
            feature,
            op,
            value,
            fraction,
        }
    }

    pub fn holds_numeric(&self, x: f64) -> bool {
        let LiteralValue::Number(q) = self.value else { return false };
        match self.op {
            Op::Le => x <= q,
            Op::Gt => x > q,
            Op::Eq => x == q,
            Op::Ne => x != q,
        }
    }

    pub fn holds_category(&self, code: u32) -> bool {
        let LiteralValue::Category(v) = self.value else { return false };
        match self.op {
            Op::Eq => code == v && code != UNKNOWN_CATEGORY,
            Op::Ne => code != v,
            Op::Le | Op::Gt => false,
        }
    }

    /// The complementary literal (same feature, opposite test).
    pub fn negated(&self) -> Literal {
        let f = 1.0 - self.fraction;
        match (self.op, self.value) {
            (Op::Le, v) => Literal::new(self.feature, Op::Gt, v, f),
            (Op::Gt, v) => Literal::new(self.feature, Op::Le, v, f),
            // binary levels: (= 0) <-> (= 1)
            (Op::Eq, LiteralValue::Number(x)) => {
                Literal::new(self.feature, Op::Eq, LiteralValue::Number(1.0 - x), f)
            }
            (Op::Ne, LiteralValue::Number(x)) => {
                Literal::new(self.feature, Op::Eq, LiteralValue::Number(x), f)
            }
            (Op::Eq, v) => Literal::new(self.feature, Op::Ne, v, f),
            (Op::Ne, v) => Literal::new(self.feature, Op::Eq, v, f),
        }
    }

    fn check_kind(&self, features: &[FeatureMeta]) -> Result<()> {
        let meta = features
            .get(self.feature)
            .ok_or_else(|| invalid(format!("literal refers to feature {} of {}", self.feature, features.len())))?;
        let ok = match (meta.kind, self.op, self.value) {
            (FeatureKind::Continuous, Op::Le | Op::Gt, LiteralValue::Number(_)) => true,
            (FeatureKind::Binary, Op::Eq, LiteralValue::Number(x)) => x == 0.0 || x == 1.0,
            (FeatureKind::Categorical, Op::Eq | Op::Ne, LiteralValue::Category(c)) => {
                (c as usize) < meta.categories.len()
            }
            _ => false,
        };
        if ok && (0.0..=1.0).contains(&self.fraction) {
            Ok(())
        } else {
            Err(invalid(format!("literal {self:?} does not match feature `{}`", meta.name)))
        }
    }

    pub fn render(&self, features: &[FeatureMeta]) -> String {
        let Some(meta) = features.get(self.feature) else {
            return format!("x{} {:?} {:?}", self.feature, self.op, self.value);
        };
        let name = &meta.name;
        match (self.op, self.value) {
            (Op::Le, LiteralValue::Number(q)) => format!("{name} <= {}", fmt_num(q)),
            (Op::Gt, LiteralValue::Number(q)) => format!("{name} > {}", fmt_num(q)),
            (Op::Eq, LiteralValue::Number(x)) if meta.kind == FeatureKind::Binary => {
                if x == 1.0 {
                    name.clone()
                } else {
                    format!("¬ {name}")
                }
            }
            (Op::Eq, LiteralValue::Category(c)) => format!("{name} = {}", category_name(meta, c)),
            (Op::Ne, LiteralValue::Category(c)) => format!("¬ ({name} = {})", category_name(meta, c)),
            (op, v) => format!("{name} {op:?} {v:?}"),
        }
    }
}

fn category_name(meta: &FeatureMeta, c: u32) -> String {
    meta.categories
        .get(c as usize)
        .cloned()
        .unwrap_or_else(|| format!("#{c}"))
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Conjunction of literals, kept canonically sorted. The empty conjunction is
/// the all-true clause.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Literal>", into = "Vec<Literal>")]
pub struct Conjunction {
    literals: Vec<Literal>,
}

impl TryFrom<Vec<Literal>> for Conjunction {
    type Error = Error;
    fn try_from(lits: Vec<Literal>) -> Result<Self> {
        Conjunction::new(lits)
    }
}

impl From<Conjunction> for Vec<Literal> {
    fn from(c: Conjunction) -> Self {
        c.literals
    }
}

impl Conjunction {
    pub fn all_true() -> Self {
        Conjunction { literals: Vec::new() }
    }

    /// Sorts, deduplicates and merges literals feature by feature: interval
    /// bounds on one continuous feature collapse to the tightest pair, a
    /// category equality absorbs compatible inequalities. Contradictions
    /// (empty interval, two different levels) are rejected.
    pub fn new(mut literals: Vec<Literal>) -> Result<Self> {
        literals.sort();
        literals.dedup();
        let mut out: Vec<Literal> = Vec::with_capacity(literals.len());
        let mut start = 0;
        while start < literals.len() {
            let feature = literals[start].feature;
            let end = start + literals[start..].iter().take_while(|l| l.feature == feature).count();
            merge_feature(&literals[start..end], &mut out)?;
            start = end;
        }
        Ok(Conjunction { literals: out })
    }

    /// Builds a conjunction from literal ids of `set`.
    pub fn from_ids(set: &LiteralSet, ids: &[usize]) -> Result<Self> {
        Conjunction::new(ids.iter().map(|&i| set.literal(i).clone()).collect())
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn degree(&self) -> usize {
        self.literals.len()
    }

    pub fn is_all_true(&self) -> bool {
        self.literals.is_empty()
    }

    /// Checks every literal against the feature kinds and domains.
    pub fn validate(&self, features: &[FeatureMeta]) -> Result<()> {
        self.literals.iter().try_for_each(|l| l.check_kind(features))
    }

    /// Literal ids in `set`, failing on literals outside the universe.
    pub fn resolve(&self, set: &LiteralSet) -> Result<Vec<usize>> {
        self.literals
            .iter()
            .map(|l| set.find(l).ok_or_else(|| Error::UnknownLiteral(set.describe(l))))
            .collect()
    }

    pub fn eval(&self, row: &BinarizedRow<'_>) -> Result<bool> {
        let set = row.literal_set();
        for l in &self.literals {
            let id = set.find(l).ok_or_else(|| Error::UnknownLiteral(set.describe(l)))?;
            if !row.get(id) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Rows of `data` satisfying the conjunction.
    pub fn coverage(&self, data: &BinarizedDataset) -> Result<FixedBitSet> {
        let ids = self.resolve(data.literal_set())?;
        Ok(coverage_of_ids(data, &ids))
    }

    /// Share of the covariate box (under the uniform reference measure)
    /// satisfying the conjunction: the product of per-feature fractions,
    /// with same-feature bounds combined into one interval.
    pub fn volume(&self) -> f64 {
        let mut vol = 1.0;
        let mut i = 0;
        while i < self.literals.len() {
            let f = self.literals[i].feature;
            let group: Vec<&Literal> = self.literals[i..].iter().take_while(|l| l.feature == f).collect();
            i += group.len();
            let v = match group.as_slice() {
                [l] => l.fraction,
                // either a closed interval (<= and >) or several != on one category set
                many if many.iter().all(|l| l.op == Op::Ne) => {
                    1.0 - many.iter().map(|l| 1.0 - l.fraction).sum::<f64>()
                }
                many => many.iter().map(|l| l.fraction).sum::<f64>() - (many.len() - 1) as f64,
            };
            vol *= v.clamp(0.0, 1.0);
        }
        vol
    }

    pub fn render(&self, features: &[FeatureMeta]) -> String {
        if self.literals.is_empty() {
            return "TRUE".into();
        }
        self.literals
            .iter()
            .map(|l| l.render(features))
            .collect::<Vec<_>>()
            .join(" ∧ ")
    }

    /// Renders `¬(this)` as a disjunction of complementary literals.
    pub fn render_negated(&self, features: &[FeatureMeta]) -> String {
        if self.literals.is_empty() {
            return "FALSE".into();
        }
        self.literals
            .iter()
            .map(|l| l.negated().render(features))
            .collect::<Vec<_>>()
            .join(" ∨ ")
    }
}

fn merge_feature(lits: &[Literal], out: &mut Vec<Literal>) -> Result<()> {
    let contradiction = || Error::Contradiction(format!("{lits:?}"));
    let le = lits.iter().filter(|l| l.op == Op::Le).min_by(|a, b| a.value.cmp(&b.value));
    let gt = lits.iter().filter(|l| l.op == Op::Gt).max_by(|a, b| a.value.cmp(&b.value));
    let eqs: Vec<&Literal> = lits.iter().filter(|l| l.op == Op::Eq).collect();
    let nes: Vec<&Literal> = lits.iter().filter(|l| l.op == Op::Ne).collect();
    if (le.is_some() || gt.is_some()) && !(eqs.is_empty() && nes.is_empty()) {
        return Err(invalid(format!("mixed literal kinds on one feature: {lits:?}")));
    }
    if let (Some(a), Some(b)) = (le, gt) {
        if b.value >= a.value {
            return Err(contradiction());
        }
    }
    out.extend(le.cloned());
    out.extend(gt.cloned());
    if eqs.len() > 1 {
        return Err(contradiction());
    }
    if let Some(e) = eqs.first() {
        if nes.iter().any(|n| n.value == e.value) {
            return Err(contradiction());
        }
        out.push((*e).clone());
    } else {
        out.extend(nes.into_iter().cloned());
    }
    Ok(())
}

/// AND of literal columns; all-true for an empty id list.
pub(crate) fn coverage_of_ids(data: &BinarizedDataset, ids: &[usize]) -> FixedBitSet {
    let n = data.n_rows();
    let mut cov = FixedBitSet::with_capacity(n);
    match ids.split_first() {
        None => cov.insert_range(..),
        Some((&first, rest)) => {
            cov.union_with(data.column(first));
            for &id in rest {
                cov.intersect_with(data.column(id));
            }
        }
    }
    cov
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleForm {
    Dnf,
    Cnf,
}

/// Solver metadata attached to a learned rule set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Objective of the rounded rule (Hamming volume + complexity).
    pub objective: f64,
    /// Final restricted-LP objective (lower bound for the rounded value).
    pub lp_objective: f64,
    /// Positives covered by the rounded rule and the number required.
    pub covered: usize,
    pub required: usize,
    pub coverage_shortfall: bool,
    pub cg_iterations: usize,
    pub cg_converged: bool,
    pub pool_size: usize,
}

/// DNF: a row is covered iff some clause holds. CNF is stored as the DNF of
/// its exclusion clauses `E`; a row is covered iff no exclusion holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub form: RuleForm,
    pub clauses: Vec<Conjunction>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl RuleSet {
    pub fn dnf(clauses: Vec<Conjunction>) -> Self {
        RuleSet {
            form: RuleForm::Dnf,
            clauses,
            provenance: Provenance::default(),
        }
    }

    /// CNF given by its exclusion clauses: covers `x` iff no clause holds.
    pub fn cnf(exclusions: Vec<Conjunction>) -> Self {
        RuleSet {
            form: RuleForm::Cnf,
            clauses: exclusions,
            provenance: Provenance::default(),
        }
    }

    pub fn all_true(form: RuleForm) -> Self {
        match form {
            RuleForm::Dnf => RuleSet::dnf(vec![Conjunction::all_true()]),
            RuleForm::Cnf => RuleSet::cnf(Vec::new()),
        }
    }

    pub fn all_false(form: RuleForm) -> Self {
        match form {
            RuleForm::Dnf => RuleSet::dnf(Vec::new()),
            RuleForm::Cnf => RuleSet::cnf(vec![Conjunction::all_true()]),
        }
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    /// True when the underlying clause list is empty or holds the all-true
    /// clause, i.e. the rule accepts everything or nothing.
    pub fn is_trivial(&self) -> bool {
        self.clauses.is_empty() || self.clauses.iter().any(Conjunction::is_all_true)
    }

    /// The complementary rule over the same clauses (De Morgan).
    pub fn complement(&self) -> RuleSet {
        RuleSet {
            form: match self.form {
                RuleForm::Dnf => RuleForm::Cnf,
                RuleForm::Cnf => RuleForm::Dnf,
            },
            clauses: self.clauses.clone(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn eval(&self, row: &BinarizedRow<'_>) -> Result<bool> {
        let mut any = false;
        for c in &self.clauses {
            if c.eval(row)? {
                any = true;
                break;
            }
        }
        Ok(match self.form {
            RuleForm::Dnf => any,
            RuleForm::Cnf => !any,
        })
    }

    pub fn coverage(&self, data: &BinarizedDataset) -> Result<FixedBitSet> {
        let mut any = FixedBitSet::with_capacity(data.n_rows());
        for c in &self.clauses {
            any.union_with(&c.coverage(data)?);
        }
        if self.form == RuleForm::Cnf {
            any.toggle_range(..);
        }
        Ok(any)
    }

    pub fn literal_count(&self) -> usize {
        self.clauses.iter().map(Conjunction::degree).sum()
    }

    /// `K λ0 + λ1 Σ p_k`; zero for the trivial all-true / all-false rules.
    pub fn complexity(&self, lambda0: f64, lambda1: f64) -> Result<f64> {
        if !(lambda0 >= 0.0 && lambda1 >= 0.0) {
            return Err(invalid("complexity weights must be non-negative"));
        }
        if self.is_trivial() {
            return Ok(0.0);
        }
        Ok(self.clauses.len() as f64 * lambda0 + lambda1 * self.literal_count() as f64)
    }

    pub fn validate(&self, features: &[FeatureMeta]) -> Result<()> {
        self.clauses.iter().try_for_each(|c| c.validate(features))
    }

    /// Human-readable listing, one clause per line. With `data`, each line
    /// carries the share of rows satisfying that clause (for CNF: the share
    /// excluded by it).
    pub fn report(&self, features: &[FeatureMeta], data: Option<&BinarizedDataset>) -> Result<String> {
        let mut s = String::new();
        let n = data.map_or(0, BinarizedDataset::n_rows).max(1) as f64;
        match self.form {
            RuleForm::Dnf => {
                if self.clauses.is_empty() {
                    s.push_str("  FALSE\n");
                }
                for (k, c) in self.clauses.iter().enumerate() {
                    let join = if k == 0 { "   " } else { "OR " };
                    let _ = write!(s, "  {join}({})", c.render(features));
                    if let Some(d) = data {
                        let pct = 100.0 * c.coverage(d)?.count_ones(..) as f64 / n;
                        let _ = write!(s, "    [{pct:.1}% of rows]");
                    }
                    s.push('\n');
                }
            }
            RuleForm::Cnf => {
                if self.clauses.is_empty() {
                    s.push_str("  TRUE\n");
                }
                for (k, c) in self.clauses.iter().enumerate() {
                    let join = if k == 0 { "    " } else { "AND " };
                    let _ = write!(s, "  {join}({})", c.render_negated(features));
                    if let Some(d) = data {
                        let pct = 100.0 * c.coverage(d)?.count_ones(..) as f64 / n;
                        let _ = write!(s, "    [excludes {pct:.1}% of rows]");
                    }
                    s.push('\n');
                }
            }
        }
        Ok(s)
    }
}
