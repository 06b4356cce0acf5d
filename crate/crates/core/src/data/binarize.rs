use std::collections::HashMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::{quantile, Column, Dataset, FeatureKind, FeatureMeta};
use crate::error::{invalid, Result};
use crate::rules::{Literal, LiteralValue, Op};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinarizationConfig {
    /// Number of quantile bins for continuous features (10 = deciles).
    pub num_quantiles: usize,
    /// Emit `x > q` / `x != v` literals alongside `x <= q` / `x = v`.
    pub include_negations: bool,
}

impl Default for BinarizationConfig {
    fn default() -> Self {
        BinarizationConfig {
            num_quantiles: 10,
            include_negations: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Data,
    Reference,
}

/// The literal universe: feature domains plus the ordered literal list.
/// Literal indices follow canonical `(feature, op, value)` order.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "LiteralSetRepr", into = "LiteralSetRepr")]
pub struct LiteralSet {
    features: Vec<FeatureMeta>,
    literals: Vec<Literal>,
    index: HashMap<Literal, usize>,
}

#[derive(Serialize, Deserialize)]
struct LiteralSetRepr {
    features: Vec<FeatureMeta>,
    literals: Vec<Literal>,
}

impl From<LiteralSetRepr> for LiteralSet {
    fn from(r: LiteralSetRepr) -> Self {
        LiteralSet::from_parts(r.features, r.literals)
    }
}

impl From<LiteralSet> for LiteralSetRepr {
    fn from(s: LiteralSet) -> Self {
        LiteralSetRepr {
            features: s.features,
            literals: s.literals,
        }
    }
}

impl PartialEq for LiteralSet {
    fn eq(&self, other: &Self) -> bool {
        self.features == other.features && self.literals == other.literals
    }
}

fn is_constant(col: &Column) -> bool {
    match col {
        Column::Numeric(v) => v.windows(2).all(|w| w[0] == w[1]),
        Column::Categorical(v) => v.windows(2).all(|w| w[0] == w[1]),
    }
}

impl LiteralSet {
    fn from_parts(features: Vec<FeatureMeta>, mut literals: Vec<Literal>) -> Self {
        literals.sort();
        literals.dedup();
        let index = literals.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        LiteralSet {
            features,
            literals,
            index,
        }
    }

    /// Derives cut points and literals from `data`.
    pub fn build(data: &Dataset, cfg: &BinarizationConfig) -> Result<LiteralSet> {
        if data.is_empty() {
            return Err(invalid("cannot binarize an empty dataset"));
        }
        if cfg.num_quantiles < 2 {
            return Err(invalid("num_quantiles must be at least 2"));
        }
        let mut features = Vec::with_capacity(data.n_features());
        let mut literals = Vec::new();
        for (j, meta) in data.features().iter().enumerate() {
            let mut meta = meta.clone();
            let col = data.column(j);
            if is_constant(col) {
                log::warn!("feature `{}` is constant; no literals emitted", meta.name);
                meta.thresholds.clear();
                features.push(meta);
                continue;
            }
            match meta.kind {
                FeatureKind::Continuous => {
                    if meta.thresholds.is_empty() {
                        let Column::Numeric(values) = col else { unreachable!() };
                        let mut sorted = values.clone();
                        sorted.sort_by(f64::total_cmp);
                        let mut cuts: Vec<f64> = (1..cfg.num_quantiles)
                            .map(|k| quantile(&sorted, k as f64 / cfg.num_quantiles as f64))
                            .filter(|&q| q > meta.min && q < meta.max)
                            .collect();
                        cuts.dedup();
                        meta.thresholds = cuts;
                    }
                    let width = meta.max - meta.min;
                    for &q in &meta.thresholds {
                        let f = ((q - meta.min) / width).clamp(0.0, 1.0);
                        literals.push(Literal::new(j, Op::Le, LiteralValue::Number(q), f));
                        if cfg.include_negations {
                            literals.push(Literal::new(j, Op::Gt, LiteralValue::Number(q), 1.0 - f));
                        }
                    }
                }
                FeatureKind::Categorical => {
                    let c = meta.categories.len();
                    for k in 0..c as u32 {
                        literals.push(Literal::new(j, Op::Eq, LiteralValue::Category(k), 1.0 / c as f64));
                        if cfg.include_negations {
                            literals.push(Literal::new(
                                j,
                                Op::Ne,
                                LiteralValue::Category(k),
                                (c - 1) as f64 / c as f64,
                            ));
                        }
                    }
                }
                FeatureKind::Binary => {
                    literals.push(Literal::new(j, Op::Eq, LiteralValue::Number(0.0), 0.5));
                    literals.push(Literal::new(j, Op::Eq, LiteralValue::Number(1.0), 0.5));
                }
            }
            meta.validate()?;
            features.push(meta);
        }
        Ok(LiteralSet::from_parts(features, literals))
    }

    pub fn features(&self) -> &[FeatureMeta] {
        &self.features
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn literal(&self, id: usize) -> &Literal {
        &self.literals[id]
    }

    pub fn find(&self, lit: &Literal) -> Option<usize> {
        self.index.get(lit).copied()
    }

    pub fn describe(&self, lit: &Literal) -> String {
        lit.render(&self.features)
    }

    /// Evaluates every literal on `data`, producing one indicator column per
    /// literal. Feature names and kinds must match this universe.
    pub fn binarize(self: &Arc<Self>, data: &Dataset, kind: SampleKind) -> Result<BinarizedDataset> {
        if data.n_features() != self.features.len()
            || data
                .features()
                .iter()
                .zip(&self.features)
                .any(|(a, b)| a.name != b.name || a.kind != b.kind)
        {
            return Err(invalid("dataset features do not match the literal universe"));
        }
        let n = data.n_rows();
        let columns = self
            .literals
            .iter()
            .map(|lit| {
                let mut bits = FixedBitSet::with_capacity(n);
                match data.column(lit.feature) {
                    Column::Numeric(v) => {
                        for (i, &x) in v.iter().enumerate() {
                            if lit.holds_numeric(x) {
                                bits.insert(i);
                            }
                        }
                    }
                    Column::Categorical(v) => {
                        for (i, &c) in v.iter().enumerate() {
                            if lit.holds_category(c) {
                                bits.insert(i);
                            }
                        }
                    }
                }
                bits
            })
            .collect();
        let mut unknown = FixedBitSet::with_capacity(n);
        for (i, u) in data.unknown_category_rows().into_iter().enumerate() {
            if u {
                unknown.insert(i);
            }
        }
        Ok(BinarizedDataset {
            literals: Arc::clone(self),
            columns,
            n_rows: n,
            kind,
            unknown,
        })
    }
}

/// Literal indicator matrix stored column-wise (one bitset per literal).
#[derive(Clone, Debug)]
pub struct BinarizedDataset {
    literals: Arc<LiteralSet>,
    columns: Vec<FixedBitSet>,
    n_rows: usize,
    kind: SampleKind,
    unknown: FixedBitSet,
}

impl BinarizedDataset {
    pub fn literal_set(&self) -> &Arc<LiteralSet> {
        &self.literals
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_literals(&self) -> usize {
        self.columns.len()
    }

    pub fn sample_kind(&self) -> SampleKind {
        self.kind
    }

    pub fn column(&self, lit: usize) -> &FixedBitSet {
        &self.columns[lit]
    }

    pub fn get(&self, row: usize, lit: usize) -> bool {
        self.columns[lit].contains(row)
    }

    pub fn row(&self, row: usize) -> BinarizedRow<'_> {
        assert!(row < self.n_rows, "row {row} out of range");
        BinarizedRow { data: self, row }
    }

    /// Rows that carried an unknown category at load time.
    pub fn unknown_rows(&self) -> &FixedBitSet {
        &self.unknown
    }

    /// Dense 0/1 copy, row-major. Intended for inspection and tests.
    pub fn literal_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.n_rows)
            .map(|i| self.columns.iter().map(|c| u8::from(c.contains(i))).collect())
            .collect()
    }

    pub fn select(&self, rows: &[usize]) -> BinarizedDataset {
        let pick = |src: &FixedBitSet| {
            let mut out = FixedBitSet::with_capacity(rows.len());
            for (k, &i) in rows.iter().enumerate() {
                if src.contains(i) {
                    out.insert(k);
                }
            }
            out
        };
        BinarizedDataset {
            literals: Arc::clone(&self.literals),
            columns: self.columns.iter().map(pick).collect(),
            n_rows: rows.len(),
            kind: self.kind,
            unknown: pick(&self.unknown),
        }
    }

    pub fn same_universe(&self, other: &BinarizedDataset) -> bool {
        Arc::ptr_eq(&self.literals, &other.literals) || *self.literals == *other.literals
    }
}

/// View of one binarized row.
#[derive(Clone, Copy, Debug)]
pub struct BinarizedRow<'a> {
    data: &'a BinarizedDataset,
    row: usize,
}

impl<'a> BinarizedRow<'a> {
    pub fn literal_set(&self) -> &'a LiteralSet {
        &self.data.literals
    }

    pub fn get(&self, lit: usize) -> bool {
        self.data.columns[lit].contains(self.row)
    }

    pub fn index(&self) -> usize {
        self.row
    }
}

/// Builds the literal universe from `data` and binarizes it.
pub fn binarize(data: &Dataset, cfg: &BinarizationConfig) -> Result<BinarizedDataset> {
    let set = Arc::new(LiteralSet::build(data, cfg)?);
    set.binarize(data, SampleKind::Data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Column;

    fn uniform_0_100() -> Dataset {
        let f = vec![FeatureMeta::continuous("x", 0.0, 100.0)];
        Dataset::new(f, vec![Column::Numeric((0..=100).map(f64::from).collect())], None).unwrap()
    }

    #[test]
    fn deciles_on_uniform_range() {
        let b = binarize(&uniform_0_100(), &BinarizationConfig::default()).unwrap();
        let set = b.literal_set();
        assert_eq!(set.features()[0].thresholds.len(), 9);
        assert_eq!(set.len(), 18);
        let le10 = Literal::new(0, Op::Le, LiteralValue::Number(10.0), 0.0);
        let id = set.find(&le10).unwrap();
        approx::assert_abs_diff_eq!(set.literal(id).fraction, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn no_negations_halves_continuous_literals() {
        let cfg = BinarizationConfig {
            num_quantiles: 10,
            include_negations: false,
        };
        let b = binarize(&uniform_0_100(), &cfg).unwrap();
        assert_eq!(b.n_literals(), 9);
    }

    #[test]
    fn binary_literals_half_each() {
        let d = Dataset::from_binary_rows(&["a".into()], &[vec![0], vec![1], vec![1]]).unwrap();
        let b = binarize(&d, &BinarizationConfig::default()).unwrap();
        assert_eq!(b.n_literals(), 2);
        for l in b.literal_set().literals() {
            assert_eq!(l.fraction, 0.5);
        }
        assert_eq!(b.literal_matrix(), vec![vec![1, 0], vec![0, 1], vec![0, 1]]);
    }

    #[test]
    fn categorical_fractions() {
        let cats: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let f = vec![FeatureMeta::categorical("c", cats)];
        let d = Dataset::new(f, vec![Column::Categorical(vec![0, 1, 2, 3, 0])], None).unwrap();
        let b = binarize(&d, &BinarizationConfig::default()).unwrap();
        assert_eq!(b.n_literals(), 8);
        let eq = b.literal_set().literal(0);
        assert_eq!((eq.op, eq.fraction), (Op::Eq, 0.25));
        let ne = b.literal_set().literal(4);
        assert_eq!((ne.op, ne.fraction), (Op::Ne, 0.75));
    }

    #[test]
    fn constant_feature_emits_nothing() {
        let f = vec![FeatureMeta::continuous("x", 1.0, 1.0), FeatureMeta::binary("b")];
        let cols = vec![Column::Numeric(vec![1.0, 1.0]), Column::Numeric(vec![0.0, 1.0])];
        let d = Dataset::new(f, cols, None).unwrap();
        let b = binarize(&d, &BinarizationConfig::default()).unwrap();
        assert_eq!(b.n_literals(), 2);
        assert!(b.literal_set().literals().iter().all(|l| l.feature == 1));
    }

    #[test]
    fn tied_quantiles_deduplicated() {
        let f = vec![FeatureMeta::continuous("x", 0.0, 10.0)];
        let mut v = vec![1.0; 50];
        v.extend([0.0, 10.0, 5.0]);
        let d = Dataset::new(f, vec![Column::Numeric(v)], None).unwrap();
        let b = binarize(&d, &BinarizationConfig::default()).unwrap();
        assert_eq!(b.literal_set().features()[0].thresholds, vec![1.0]);
    }

    #[test]
    fn select_and_complement() {
        let b = binarize(&uniform_0_100(), &BinarizationConfig::default()).unwrap();
        let s = b.select(&[100, 0, 50]);
        assert_eq!(s.n_rows(), 3);
        for (k, &i) in [100usize, 0, 50].iter().enumerate() {
            for lit in 0..b.n_literals() {
                assert_eq!(s.get(k, lit), b.get(i, lit));
            }
        }
        // (x <= q) and (x > q) are complementary on every row
        let set = b.literal_set();
        for (i, l) in set.literals().iter().enumerate() {
            if l.op == Op::Le {
                let g = Literal::new(l.feature, Op::Gt, l.value, 0.0);
                let j = set.find(&g).unwrap();
                for r in 0..b.n_rows() {
                    assert_ne!(b.get(r, i), b.get(r, j));
                }
            }
        }
    }
}
