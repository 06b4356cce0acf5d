use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Column, Dataset, FeatureKind, FeatureMeta, GroupColumn, UNKNOWN_CATEGORY};
use crate::error::{Error, Result};

/// Declared type of one CSV column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    /// A declared category list closes the category set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
}

/// Schema file contents (JSON).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub features: Vec<FeatureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy_column: Option<String>,
}

impl Schema {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Schema> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Schema> {
        let schema: Schema = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if schema.features.is_empty() {
            return Err(Error::Schema("no features declared".into()));
        }
        let mut names = BTreeSet::new();
        for f in &schema.features {
            if !names.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature `{}`", f.name)));
            }
        }
        Ok(schema)
    }

    /// Closed schema reproducing fitted feature domains, used to load data
    /// for prediction with a stored model.
    pub fn from_features(features: &[FeatureMeta], group_column: Option<&GroupColumn>) -> Schema {
        Schema {
            features: features
                .iter()
                .map(|f| FeatureSpec {
                    name: f.name.clone(),
                    kind: f.kind,
                    min: (f.kind == FeatureKind::Continuous).then_some(f.min),
                    max: (f.kind == FeatureKind::Continuous).then_some(f.max),
                    categories: (f.kind == FeatureKind::Categorical).then(|| f.categories.clone()),
                    thresholds: (f.kind == FeatureKind::Continuous && !f.thresholds.is_empty())
                        .then(|| f.thresholds.clone()),
                })
                .collect(),
            group_column: group_column.map(|g| g.name.clone()),
            groups: group_column.map(|g| g.labels.clone()),
            policy_column: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Map unseen categories to [`UNKNOWN_CATEGORY`] and accept continuous
    /// values outside a declared range instead of failing.
    pub lenient: bool,
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    load_csv_with(path, schema, LoadOptions::default())
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "N/A" | "NaN" | "nan" | "null" | "NULL" | "?")
}

fn parse_binary(cell: &str) -> Option<f64> {
    match cell {
        "1" | "1.0" | "true" | "TRUE" | "True" => Some(1.0),
        "0" | "0.0" | "false" | "FALSE" | "False" => Some(0.0),
        _ => None,
    }
}

pub fn load_csv_with(path: impl AsRef<Path>, schema: &Schema, opts: LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let position = |name: &str| header.iter().position(|h| h == name);

    let mut feature_cols = Vec::with_capacity(schema.features.len());
    for f in &schema.features {
        let idx = position(&f.name)
            .ok_or_else(|| Error::Schema(format!("column `{}` not found in {}", f.name, path.display())))?;
        feature_cols.push(idx);
    }
    let group_col = match &schema.group_column {
        Some(g) => Some(position(g).ok_or_else(|| Error::Schema(format!("group column `{g}` not found")))?),
        None => None,
    };
    if let Some(p) = &schema.policy_column {
        if position(p).is_none() {
            return Err(Error::Schema(format!("policy column `{p}` not found")));
        }
    }
    let aux_cols: Vec<usize> = (0..header.len())
        .filter(|i| !feature_cols.contains(i) && Some(*i) != group_col)
        .collect();

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); schema.features.len()];
    let mut raw_groups = Vec::new();
    let mut aux: Vec<Vec<String>> = vec![Vec::new(); aux_cols.len()];
    let mut missing: BTreeMap<usize, usize> = BTreeMap::new();
    let mut row_numbers = Vec::new();

    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row: r + 1,
            column: String::new(),
            message: e.to_string(),
        })?;
        let cell = |i: usize| record.get(i).unwrap_or("");
        let mut row_missing = false;
        for (j, &c) in feature_cols.iter().enumerate() {
            if is_missing(cell(c)) {
                *missing.entry(j).or_default() += 1;
                row_missing = true;
            }
        }
        if let Some(g) = group_col {
            if is_missing(cell(g)) {
                *missing.entry(usize::MAX).or_default() += 1;
                row_missing = true;
            }
        }
        if row_missing {
            continue;
        }
        for (j, &c) in feature_cols.iter().enumerate() {
            raw[j].push(cell(c).to_string());
        }
        if let Some(g) = group_col {
            raw_groups.push(cell(g).to_string());
        }
        for (a, &c) in aux_cols.iter().enumerate() {
            aux[a].push(cell(c).to_string());
        }
        row_numbers.push(r + 1);
    }

    if !missing.is_empty() {
        let counts = missing
            .into_iter()
            .map(|(j, n)| {
                let name = if j == usize::MAX {
                    schema.group_column.clone().unwrap_or_default()
                } else {
                    schema.features[j].name.clone()
                };
                (name, n)
            })
            .collect();
        return Err(Error::MissingValues { counts });
    }

    let mut features = Vec::with_capacity(schema.features.len());
    let mut columns = Vec::with_capacity(schema.features.len());
    for (spec, cells) in schema.features.iter().zip(&raw) {
        let (meta, column) = build_column(spec, cells, &row_numbers, opts)?;
        features.push(meta);
        columns.push(column);
    }

    let groups = match &schema.group_column {
        Some(name) => {
            let labels: Vec<String> = match &schema.groups {
                Some(g) => g.clone(),
                None => raw_groups.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
            };
            let mut codes = Vec::with_capacity(raw_groups.len());
            for (i, v) in raw_groups.iter().enumerate() {
                let code = labels.iter().position(|l| l == v).ok_or_else(|| Error::UnknownCategory {
                    row: row_numbers[i],
                    column: name.clone(),
                    value: v.clone(),
                })?;
                codes.push(code as u32);
            }
            Some(GroupColumn {
                name: name.clone(),
                labels,
                codes,
            })
        }
        None => None,
    };

    let mut data = Dataset::new(features, columns, groups)?;
    for (a, &c) in aux_cols.iter().enumerate() {
        data = data.with_aux(header[c].clone(), std::mem::take(&mut aux[a]))?;
    }
    Ok(data)
}

fn build_column(
    spec: &FeatureSpec,
    cells: &[String],
    row_numbers: &[usize],
    opts: LoadOptions,
) -> Result<(FeatureMeta, Column)> {
    let parse_err = |i: usize, message: String| Error::Parse {
        row: row_numbers[i],
        column: spec.name.clone(),
        message,
    };
    match spec.kind {
        FeatureKind::Continuous => {
            let mut values = Vec::with_capacity(cells.len());
            for (i, c) in cells.iter().enumerate() {
                let v: f64 = c
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| parse_err(i, format!("`{c}` is not a number")))?;
                values.push(v);
            }
            let observed_min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let observed_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = spec.min.unwrap_or(observed_min);
            let max = spec.max.unwrap_or(observed_max);
            if !opts.lenient {
                if let Some(i) = values.iter().position(|&v| v < min || v > max) {
                    return Err(parse_err(i, format!("{} outside declared range [{min}, {max}]", values[i])));
                }
            }
            let mut meta = FeatureMeta::continuous(spec.name.clone(), min, max);
            if values.is_empty() && spec.min.is_none() {
                meta.min = 0.0;
                meta.max = 0.0;
            }
            meta.thresholds = spec.thresholds.clone().unwrap_or_default();
            Ok((meta, Column::Numeric(values)))
        }
        FeatureKind::Binary => {
            let mut values = Vec::with_capacity(cells.len());
            for (i, c) in cells.iter().enumerate() {
                values.push(parse_binary(c).ok_or_else(|| parse_err(i, format!("`{c}` is not binary")))?);
            }
            Ok((FeatureMeta::binary(spec.name.clone()), Column::Numeric(values)))
        }
        FeatureKind::Categorical => {
            let categories: Vec<String> = match &spec.categories {
                Some(c) => c.clone(),
                None => cells.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
            };
            let mut codes = Vec::with_capacity(cells.len());
            for (i, c) in cells.iter().enumerate() {
                match categories.iter().position(|k| k == c) {
                    Some(k) => codes.push(k as u32),
                    None if opts.lenient => codes.push(UNKNOWN_CATEGORY),
                    None => {
                        return Err(Error::UnknownCategory {
                            row: row_numbers[i],
                            column: spec.name.clone(),
                            value: c.clone(),
                        })
                    }
                }
            }
            Ok((FeatureMeta::categorical(spec.name.clone(), categories), Column::Categorical(codes)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn schema(json: &str) -> Schema {
        Schema::from_json(json).unwrap()
    }

    #[test]
    fn three_rows_two_features() {
        let f = write_tmp("age,sex\n30,M\n41.5,F\n25,F\n");
        let s = schema(
            r#"{"features":[{"name":"age","kind":"continuous"},
                {"name":"sex","kind":"categorical","categories":["M","F"]}]}"#,
        );
        let d = load_csv(f.path(), &s).unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.features()[0].min, 25.0);
        assert_eq!(d.features()[0].max, 41.5);
        assert_eq!(d.column(1), &Column::Categorical(vec![0, 1, 1]));
    }

    #[test]
    fn group_column_set() {
        let f = write_tmp("x,treat\n1,0\n2,1\n3,1\n");
        let s = schema(r#"{"features":[{"name":"x","kind":"continuous"}],"group_column":"treat"}"#);
        let d = load_csv(f.path(), &s).unwrap();
        let g = d.groups().unwrap();
        assert_eq!(g.labels, vec!["0", "1"]);
        assert_eq!(g.codes, vec![0, 1, 1]);
    }

    #[test]
    fn bad_number_names_cell() {
        let f = write_tmp("x\n1\nabc\n");
        let s = schema(r#"{"features":[{"name":"x","kind":"continuous"}]}"#);
        match load_csv(f.path(), &s) {
            Err(Error::Parse { row, column, message }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "x");
                assert!(message.contains("abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_category_closed_schema() {
        let f = write_tmp("c\nM\nX\n");
        let s = schema(r#"{"features":[{"name":"c","kind":"categorical","categories":["M","F"]}]}"#);
        assert!(matches!(load_csv(f.path(), &s), Err(Error::UnknownCategory { .. })));
        let d = load_csv_with(f.path(), &s, LoadOptions { lenient: true }).unwrap();
        assert_eq!(d.unknown_category_rows(), vec![false, true]);
    }

    #[test]
    fn missing_values_counted_per_column() {
        let f = write_tmp("a,b\n1,\nNA,2\n,\n3,4\n");
        let s = schema(r#"{"features":[{"name":"a","kind":"continuous"},{"name":"b","kind":"continuous"}]}"#);
        match load_csv(f.path(), &s) {
            Err(Error::MissingValues { counts }) => {
                assert_eq!(counts, vec![("a".to_string(), 2), ("b".to_string(), 2)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_schema_error() {
        let f = write_tmp("a\n1\n");
        let s = schema(r#"{"features":[{"name":"zz","kind":"binary"}]}"#);
        assert!(matches!(load_csv(f.path(), &s), Err(Error::Schema(_))));
    }

    #[test]
    fn aux_columns_are_kept() {
        let f = write_tmp("x,label\n0,yes\n1,no\n");
        let s = schema(r#"{"features":[{"name":"x","kind":"binary"}]}"#);
        let d = load_csv(f.path(), &s).unwrap();
        assert_eq!(d.aux("label").unwrap(), &["yes".to_string(), "no".to_string()]);
    }
}
