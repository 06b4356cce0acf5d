use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Column, Dataset};
use crate::error::{invalid, Error, Result};
use crate::rules::Op;

/// Per-row set of treatments a target policy may take, as indices into the
/// group labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    pub allowed: Vec<Vec<u32>>,
}

/// One condition of a policy rule: `feature op value`. Categorical features
/// accept `=` / `!=` against a category name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: String,
    pub op: Op,
    pub value: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyRule {
    #[serde(default)]
    pub when: Vec<Condition>,
    pub allow: Vec<String>,
}

/// Decision table: the first rule whose conditions all hold gives the
/// allowed set; rows matching nothing get `default` (empty if absent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyRules {
    pub rules: Vec<PolicyRule>,
    #[serde(default)]
    pub default: Vec<String>,
}

impl PolicyRules {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn group_codes(names: &[String], labels: &[String]) -> Result<Vec<u32>> {
    let mut out: Vec<u32> = names
        .iter()
        .map(|n| {
            labels
                .iter()
                .position(|l| l == n)
                .map(|i| i as u32)
                .ok_or_else(|| invalid(format!("policy names unknown treatment `{n}`")))
        })
        .collect::<Result<_>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn holds(data: &Dataset, row: usize, cond: &Condition) -> Result<bool> {
    let j = data
        .feature_index(&cond.feature)
        .ok_or_else(|| invalid(format!("policy condition on unknown feature `{}`", cond.feature)))?;
    match data.column(j) {
        Column::Numeric(v) => {
            let q = cond
                .value
                .as_f64()
                .ok_or_else(|| invalid(format!("condition on `{}` needs a number", cond.feature)))?;
            let x = v[row];
            Ok(match cond.op {
                Op::Le => x <= q,
                Op::Gt => x > q,
                Op::Eq => x == q,
                Op::Ne => x != q,
            })
        }
        Column::Categorical(v) => {
            let name = cond
                .value
                .as_str()
                .ok_or_else(|| invalid(format!("condition on `{}` needs a category name", cond.feature)))?;
            let code = data.features()[j].category_index(name);
            let eq = code == Some(v[row]);
            match cond.op {
                Op::Eq => Ok(eq),
                Op::Ne => Ok(!eq),
                _ => Err(invalid(format!("ordering condition on categorical `{}`", cond.feature))),
            }
        }
    }
}

impl Policy {
    /// Every treatment allowed on every row.
    pub fn full(n_rows: usize, n_groups: usize) -> Self {
        Policy {
            allowed: vec![(0..n_groups as u32).collect(); n_rows],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.allowed.len()
    }

    /// Parses a per-row column of `;`-separated treatment labels.
    pub fn from_column(values: &[String], labels: &[String]) -> Result<Self> {
        let allowed = values
            .iter()
            .map(|v| {
                let names: Vec<String> =
                    v.split(';').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect();
                group_codes(&names, labels)
            })
            .collect::<Result<_>>()?;
        Ok(Policy { allowed })
    }

    /// Evaluates a decision table on every row of `data`.
    pub fn from_rules(rules: &PolicyRules, data: &Dataset, labels: &[String]) -> Result<Self> {
        let sets = rules
            .rules
            .iter()
            .map(|r| group_codes(&r.allow, labels))
            .collect::<Result<Vec<_>>>()?;
        let default = group_codes(&rules.default, labels)?;
        let mut allowed = Vec::with_capacity(data.n_rows());
        for i in 0..data.n_rows() {
            let mut hit = None;
            for (r, set) in rules.rules.iter().zip(&sets) {
                let mut all = true;
                for c in &r.when {
                    if !holds(data, i, c)? {
                        all = false;
                        break;
                    }
                }
                if all {
                    hit = Some(set.clone());
                    break;
                }
            }
            allowed.push(hit.unwrap_or_else(|| default.clone()));
        }
        Ok(Policy { allowed })
    }

    pub fn subset(&self, rows: &[usize]) -> Policy {
        Policy {
            allowed: rows.iter().map(|&i| self.allowed[i].clone()).collect(),
        }
    }
}
