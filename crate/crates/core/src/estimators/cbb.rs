use serde::{Deserialize, Serialize};

use crate::data::{quantile, Column, Dataset, FeatureKind};
use crate::error::{invalid, Result};

/// Covariate bounding boxes: per group, each continuous feature is boxed to
/// its central `α` quantile range. Categorical and binary features are left
/// unconstrained (their box is the full category set).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CbbModel {
    pub groups: Vec<String>,
    pub alpha: f64,
    pub feature_names: Vec<String>,
    /// `boxes[t][j]` is `Some((lo, hi))` for continuous features.
    pub boxes: Vec<Vec<Option<(f64, f64)>>>,
}

impl CbbModel {
    pub fn fit(data: &Dataset, alpha: f64) -> Result<Self> {
        let groups = super::check_groups(data)?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("box quantile mass must lie in (0, 1], got {alpha}")));
        }
        let codes = &data.groups().expect("checked").codes;
        let (qlo, qhi) = ((1.0 - alpha) / 2.0, (1.0 + alpha) / 2.0);
        let boxes = (0..groups.len() as u32)
            .map(|t| {
                data.features()
                    .iter()
                    .zip(data.columns())
                    .map(|(f, col)| match (f.kind, col) {
                        (FeatureKind::Continuous, Column::Numeric(v)) => {
                            let mut xs: Vec<f64> =
                                v.iter().zip(codes).filter(|(_, &c)| c == t).map(|(x, _)| *x).collect();
                            xs.sort_by(f64::total_cmp);
                            Some((quantile(&xs, qlo), quantile(&xs, qhi)))
                        }
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        Ok(CbbModel {
            groups,
            alpha,
            feature_names: data.features().iter().map(|f| f.name.clone()).collect(),
            boxes,
        })
    }

    /// `out[i][t]` is 1.0 when row `i` lies inside group `t`'s box.
    pub fn membership(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        if data.features().iter().map(|f| &f.name).ne(self.feature_names.iter()) {
            return Err(invalid("dataset features do not match the fitted model"));
        }
        Ok((0..data.n_rows())
            .map(|i| {
                self.boxes
                    .iter()
                    .map(|b| {
                        let inside = b.iter().enumerate().all(|(j, bx)| match bx {
                            Some((lo, hi)) => {
                                let x = data.value(i, j);
                                *lo <= x && x <= *hi
                            }
                            None => true,
                        });
                        f64::from(u8::from(inside))
                    })
                    .collect()
            })
            .collect())
    }
}
