//! The three-stage procedure: support rules, propensity-based overlap
//! labels on the support, overlap rules; plus evaluation metrics and a
//! small λ grid search.

mod metrics;
mod model;
mod overlap;
mod search;
mod support;

pub use self::metrics::{evaluate, Metrics};
pub use self::model::{fit_overrule, FitSummary, Membership, OverRuleConfig, OverRuleModel};
pub use self::overlap::{base_labels, fit_overlap, fit_overlap_rule, OverlapConfig, OverlapFit};
pub use self::search::{search_overlap, GridCell, GridSearchConfig, GridSearchResult};
pub use self::support::{fit_support, SupportConfig, SupportFit};
