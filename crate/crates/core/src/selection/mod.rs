//! Feature standardization and LASSO-based selection.

mod lasso;
mod standardize;

pub use lasso::{
    lasso_fit, select_features, selection_frequency, LassoFit, LassoProblem, SelectionConfig,
    SelectionResult, KKT_TOLERANCE,
};
pub use standardize::{standardize_fit_apply, StandardizationParams};
