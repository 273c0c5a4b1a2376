//! Logistic regression and MLP comparison models.

mod logistic;
mod mlp;

use ndarray::ArrayView2;

pub use logistic::{fit_logistic_l2, logistic_gradient, logistic_objective, LogisticModel};
pub use mlp::{fit_mlp, Mlp, MlpGradient, MlpParams, MIN_MLP_SAMPLES};

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineModel {
    Logistic(LogisticModel),
    Mlp(Mlp),
}

impl BaselineModel {
    pub fn predict(&self, row: &[f64]) -> f64 {
        match self {
            BaselineModel::Logistic(m) => m.predict(row),
            BaselineModel::Mlp(m) => m.predict(row),
        }
    }

    pub fn predict_rows(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        match self {
            BaselineModel::Logistic(m) => x.rows().into_iter().map(|r| m.predict(&r.to_vec())).collect(),
            BaselineModel::Mlp(m) => m.predict_rows(x),
        }
    }
}
