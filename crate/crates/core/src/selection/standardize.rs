use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::numeric::exact_sum;

/// Training-set column statistics. Constant columns map to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    /// Sample standard deviations (n − 1 denominator).
    pub stds: Vec<f64>,
    pub constant: Vec<bool>,
}

impl StandardizationParams {
    pub fn fit(x: ArrayView2<'_, f64>) -> Result<Self> {
        let n = x.nrows();
        if n == 0 || x.ncols() == 0 {
            return Err(Error::invalid("cannot standardize an empty matrix"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite value in training matrix"));
        }
        let mut means = Vec::with_capacity(x.ncols());
        let mut stds = Vec::with_capacity(x.ncols());
        let mut constant = Vec::with_capacity(x.ncols());
        for col in x.axis_iter(Axis(1)) {
            let first = col[0];
            let is_const = col.iter().all(|&v| v == first);
            let mean = exact_sum(col.iter().copied()) / n as f64;
            let var = if n > 1 {
                exact_sum(col.iter().map(|&v| (v - mean) * (v - mean))) / (n - 1) as f64
            } else {
                0.0
            };
            means.push(mean);
            stds.push(var.sqrt());
            constant.push(is_const || var == 0.0);
        }
        Ok(StandardizationParams {
            means,
            stds,
            constant,
        })
    }

    pub fn transform_value(&self, j: usize, v: f64) -> f64 {
        if self.constant[j] {
            0.0
        } else {
            (v - self.means[j]) / self.stds[j]
        }
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(x.ncols(), self.means.len(), "column count differs from fitted params");
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| self.transform_value(j, v));
        }
        out
    }
}

/// Fits on `train`, then transforms both matrices with the training
/// parameters.
pub fn standardize_fit_apply(
    train: ArrayView2<'_, f64>,
    other: ArrayView2<'_, f64>,
) -> Result<(Array2<f64>, Array2<f64>, StandardizationParams)> {
    let params = StandardizationParams::fit(train)?;
    if other.ncols() != train.ncols() {
        return Err(Error::invalid("train and test matrices have different widths"));
    }
    Ok((params.transform(train), params.transform(other), params))
}
