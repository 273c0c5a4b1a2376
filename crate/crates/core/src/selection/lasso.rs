//! Squared-error LASSO by cyclic coordinate descent on the Gram matrix.
//!
//! The data enter only through the centred Gram matrix `XcᵀXc` and
//! `Xcᵀyc`, both formed with exactly rounded sums, so a fit does not depend
//! on the order of the rows. The intercept is recovered from the column
//! means.

use ndarray::{ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::kfold_split;
use crate::numeric::{exact_dot, exact_sum};

pub const CHANGE_TOLERANCE: f64 = 1e-7;
pub const MAX_SWEEPS: usize = 10_000;
/// Bound on the KKT residual of every returned solution.
pub const KKT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub sweeps: usize,
}

impl LassoFit {
    pub fn support(&self) -> Vec<usize> {
        self.coefficients
            .iter()
            .enumerate()
            .filter_map(|(j, &w)| (w != 0.0).then_some(j))
            .collect()
    }

    pub fn predict_row(&self, row: impl IntoIterator<Item = f64>) -> f64 {
        self.intercept
            + row
                .into_iter()
                .zip(&self.coefficients)
                .map(|(x, w)| x * w)
                .sum::<f64>()
    }
}

/// Sufficient statistics of one design, reusable along a λ path.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    n: usize,
    p: usize,
    gram: Vec<f64>,
    xty: Vec<f64>,
    x_mean: Vec<f64>,
    y_mean: f64,
}

impl LassoProblem {
    pub fn new(x: ArrayView2<'_, f64>, y: &[f64]) -> Result<Self> {
        let (n, p) = x.dim();
        if n < 2 {
            return Err(Error::invalid("LASSO needs at least two samples"));
        }
        if y.len() != n {
            return Err(Error::invalid("label count differs from row count"));
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite value in LASSO input"));
        }
        let x_mean: Vec<f64> = x
            .axis_iter(Axis(1))
            .map(|c| exact_sum(c.iter().copied()) / n as f64)
            .collect();
        let y_mean = exact_sum(y.iter().copied()) / n as f64;
        let centred: Vec<Vec<f64>> = x
            .axis_iter(Axis(1))
            .zip(&x_mean)
            .map(|(c, m)| c.iter().map(|v| v - m).collect())
            .collect();
        let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

        let mut gram = vec![0.0; p * p];
        for j in 0..p {
            for k in j..p {
                let g = exact_dot(&centred[j], &centred[k]);
                gram[j * p + k] = g;
                gram[k * p + j] = g;
            }
        }
        let xty = centred.iter().map(|c| exact_dot(c, &yc)).collect();
        Ok(LassoProblem {
            n,
            p,
            gram,
            xty,
            x_mean,
            y_mean,
        })
    }

    pub fn n_features(&self) -> usize {
        self.p
    }

    /// Smallest penalty at which every coefficient is zero.
    pub fn lambda_max(&self) -> f64 {
        self.xty
            .iter()
            .map(|c| (c / self.n as f64).abs())
            .fold(0.0, f64::max)
    }

    /// `(1/n) Xⱼᵀ r` for the residual of `w` under the optimal intercept.
    pub fn correlations(&self, w: &[f64]) -> Vec<f64> {
        (0..self.p)
            .map(|j| {
                let row = &self.gram[j * self.p..(j + 1) * self.p];
                (self.xty[j] - exact_dot(row, w)) / self.n as f64
            })
            .collect()
    }

    /// Largest violation of the optimality conditions at `w`.
    pub fn kkt_residual(&self, w: &[f64], lambda: f64) -> f64 {
        self.correlations(w)
            .iter()
            .zip(w)
            .enumerate()
            .map(|(j, (&g, &wj))| {
                if self.gram[j * self.p + j] == 0.0 {
                    0.0
                } else if wj == 0.0 {
                    (g.abs() - lambda).max(0.0)
                } else {
                    (g - lambda * wj.signum()).abs()
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn solve(&self, lambda: f64, warm_start: Option<&[f64]>) -> Result<LassoFit> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("penalty must be non-negative, got {lambda}")));
        }
        let p = self.p;
        let nf = self.n as f64;
        let mut w = warm_start.map(|w| w.to_vec()).unwrap_or_else(|| vec![0.0; p]);
        let diag: Vec<f64> = (0..p).map(|j| self.gram[j * p + j] / nf).collect();
        for j in 0..p {
            if diag[j] == 0.0 {
                w[j] = 0.0;
            }
        }
        // n · (1/n) Xᵀr, kept up to date after every coordinate move.
        let mut grad: Vec<f64> = self.correlations(&w).iter().map(|g| g * nf).collect();

        let mut sweeps = 0;
        while sweeps < MAX_SWEEPS {
            sweeps += 1;
            let mut max_change: f64 = 0.0;
            for j in 0..p {
                if diag[j] == 0.0 {
                    continue;
                }
                let rho = grad[j] / nf + diag[j] * w[j];
                let next = soft_threshold(rho, lambda) / diag[j];
                let delta = next - w[j];
                if delta != 0.0 {
                    w[j] = next;
                    let col = &self.gram[j * p..(j + 1) * p];
                    for (g, &gjk) in grad.iter_mut().zip(col) {
                        *g -= gjk * delta;
                    }
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < CHANGE_TOLERANCE {
                // Refresh the running gradient before trusting convergence.
                grad = self.correlations(&w).iter().map(|g| g * nf).collect();
                if self.kkt_residual(&w, lambda) <= KKT_TOLERANCE / 2.0 {
                    break;
                }
            }
        }
        let intercept = self.y_mean - exact_dot(&self.x_mean, &w);
        Ok(LassoFit {
            coefficients: w,
            intercept,
            lambda,
            sweeps,
        })
    }
}

pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Minimizes `(1/2n)‖y − b₀ − Xw‖² + λ‖w‖₁`.
pub fn lasso_fit(x: ArrayView2<'_, f64>, y: &[f64], lambda: f64) -> Result<LassoFit> {
    LassoProblem::new(x, y)?.solve(lambda, None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    pub n_lambdas: usize,
    /// Smallest grid penalty as a fraction of λ_max.
    pub min_ratio: f64,
    pub inner_folds: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            n_lambdas: 50,
            min_ratio: 1e-3,
            inner_folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    /// `(λ, mean validation squared error)` along the grid.
    pub validation_curve: Vec<(f64, f64)>,
    /// True when the cross-validated penalty had an empty support.
    pub fallback: bool,
}

pub const MIN_SELECTION_SAMPLES: usize = 10;

/// Picks λ on a log grid by inner cross-validation and returns the support
/// of the fit at that λ on all rows.
pub fn select_features(
    x: ArrayView2<'_, f64>,
    y: &[bool],
    seed: u64,
    config: &SelectionConfig,
) -> Result<SelectionResult> {
    let n = x.nrows();
    if n < MIN_SELECTION_SAMPLES {
        return Err(Error::invalid(format!(
            "feature selection needs at least {MIN_SELECTION_SAMPLES} samples, got {n}"
        )));
    }
    if config.n_lambdas < 2 || !(config.min_ratio > 0.0 && config.min_ratio < 1.0) {
        return Err(Error::invalid("λ grid needs ≥ 2 points and a ratio in (0, 1)"));
    }
    let yf: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();
    let full = LassoProblem::new(x, &yf)?;
    let lambda_max = full.lambda_max();
    if lambda_max == 0.0 {
        return Err(Error::Numerical(
            "no feature correlates with the labels; nothing to select".into(),
        ));
    }
    let steps = (config.n_lambdas - 1) as f64;
    let grid: Vec<f64> = (0..config.n_lambdas)
        .map(|i| lambda_max * config.min_ratio.powf(i as f64 / steps))
        .collect();

    let folds = kfold_split(n, y, config.inner_folds, seed)?;
    let fold_errors: Vec<Vec<f64>> = folds
        .par_iter()
        .map(|val| -> Result<Vec<f64>> {
            let mut is_val = vec![false; n];
            val.iter().for_each(|&i| is_val[i] = true);
            let train: Vec<usize> = (0..n).filter(|&i| !is_val[i]).collect();
            let xt = x.select(Axis(0), &train);
            let yt: Vec<f64> = train.iter().map(|&i| yf[i]).collect();
            let problem = LassoProblem::new(xt.view(), &yt)?;
            let mut warm: Option<Vec<f64>> = None;
            let mut errs = Vec::with_capacity(grid.len());
            for &lambda in &grid {
                let fit = problem.solve(lambda, warm.as_deref())?;
                let sse = exact_sum(val.iter().map(|&i| {
                    let r = yf[i] - fit.predict_row(x.row(i).iter().copied());
                    r * r
                }));
                errs.push(sse / val.len() as f64);
                warm = Some(fit.coefficients);
            }
            Ok(errs)
        })
        .collect::<Result<_>>()?;

    let curve: Vec<(f64, f64)> = grid
        .iter()
        .enumerate()
        .map(|(g, &lambda)| {
            let mean = fold_errors.iter().map(|e| e[g]).sum::<f64>() / fold_errors.len() as f64;
            (lambda, mean)
        })
        .collect();
    // Strict comparison keeps the larger λ on ties.
    let mut best = 0;
    for g in 1..curve.len() {
        if curve[g].1 < curve[best].1 {
            best = g;
        }
    }

    // Walk the full-data path with warm starts.
    let mut path = Vec::with_capacity(grid.len());
    let mut warm: Option<Vec<f64>> = None;
    for &lambda in &grid {
        let fit = full.solve(lambda, warm.as_deref())?;
        warm = Some(fit.coefficients.clone());
        let done = path.len() >= best && !fit.support().is_empty();
        path.push(fit);
        if done {
            break;
        }
    }

    let mut chosen = best.min(path.len() - 1);
    let mut fallback = false;
    if path[chosen].support().is_empty() {
        fallback = true;
        chosen = match path.iter().position(|f| !f.support().is_empty()) {
            Some(g) => g,
            None => {
                return Err(Error::Numerical(
                    "LASSO path has an empty support at every penalty".into(),
                ))
            }
        };
    }
    let fit = &path[chosen];
    Ok(SelectionResult {
        selected: fit.support(),
        coefficients: fit.coefficients.clone(),
        lambda: fit.lambda,
        validation_curve: curve,
        fallback,
    })
}

/// How often each feature was picked across folds, most frequent first
/// (ties in name order of `names`).
pub fn selection_frequency(results: &[SelectionResult], names: &[String]) -> Vec<(String, usize)> {
    let mut counts = vec![0usize; names.len()];
    for r in results {
        for &j in &r.selected {
            counts[j] += 1;
        }
    }
    let mut out: Vec<(String, usize)> = names.iter().cloned().zip(counts).collect();
    out.sort_by(|a, b| b.1.cmp(&a.1));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(rng: &mut ChaCha8Rng, n: usize, p: usize) -> (Array2<f64>, Vec<f64>) {
        let x = Array2::from_shape_fn((n, p), |_| rng.random_range(-2.0..2.0));
        let y = (0..n).map(|i| (x[[i, 0]] + 0.5 * x[[i, 1]] + rng.random_range(-1.0..1.0) > 0.0) as u8 as f64).collect();
        (x, y)
    }

    #[test]
    fn zero_above_lambda_max() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let (x, y) = random_problem(&mut rng, 30, 8);
            let problem = LassoProblem::new(x.view(), &y).unwrap();
            let lmax = problem.lambda_max();
            for lambda in [lmax, lmax * 1.5] {
                let fit = problem.solve(lambda, None).unwrap();
                assert!(fit.coefficients.iter().all(|&w| w == 0.0));
            }
            let below = problem.solve(lmax * 0.9, None).unwrap();
            assert!(!below.support().is_empty());
        }
    }

    #[test]
    fn kkt_holds_along_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let (x, y) = random_problem(&mut rng, 60, 12);
            let problem = LassoProblem::new(x.view(), &y).unwrap();
            let lmax = problem.lambda_max();
            for k in 0..10 {
                let lambda = lmax * 0.5f64.powi(k);
                let fit = problem.solve(lambda, None).unwrap();
                assert!(problem.kkt_residual(&fit.coefficients, lambda) <= KKT_TOLERANCE);
            }
        }
    }

    #[test]
    fn support_shrinks_as_lambda_grows() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (x, y) = random_problem(&mut rng, 80, 10);
        let problem = LassoProblem::new(x.view(), &y).unwrap();
        let lmax = problem.lambda_max();
        let sizes: Vec<usize> = (0..30)
            .map(|k| problem.solve(lmax * 0.8f64.powi(k), None).unwrap().support().len())
            .collect();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{sizes:?}");
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    }

    #[test]
    fn selection_needs_ten_samples() {
        let x = Array2::<f64>::zeros((9, 3));
        assert!(select_features(x.view(), &[true; 9], 0, &SelectionConfig::default()).is_err());
    }

    #[test]
    fn frequency_accounting() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let r = |sel: Vec<usize>| SelectionResult {
            selected: sel,
            coefficients: vec![],
            lambda: 0.0,
            validation_curve: vec![],
            fallback: false,
        };
        let results = vec![r(vec![1]), r(vec![1, 2]), r(vec![1]), r(vec![1]), r(vec![1])];
        let freq = selection_frequency(&results, &names);
        assert_eq!(freq[0], ("b".to_string(), 5));
        assert_eq!(freq[1], ("c".to_string(), 1));
        assert_eq!(freq[2], ("a".to_string(), 0));
        let total: usize = freq.iter().map(|f| f.1).sum();
        assert_eq!(total, results.iter().map(|r| r.selected.len()).sum::<usize>());
    }
}
