use nalgebra::{DMatrix, DVector};
use ndarray::ArrayView2;

use crate::error::{Error, Result};

pub const GRADIENT_TOLERANCE: f64 = 1e-6;
pub const MAX_NEWTON_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub c: f64,
    pub iterations: usize,
}

impl LogisticModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Penalized log-loss `Σ log-loss + ‖w‖²/(2C)` at `theta = (w, b)`.
pub fn logistic_objective(x: ArrayView2<'_, f64>, y: &[bool], c: f64, theta: &[f64]) -> f64 {
    let p = x.ncols();
    let mut loss = 0.0;
    for (i, row) in x.rows().into_iter().enumerate() {
        let z = theta[p] + row.iter().zip(theta).map(|(a, w)| a * w).sum::<f64>();
        loss += if y[i] { softplus(-z) } else { softplus(z) };
    }
    loss + theta[..p].iter().map(|w| w * w).sum::<f64>() / (2.0 * c)
}

/// Gradient of [`logistic_objective`].
pub fn logistic_gradient(x: ArrayView2<'_, f64>, y: &[bool], c: f64, theta: &[f64]) -> Vec<f64> {
    let p = x.ncols();
    let mut g: Vec<f64> = theta[..p].iter().map(|w| w / c).chain([0.0]).collect();
    for (i, row) in x.rows().into_iter().enumerate() {
        let z = theta[p] + row.iter().zip(theta).map(|(a, w)| a * w).sum::<f64>();
        let r = sigmoid(z) - y[i] as u8 as f64;
        for (gj, a) in g.iter_mut().zip(row) {
            *gj += r * a;
        }
        g[p] += r;
    }
    g
}

/// L2-penalized logistic regression with an unpenalized intercept, fitted
/// by damped Newton steps.
pub fn fit_logistic_l2(x: ArrayView2<'_, f64>, y: &[bool], c: f64) -> Result<LogisticModel> {
    let (n, p) = x.dim();
    if y.len() != n || n == 0 {
        return Err(Error::invalid("logistic regression needs matching, non-empty rows and labels"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("C must be positive"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value in logistic regression input"));
    }
    let mut theta = vec![0.0; p + 1];
    let mut f = logistic_objective(x, y, c, &theta);
    for it in 0..MAX_NEWTON_ITERATIONS {
        let g = logistic_gradient(x, y, c, &theta);
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= GRADIENT_TOLERANCE {
            return Ok(LogisticModel { weights: theta[..p].to_vec(), intercept: theta[p], c, iterations: it });
        }
        let mut h = DMatrix::<f64>::zeros(p + 1, p + 1);
        for j in 0..p {
            h[(j, j)] = 1.0 / c;
        }
        for row in x.rows() {
            let z = theta[p] + row.iter().zip(&theta).map(|(a, w)| a * w).sum::<f64>();
            let s = sigmoid(z);
            let wgt = s * (1.0 - s);
            let aug: Vec<f64> = row.iter().copied().chain([1.0]).collect();
            for a in 0..=p {
                let wa = wgt * aug[a];
                for b in a..=p {
                    h[(a, b)] += wa * aug[b];
                }
            }
        }
        for a in 0..=p {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
        }
        // The intercept direction can be flat on separable data; a tiny
        // ridge keeps the system solvable.
        h[(p, p)] += 1e-12;
        let gv = DVector::from_vec(g.clone());
        let step = match h.cholesky() {
            Some(ch) => ch.solve(&gv),
            None => gv.clone(),
        };
        let slope: f64 = step.iter().zip(&g).map(|(s, gj)| s * gj).sum();
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            let fc = logistic_objective(x, y, c, &cand);
            if fc <= f - 1e-4 * t * slope || t < 1e-10 {
                theta = cand;
                f = fc;
                break;
            }
            t *= 0.5;
        }
        if !f.is_finite() {
            return Err(Error::Numerical("logistic objective became non-finite".into()));
        }
    }
    Ok(LogisticModel { weights: theta[..p].to_vec(), intercept: theta[p], c, iterations: MAX_NEWTON_ITERATIONS })
}
