use ndarray::{ArrayView1, ArrayView2};
use rand::Rng;
use rayon::prelude::*;

use super::cart::{fit_cart, CartParams, CartTree};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    /// `None` means `floor(√p)`.
    pub mtry: Option<usize>,
    pub min_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 10,
            mtry: None,
            min_split: 2,
        }
    }
}

impl ForestParams {
    pub fn resolved_mtry(&self, p: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| (p as f64).sqrt().floor() as usize)
            .clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    pub trees: Vec<CartTree>,
    pub max_depth: usize,
    pub mtry: usize,
    pub seed: u64,
    /// Share of class 1 among the training rows.
    pub prior: f64,
}

impl RandomForest {
    /// Mean of the per-tree leaf proportions.
    pub fn predict(&self, row: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return self.prior;
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        (sum / self.trees.len() as f64).clamp(0.0, 1.0)
    }

    pub fn predict_view(&self, row: ArrayView1<'_, f64>) -> f64 {
        match row.as_slice() {
            Some(s) => self.predict(s),
            None => self.predict(&row.to_vec()),
        }
    }
}

/// Bagged CART ensemble. Tree `t` draws its bootstrap and feature subsets
/// from the stream `(seed, t)`, so the forest is the same for any thread
/// count.
pub fn fit_random_forest(x: ArrayView2<'_, f64>, y: &[bool], params: &ForestParams, seed: u64) -> RandomForest {
    let n = x.nrows();
    let p = x.ncols();
    let mtry = params.resolved_mtry(p);
    let cart = CartParams {
        max_depth: params.max_depth,
        mtry,
        min_split: params.min_split,
    };
    let prior = if n == 0 {
        0.0
    } else {
        y.iter().filter(|&&b| b).count() as f64 / n as f64
    };
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t as u64);
            let samples: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            fit_cart(x, y, &samples, &cart, &mut rng)
        })
        .collect();
    RandomForest {
        trees,
        max_depth: params.max_depth,
        mtry,
        seed,
        prior,
    }
}
