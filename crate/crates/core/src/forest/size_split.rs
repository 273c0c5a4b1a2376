use ndarray::Array2;
use rand::SeedableRng;

use super::cart::{fit_cart, CartParams};
use crate::error::{Error, Result};

/// Depth of the routing tree; two levels give at most four size groups.
pub const SIZE_TREE_DEPTH: usize = 2;

/// Sorted split thresholds of a depth-2 Gini tree grown on the infection
/// size alone (zero to three values).
pub fn fit_size_split_tree(sizes: &[f64], y: &[bool]) -> Result<Vec<f64>> {
    let n = sizes.len();
    if n < 4 {
        return Err(Error::invalid(format!("size split needs at least 4 samples, got {n}")));
    }
    if y.len() != n {
        return Err(Error::invalid("label count differs from size count"));
    }
    let x = Array2::from_shape_vec((n, 1), sizes.to_vec()).map_err(|e| Error::invalid(e.to_string()))?;
    let samples: Vec<usize> = (0..n).collect();
    let params = CartParams {
        max_depth: SIZE_TREE_DEPTH,
        mtry: 1,
        min_split: 2,
    };
    // One feature, no sampling: the generator is never consulted.
    let mut unused = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let tree = fit_cart(x.view(), y, &samples, &params, &mut unused);
    let mut t = tree.thresholds();
    t.sort_by(f64::total_cmp);
    Ok(t)
}

/// Group of a size fraction under left-closed intervals
/// `[t_{g-1}, t_g)`: the number of thresholds not above it.
pub fn route(thresholds: &[f64], size: f64) -> usize {
    thresholds.iter().filter(|&&t| t <= size).count()
}
