//! Binary classification trees grown by best Gini split.
//!
//! Split quality is compared with exact integer arithmetic: minimizing the
//! weighted child impurity is the same as maximizing
//! `(l₀² + l₁²)/n_l + (r₀² + r₁²)/n_r`, a ratio of integers, so ties are
//! detected exactly and resolved by (lower feature, lower threshold).

use ndarray::ArrayView2;
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};

/// `1 − p₀² − p₁²`.
pub fn gini_impurity(counts: [u64; 2]) -> Result<f64> {
    let n = counts[0] + counts[1];
    if n == 0 {
        return Err(Error::invalid("Gini impurity of an empty node"));
    }
    let p0 = counts[0] as f64 / n as f64;
    let p1 = counts[1] as f64 / n as f64;
    Ok(1.0 - p0 * p0 - p1 * p1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CartParams {
    /// Root is depth 0; nodes at `max_depth` are leaves.
    pub max_depth: usize,
    /// Features examined per node; values ≥ p examine all of them.
    pub mtry: usize,
    pub min_split: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            max_depth: usize::MAX,
            mtry: usize::MAX,
            min_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: [u64; 2],
    },
}

impl Node {
    pub fn leaf_proportion(counts: [u64; 2]) -> f64 {
        let n = counts[0] + counts[1];
        if n == 0 {
            0.0
        } else {
            counts[1] as f64 / n as f64
        }
    }
}

/// Nodes in preorder; the root is `nodes[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartTree {
    pub nodes: Vec<Node>,
}

impl CartTree {
    fn leaf_of(&self, row: &[f64]) -> [u64; 2] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { counts } => return *counts,
            }
        }
    }

    /// Class-1 proportion of the leaf reached by `row`.
    pub fn predict(&self, row: &[f64]) -> f64 {
        Node::leaf_proportion(self.leaf_of(row))
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { threshold, .. } => Some(*threshold),
                Node::Leaf { .. } => None,
            })
            .collect()
    }
}

/// A candidate split: rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Parent impurity minus weighted child impurity.
    pub decrease: f64,
    score: SplitScore,
}

/// `(q_l·n_r + q_r·n_l) / (n_l·n_r)` kept as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SplitScore {
    num: u128,
    den: u128,
}

impl SplitScore {
    fn new(left: [u64; 2], right: [u64; 2]) -> Self {
        let q = |c: [u64; 2]| (c[0] as u128).pow(2) + (c[1] as u128).pow(2);
        let nl = (left[0] + left[1]) as u128;
        let nr = (right[0] + right[1]) as u128;
        SplitScore {
            num: q(left) * nr + q(right) * nl,
            den: nl * nr,
        }
    }

    fn beats(&self, other: &SplitScore) -> bool {
        self.num * other.den > other.num * self.den
    }
}

/// Best split of `samples` (row indices, repeats allowed) over `features`,
/// or `None` if no split lowers the impurity.
pub fn best_split(x: ArrayView2<'_, f64>, y: &[bool], samples: &[usize], features: &[usize]) -> Option<Split> {
    let mut parent = [0u64; 2];
    for &i in samples {
        parent[y[i] as usize] += 1;
    }
    let n = samples.len() as u128;
    if n < 2 {
        return None;
    }
    let parent_q = (parent[0] as u128).pow(2) + (parent[1] as u128).pow(2);
    let parent_score = SplitScore { num: parent_q, den: n };

    let mut best: Option<(usize, f64, SplitScore, [u64; 2], [u64; 2])> = None;
    let mut column: Vec<(f64, bool)> = Vec::with_capacity(samples.len());
    let mut sorted_features = features.to_vec();
    sorted_features.sort_unstable();
    for &f in &sorted_features {
        column.clear();
        column.extend(samples.iter().map(|&i| (x[[i, f]], y[i])));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = [0u64; 2];
        for k in 0..column.len() - 1 {
            left[column[k].1 as usize] += 1;
            let (v, next) = (column[k].0, column[k + 1].0);
            if v == next {
                continue;
            }
            let right = [parent[0] - left[0], parent[1] - left[1]];
            let score = SplitScore::new(left, right);
            let better = match &best {
                None => score.beats(&parent_score),
                Some((_, _, b, _, _)) => score.beats(b),
            };
            if better {
                let threshold = v + (next - v) / 2.0;
                best = Some((f, threshold, score, left, right));
            }
        }
    }
    best.map(|(feature, threshold, score, left, right)| {
        let nl = (left[0] + left[1]) as f64;
        let nr = (right[0] + right[1]) as f64;
        let weighted = (nl * gini_impurity(left).unwrap() + nr * gini_impurity(right).unwrap()) / (nl + nr);
        Split {
            feature,
            threshold,
            decrease: gini_impurity(parent).unwrap() - weighted,
            score,
        }
    })
}

/// Lowest-feature, lowest-threshold candidate, whatever its score.
fn first_split(x: ArrayView2<'_, f64>, samples: &[usize], features: &[usize]) -> Option<Split> {
    let mut sorted_features = features.to_vec();
    sorted_features.sort_unstable();
    sorted_features.into_iter().find_map(|f| {
        let lo = samples.iter().map(|&i| x[[i, f]]).fold(f64::INFINITY, f64::min);
        let next = samples
            .iter()
            .map(|&i| x[[i, f]])
            .filter(|&v| v > lo)
            .fold(f64::INFINITY, f64::min);
        next.is_finite().then(|| Split {
            feature: f,
            threshold: lo + (next - lo) / 2.0,
            decrease: 0.0,
            score: SplitScore { num: 0, den: 1 },
        })
    })
}

/// Grows a tree on `samples` (row indices into `x`, repeats allowed).
pub fn fit_cart<R: Rng + ?Sized>(
    x: ArrayView2<'_, f64>,
    y: &[bool],
    samples: &[usize],
    params: &CartParams,
    rng: &mut R,
) -> CartTree {
    let mut nodes = Vec::new();
    grow(x, y, samples.to_vec(), 0, params, rng, &mut nodes);
    CartTree { nodes }
}

fn grow<R: Rng + ?Sized>(
    x: ArrayView2<'_, f64>,
    y: &[bool],
    samples: Vec<usize>,
    depth: usize,
    params: &CartParams,
    rng: &mut R,
    nodes: &mut Vec<Node>,
) -> usize {
    let mut counts = [0u64; 2];
    for &i in &samples {
        counts[y[i] as usize] += 1;
    }
    let id = nodes.len();
    nodes.push(Node::Leaf { counts });
    let pure = counts[0] == 0 || counts[1] == 0;
    if pure || depth >= params.max_depth || samples.len() < params.min_split.max(2) {
        return id;
    }
    let p = x.ncols();
    let features: Vec<usize> = if params.mtry >= p {
        (0..p).collect()
    } else {
        sample(rng, p, params.mtry.max(1)).into_vec()
    };
    // An impure node whose every split leaves the class mix unchanged is
    // still split, at the first candidate, so consistent data is fitted
    // exactly.
    let Some(split) = best_split(x, y, &samples, &features).or_else(|| first_split(x, &samples, &features)) else {
        return id;
    };
    let (left, right): (Vec<usize>, Vec<usize>) = samples
        .into_iter()
        .partition(|&i| x[[i, split.feature]] <= split.threshold);
    let l = grow(x, y, left, depth + 1, params, rng, nodes);
    let r = grow(x, y, right, depth + 1, params, rng, nodes);
    nodes[id] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: l,
        right: r,
    };
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use ndarray::{array, Array2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gini_values() {
        assert_eq!(gini_impurity([5, 5]).unwrap(), 0.5);
        assert_eq!(gini_impurity([7, 0]).unwrap(), 0.0);
        assert_eq!(gini_impurity([3, 1]).unwrap(), 0.375);
        assert!(gini_impurity([0, 0]).is_err());
    }

    #[test]
    fn pure_input_is_one_leaf() {
        let x = array![[1.0], [2.0], [3.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = fit_cart(x.view(), &[true; 3], &[0, 1, 2], &CartParams::default(), &mut rng);
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict(&[9.0]), 1.0);
    }

    #[test]
    fn one_dimensional_root() {
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let y = [false, false, true, true];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = fit_cart(x.view(), &y, &[0, 1, 2, 3], &CartParams::default(), &mut rng);
        match &t.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 2.5);
            }
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn equal_scores_prefer_lower_feature_then_threshold() {
        // Both features separate the classes perfectly at two thresholds.
        let x = array![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        let y = [false, true, true, false];
        let s = best_split(x.view(), &y, &[0, 1, 2, 3], &[1, 0]).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 0.5);
    }

    #[test]
    fn matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let n = rng.random_range(2..120);
            let p = rng.random_range(1..6);
            let levels = rng.random_range(2..15) as f64;
            let x = Array2::from_shape_fn((n, p), |_| (rng.random_range(0.0..levels)).floor());
            let y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
            let samples: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let features: Vec<usize> = (0..p).collect();
            let got = best_split(x.view(), &y, &samples, &features).map(|s| (s.feature, s.threshold));
            let want = oracle::exhaustive_split(x.view(), &y, &samples);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn unlimited_tree_fits_consistent_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = Array2::from_shape_fn((150, 4), |_| rng.random_range(0..6) as f64);
        // Labels are a function of the row, so identical rows agree.
        let y: Vec<bool> = x.rows().into_iter().map(|r| (r.sum() as i64 * 7919) % 3 == 0).collect();
        let samples: Vec<usize> = (0..150).collect();
        let t = fit_cart(x.view(), &y, &samples, &CartParams::default(), &mut rng);
        for (i, r) in x.rows().into_iter().enumerate() {
            assert_eq!(t.predict(r.as_slice().unwrap()) >= 0.5, y[i]);
        }
    }

    #[test]
    fn depth_limit_is_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_shape_fn((200, 3), |_| rng.random_range(0.0..1.0));
        let y: Vec<bool> = (0..200).map(|_| rng.random_bool(0.5)).collect();
        let samples: Vec<usize> = (0..200).collect();
        let params = CartParams { max_depth: 3, mtry: 2, min_split: 2 };
        let t = fit_cart(x.view(), &y, &samples, &params, &mut rng);
        assert!(t.depth() <= 3);
        for n in &t.nodes {
            if let Node::Leaf { counts } = n {
                let p = Node::leaf_proportion(*counts);
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }
}
