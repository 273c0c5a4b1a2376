//! Size-aware composite: a depth-2 tree on the infection size routes each
//! subject into a size group, and every group has its own random forest.

use ndarray::{Axis, ArrayView2};

use super::random_forest::{fit_random_forest, ForestParams, RandomForest};
use super::size_split::{fit_size_split_tree, route};
use crate::error::{Error, Result};
use crate::features::{FeatureTable, FeatureVector};
use crate::rng::derive_seed;
use crate::selection::{select_features, SelectionConfig, StandardizationParams};

pub const DEFAULT_MIN_GROUP_SIZE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsarfParams {
    pub forest: ForestParams,
    pub min_group_size: usize,
}

impl Default for IsarfParams {
    fn default() -> Self {
        IsarfParams {
            forest: ForestParams::default(),
            min_group_size: DEFAULT_MIN_GROUP_SIZE,
        }
    }
}

/// Routing thresholds plus one forest per group.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeSplitForest {
    /// Strictly increasing, inside (0, 1).
    pub thresholds: Vec<f64>,
    pub forests: Vec<RandomForest>,
}

impl SizeSplitForest {
    pub fn group_of(&self, size: f64) -> usize {
        route(&self.thresholds, size)
    }

    /// `(probability, group)` for one row of model inputs.
    pub fn predict(&self, row: &[f64], size: f64) -> (f64, usize) {
        let g = self.group_of(size);
        (self.forests[g].predict(row), g)
    }
}

/// Drops thresholds until every group has at least `min_group_size` members.
/// The smallest group goes first and joins the neighbour across the
/// threshold nearest (in log size) to its median.
pub fn merge_sparse_groups(thresholds: &[f64], sizes: &[f64], min_group_size: usize) -> Vec<f64> {
    let mut t = thresholds.to_vec();
    while !t.is_empty() {
        let mut members: Vec<Vec<f64>> = vec![Vec::new(); t.len() + 1];
        for &s in sizes {
            members[route(&t, s)].push(s);
        }
        let Some((g, _)) = members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.len() < min_group_size)
            .min_by_key(|(g, m)| (m.len(), *g))
        else {
            break;
        };
        let remove = if g == 0 {
            0
        } else if g == t.len() {
            g - 1
        } else {
            let m = &mut members[g];
            let centre = if m.is_empty() {
                (t[g - 1] * t[g]).sqrt()
            } else {
                m.sort_by(f64::total_cmp);
                m[m.len() / 2]
            };
            let log = |v: f64| v.max(f64::MIN_POSITIVE).ln();
            let below = (log(centre) - log(t[g - 1])).abs();
            let above = (log(t[g]) - log(centre)).abs();
            if below <= above {
                g - 1
            } else {
                g
            }
        };
        t.remove(remove);
    }
    t
}

pub fn fit_isarf(
    x: ArrayView2<'_, f64>,
    y: &[bool],
    sizes: &[f64],
    seed: u64,
    params: &IsarfParams,
) -> Result<SizeSplitForest> {
    let n = x.nrows();
    if n < 4 {
        return Err(Error::invalid(format!("iSARF needs at least 4 samples, got {n}")));
    }
    if y.len() != n || sizes.len() != n {
        return Err(Error::invalid("rows, labels and sizes differ in length"));
    }
    let raw = fit_size_split_tree(sizes, y)?;
    let thresholds = merge_sparse_groups(&raw, sizes, params.min_group_size);
    let mut forests = Vec::with_capacity(thresholds.len() + 1);
    for g in 0..=thresholds.len() {
        let idx: Vec<usize> = (0..n).filter(|&i| route(&thresholds, sizes[i]) == g).collect();
        let xg = x.select(Axis(0), &idx);
        let yg: Vec<bool> = idx.iter().map(|&i| y[i]).collect();
        forests.push(fit_random_forest(xg.view(), &yg, &params.forest, derive_seed(seed, g as u64)));
    }
    Ok(SizeSplitForest { thresholds, forests })
}

/// A complete trained pipeline: standardization of all manifest features,
/// the LASSO-selected subset and the size-split forests.
#[derive(Debug, Clone, PartialEq)]
pub struct IsarfModel {
    pub feature_names: Vec<String>,
    pub manifest_hash: String,
    pub seed: u64,
    pub standardization: StandardizationParams,
    pub selected: Vec<usize>,
    pub core: SizeSplitForest,
}

impl IsarfModel {
    /// Fits every stage on all rows of `table`.
    pub fn train(
        table: &FeatureTable,
        seed: u64,
        params: &IsarfParams,
        selection: &SelectionConfig,
    ) -> Result<Self> {
        use crate::rng::{domain, stage_seed};
        let y = table.positive_labels()?;
        let standardization = StandardizationParams::fit(table.values.view())?;
        let xs = standardization.transform(table.values.view());
        let sel = select_features(xs.view(), &y, stage_seed(seed, domain::SELECTION, 0), selection)?;
        let xsel = xs.select(Axis(1), &sel.selected);
        let core = fit_isarf(
            xsel.view(),
            &y,
            &table.size_fractions,
            stage_seed(seed, domain::MODEL, 0),
            params,
        )?;
        Ok(IsarfModel {
            feature_names: table.names.clone(),
            manifest_hash: table.manifest_hash(),
            seed,
            standardization,
            selected: sel.selected,
            core,
        })
    }

    pub fn n_groups(&self) -> usize {
        self.core.forests.len()
    }

    fn model_inputs(&self, values: &[f64]) -> Vec<f64> {
        self.selected
            .iter()
            .map(|&j| self.standardization.transform_value(j, values[j]))
            .collect()
    }

    /// `(probability of COVID, size group)`.
    pub fn predict(&self, fv: &FeatureVector) -> Result<(f64, usize)> {
        if fv.values.len() != self.feature_names.len() {
            return Err(Error::Mismatch(format!(
                "model expects {} features, got {}",
                self.feature_names.len(),
                fv.values.len()
            )));
        }
        Ok(self.core.predict(&self.model_inputs(&fv.values), fv.size_fraction))
    }

    pub fn predict_table(&self, table: &FeatureTable) -> Result<Vec<(f64, usize)>> {
        let hash = table.manifest_hash();
        if hash != self.manifest_hash {
            return Err(Error::Mismatch(format!(
                "feature manifest hash {hash} does not match the model's {}",
                self.manifest_hash
            )));
        }
        (0..table.len()).map(|i| self.predict(&table.row(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};

    fn toy(n: usize, seed: u64) -> (Array2<f64>, Vec<bool>, Vec<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let sizes: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-5.0..-0.5))).collect();
        let y: Vec<bool> = sizes.iter().map(|&s| rng.random_bool(if s > 3e-3 { 0.8 } else { 0.25 })).collect();
        let x = Array2::from_shape_fn((n, 4), |(i, j)| {
            rng.random_range(-1.0..1.0) + if j == 0 && y[i] { 0.8 } else { 0.0 }
        });
        (x, y, sizes)
    }

    #[test]
    fn one_size_group_is_a_plain_forest() {
        let (x, y, _) = toy(60, 1);
        let sizes = vec![0.02; 60];
        let params = IsarfParams { forest: ForestParams { n_trees: 10, ..Default::default() }, ..Default::default() };
        let m = fit_isarf(x.view(), &y, &sizes, 9, &params).unwrap();
        assert!(m.thresholds.is_empty());
        let plain = fit_random_forest(x.view(), &y, &params.forest, derive_seed(9, 0));
        assert_eq!(m.forests, vec![plain]);
    }

    #[test]
    fn deterministic_and_composed() {
        let (x, y, sizes) = toy(200, 2);
        let params = IsarfParams { forest: ForestParams { n_trees: 15, ..Default::default() }, ..Default::default() };
        let a = fit_isarf(x.view(), &y, &sizes, 3, &params).unwrap();
        let b = fit_isarf(x.view(), &y, &sizes, 3, &params).unwrap();
        assert_eq!(a, b);
        assert!(!a.thresholds.is_empty());
        assert!(a.thresholds.windows(2).all(|w| w[0] < w[1]));
        assert!(a.thresholds.iter().all(|&t| t > 0.0 && t < 1.0));
        for i in 0..200 {
            let row = x.row(i).to_vec();
            let (p, g) = a.predict(&row, sizes[i]);
            assert_eq!(p, a.forests[g].predict(&row));
        }
        // Every group kept enough training rows.
        for g in 0..a.forests.len() {
            assert!(sizes.iter().filter(|&&s| route(&a.thresholds, s) == g).count() >= 10);
        }
    }

    #[test]
    fn sparse_groups_merge() {
        let sizes = [0.001, 0.002, 0.003, 0.2, 0.3, 0.31, 0.32, 0.33, 0.34, 0.35];
        // Group 0 has 3 members, group 1 (between 0.004 and 0.1) is empty,
        // group 2 has 7.
        let t = merge_sparse_groups(&[0.004, 0.1], &sizes, 3);
        assert_eq!(t.len(), 1);
        let t = merge_sparse_groups(&[0.004, 0.1], &sizes, 20);
        assert!(t.is_empty());
        let t = merge_sparse_groups(&[0.004, 0.1], &sizes, 0);
        assert_eq!(t, vec![0.004, 0.1]);
    }

    #[test]
    fn too_few_rows() {
        let x = Array2::zeros((3, 2));
        assert!(fit_isarf(x.view(), &[true, false, true], &[0.1, 0.2, 0.3], 0, &IsarfParams::default()).is_err());
    }
}
