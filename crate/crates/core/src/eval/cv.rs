//! k-fold cross-validation of the full pipeline.

use ndarray::Axis;
use rayon::prelude::*;

use super::groups::{size_group_breakdown, GroupMetrics, SizeGroupScheme};
use super::kfold::kfold_split;
use super::roc::{mean_roc, roc_and_auc, Confusion, Roc, RocPoint};
use crate::baseline::{fit_logistic_l2, fit_mlp, BaselineModel, MlpParams};
use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::forest::{fit_isarf, fit_random_forest, IsarfParams};
use crate::rng::{domain, stage_seed};
use crate::selection::{select_features, selection_frequency, SelectionConfig, SelectionResult, StandardizationParams};

pub const MIN_CV_SUBJECTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelVariant {
    Isarf,
    RfGlobal,
    Lr,
    Mlp,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [ModelVariant::Isarf, ModelVariant::RfGlobal, ModelVariant::Lr, ModelVariant::Mlp];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::Isarf => "isarf",
            ModelVariant::RfGlobal => "rf-global",
            ModelVariant::Lr => "lr",
            ModelVariant::Mlp => "mlp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown model variant `{s}` (isarf, rf-global, lr, mlp)")))
    }
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub variant: ModelVariant,
    pub seed: u64,
    pub folds: usize,
    pub threshold: f64,
    pub isarf: IsarfParams,
    pub selection: SelectionConfig,
    pub mlp: MlpParams,
    pub lr_c: f64,
}

impl CvConfig {
    pub fn new(variant: ModelVariant, seed: u64) -> Self {
        CvConfig {
            variant,
            seed,
            folds: 5,
            threshold: 0.5,
            isarf: IsarfParams::default(),
            selection: SelectionConfig::default(),
            mlp: MlpParams::default(),
            lr_c: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectPrediction {
    pub id: String,
    pub label: bool,
    pub prob: f64,
    pub fold: usize,
    pub size_fraction: f64,
    /// Index into the reporting [`SizeGroupScheme`].
    pub group: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub test: Vec<usize>,
    pub probs: Vec<f64>,
    pub confusion: Confusion,
    pub roc: Roc,
    pub selection: SelectionResult,
    /// Learned size thresholds (iSARF only).
    pub size_thresholds: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
    pub auc: Option<f64>,
}

impl Metrics {
    fn from(c: &Confusion, auc: Option<f64>) -> Self {
        Metrics {
            sensitivity: c.sensitivity(),
            specificity: c.specificity(),
            accuracy: c.accuracy(),
            auc,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub config: CvConfig,
    pub manifest_hash: String,
    pub folds: Vec<FoldResult>,
    /// In table order.
    pub subjects: Vec<SubjectPrediction>,
    pub pooled_confusion: Confusion,
    pub pooled: Metrics,
    /// Mean over folds of each defined per-fold metric.
    pub fold_mean: Metrics,
    pub per_group: Vec<GroupMetrics>,
    pub mean_roc: Vec<RocPoint>,
    pub selection_frequency: Vec<(String, usize)>,
}

impl CvReport {
    pub fn fold_metrics(&self, f: usize) -> Metrics {
        Metrics::from(&self.folds[f].confusion, self.folds[f].roc.auc)
    }

    /// Mean accuracy over the given reporting groups that have one.
    pub fn mean_group_accuracy(&self, groups: &[usize]) -> Option<f64> {
        let accs: Vec<f64> = groups.iter().filter_map(|&g| self.per_group[g].accuracy).collect();
        (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64)
    }
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Fits every stage on `train` rows and scores `test` rows.
fn run_fold(
    table: &FeatureTable,
    y: &[bool],
    fold: usize,
    test: &[usize],
    config: &CvConfig,
) -> Result<FoldResult> {
    let n = table.len();
    let mut in_test = vec![false; n];
    test.iter().for_each(|&i| in_test[i] = true);
    let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
    let y_train: Vec<bool> = train.iter().map(|&i| y[i]).collect();
    let y_test: Vec<bool> = test.iter().map(|&i| y[i]).collect();

    let x_train_raw = table.values.select(Axis(0), &train);
    let std = StandardizationParams::fit(x_train_raw.view())?;
    let x_train = std.transform(x_train_raw.view());
    let x_test = std.transform(table.values.select(Axis(0), test).view());

    let fold_id = fold as u64;
    let selection = select_features(
        x_train.view(),
        &y_train,
        stage_seed(config.seed, domain::SELECTION, fold_id),
        &config.selection,
    )?;
    let xs_train = x_train.select(Axis(1), &selection.selected);
    let xs_test = x_test.select(Axis(1), &selection.selected);
    let model_seed = stage_seed(config.seed, domain::MODEL, fold_id);

    let mut size_thresholds = None;
    let probs: Vec<f64> = match config.variant {
        ModelVariant::Isarf => {
            let sizes: Vec<f64> = train.iter().map(|&i| table.size_fractions[i]).collect();
            let m = fit_isarf(xs_train.view(), &y_train, &sizes, model_seed, &config.isarf)?;
            let probs = test
                .iter()
                .zip(xs_test.rows())
                .map(|(&i, row)| m.predict(&row.to_vec(), table.size_fractions[i]).0)
                .collect();
            size_thresholds = Some(m.thresholds);
            probs
        }
        ModelVariant::RfGlobal => {
            let f = fit_random_forest(xs_train.view(), &y_train, &config.isarf.forest, model_seed);
            xs_test.rows().into_iter().map(|r| f.predict_view(r)).collect()
        }
        ModelVariant::Lr => BaselineModel::Logistic(fit_logistic_l2(xs_train.view(), &y_train, config.lr_c)?)
            .predict_rows(xs_test.view()),
        ModelVariant::Mlp => {
            BaselineModel::Mlp(fit_mlp(xs_train.view(), &y_train, &config.mlp, model_seed)?).predict_rows(xs_test.view())
        }
    };
    Ok(FoldResult {
        fold,
        test: test.to_vec(),
        confusion: Confusion::from_scores(&probs, &y_test, config.threshold),
        roc: roc_and_auc(&probs, &y_test),
        probs,
        selection,
        size_thresholds,
    })
}

/// Class-stratified k-fold CV. Per fold: standardize on the training rows,
/// select features by LASSO, fit the model, score the held-out rows. Folds
/// run in parallel and are assembled in fold order.
pub fn run_cv(table: &FeatureTable, config: &CvConfig) -> Result<CvReport> {
    let n = table.len();
    if n < MIN_CV_SUBJECTS {
        return Err(Error::invalid(format!("cross-validation needs at least {MIN_CV_SUBJECTS} subjects, got {n}")));
    }
    let y = table.positive_labels()?;
    let n_pos = y.iter().filter(|&&b| b).count();
    if n_pos == 0 || n_pos == n {
        return Err(Error::invalid("cross-validation needs both classes"));
    }
    let folds = kfold_split(n, &y, config.folds, stage_seed(config.seed, domain::FOLDS, 0))?;
    let results: Vec<FoldResult> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| run_fold(table, &y, f, test, config))
        .collect::<Result<_>>()?;

    let scheme = SizeGroupScheme::default();
    let mut subjects: Vec<Option<SubjectPrediction>> = vec![None; n];
    for r in &results {
        for (&i, &prob) in r.test.iter().zip(&r.probs) {
            subjects[i] = Some(SubjectPrediction {
                id: table.ids[i].clone(),
                label: y[i],
                prob,
                fold: r.fold,
                size_fraction: table.size_fractions[i],
                group: scheme.group_of(table.size_fractions[i]),
            });
        }
    }
    let subjects: Vec<SubjectPrediction> = subjects
        .into_iter()
        .map(|s| s.ok_or_else(|| Error::Numerical("a subject was never tested".into())))
        .collect::<Result<_>>()?;

    let probs: Vec<f64> = subjects.iter().map(|s| s.prob).collect();
    let pooled_confusion: Confusion = results.iter().map(|r| r.confusion).sum();
    let pooled = Metrics::from(&pooled_confusion, roc_and_auc(&probs, &y).auc);
    let fold_mean = Metrics {
        sensitivity: mean_defined(results.iter().map(|r| r.confusion.sensitivity())),
        specificity: mean_defined(results.iter().map(|r| r.confusion.specificity())),
        accuracy: mean_defined(results.iter().map(|r| r.confusion.accuracy())),
        auc: mean_defined(results.iter().map(|r| r.roc.auc)),
    };
    let per_group = size_group_breakdown(&probs, &y, &table.size_fractions, &scheme, config.threshold);
    let curves: Vec<Roc> = results.iter().map(|r| r.roc.clone()).collect();
    let selections: Vec<SelectionResult> = results.iter().map(|r| r.selection.clone()).collect();
    Ok(CvReport {
        config: config.clone(),
        manifest_hash: table.manifest_hash(),
        mean_roc: mean_roc(&curves),
        selection_frequency: selection_frequency(&selections, &table.names),
        folds: results,
        subjects,
        pooled_confusion,
        pooled,
        fold_mean,
        per_group,
    })
}
