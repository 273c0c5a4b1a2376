//! Cross-validation, ROC and per-size-group metrics.

mod cv;
mod groups;
mod kfold;
mod report;
mod roc;

pub use cv::{run_cv, CvConfig, CvReport, FoldResult, Metrics, ModelVariant, SubjectPrediction, MIN_CV_SUBJECTS};
pub use groups::{size_group_breakdown, GroupMetrics, SizeGroupScheme, GROUP_BOUNDS, GROUP_LABELS, MIDDLE_GROUPS};
pub use kfold::kfold_split;
pub use report::{format_report, summary_table, validate_report, write_report, ReportSummary, REPORT_MAGIC, SECTIONS};
pub use roc::{confusion_metrics, interpolate_tpr, mean_roc, roc_and_auc, Confusion, ConfusionMetrics, Roc, RocPoint};
