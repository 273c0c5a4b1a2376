//! Fixed infection-size strata used for reporting.

use super::roc::{roc_and_auc, Confusion};

pub const GROUP_BOUNDS: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];
pub const GROUP_LABELS: [&str; 5] = ["<0.01%", "0.01–0.1%", "0.1–1%", "1–10%", ">10%"];
/// Indices of "0.01–0.1%", "0.1–1%" and "1–10%".
pub const MIDDLE_GROUPS: [usize; 3] = [1, 2, 3];

#[derive(Debug, Clone, PartialEq)]
pub struct SizeGroupScheme {
    pub bounds: Vec<f64>,
    pub labels: Vec<String>,
}

impl Default for SizeGroupScheme {
    fn default() -> Self {
        SizeGroupScheme {
            bounds: GROUP_BOUNDS.to_vec(),
            labels: GROUP_LABELS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl SizeGroupScheme {
    /// Left-closed: a fraction equal to a bound belongs to the group above.
    pub fn group_of(&self, fraction: f64) -> usize {
        self.bounds.iter().filter(|&&b| b <= fraction).count()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupMetrics {
    pub label: String,
    pub n_covid: usize,
    pub n_cap: usize,
    pub confusion: Confusion,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
    pub auc: Option<f64>,
}

/// Metrics recomputed on each stratum of the pooled predictions.
pub fn size_group_breakdown(
    scores: &[f64],
    labels: &[bool],
    fractions: &[f64],
    scheme: &SizeGroupScheme,
    threshold: f64,
) -> Vec<GroupMetrics> {
    (0..scheme.len())
        .map(|g| {
            let idx: Vec<usize> = (0..scores.len()).filter(|&i| scheme.group_of(fractions[i]) == g).collect();
            let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
            let l: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
            let c = Confusion::from_scores(&s, &l, threshold);
            GroupMetrics {
                label: scheme.labels[g].clone(),
                n_covid: c.positives(),
                n_cap: c.negatives(),
                confusion: c,
                sensitivity: c.sensitivity(),
                specificity: c.specificity(),
                accuracy: c.accuracy(),
                auc: roc_and_auc(&s, &l).auc,
            }
        })
        .collect()
}
