//! ROC curves, AUC and confusion metrics.

/// Point on an ROC curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Roc {
    pub points: Vec<RocPoint>,
    /// `None` when only one class is present.
    pub auc: Option<f64>,
}

/// Threshold sweep in descending score order. Tied scores move together,
/// which gives them half credit in the area.
pub fn roc_and_auc(scores: &[f64], labels: &[bool]) -> Roc {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let pos = labels.iter().filter(|&&l| l).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Roc {
            points: Vec::new(),
            auc: None,
        };
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0u64, 0u64);
    // Twice the area, in units of 1/(pos·neg).
    let mut area2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut dtp, mut dfp) = (0u64, 0u64);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                dtp += 1;
            } else {
                dfp += 1;
            }
            i += 1;
        }
        area2 += dfp as u128 * (2 * tp + dtp) as u128;
        tp += dtp;
        fp += dfp;
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    let auc = area2 as f64 / (2 * pos as u128 * neg as u128) as f64;
    Roc {
        points,
        auc: Some(auc),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
}

impl Confusion {
    /// `score ≥ threshold` predicts the positive class.
    pub fn from_scores(scores: &[f64], labels: &[bool], threshold: f64) -> Self {
        let mut c = Confusion::default();
        for (&s, &l) in scores.iter().zip(labels) {
            match (l, s >= threshold) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fp += 1,
            }
        }
        c
    }

    pub fn n(&self) -> usize {
        self.tp + self.fn_ + self.tn + self.fp
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.tn + self.fp
    }

    pub fn sensitivity(&self) -> Option<f64> {
        ratio(self.tp, self.positives())
    }

    pub fn specificity(&self) -> Option<f64> {
        ratio(self.tn, self.negatives())
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.n())
    }
}

impl std::ops::Add for Confusion {
    type Output = Confusion;

    fn add(self, o: Confusion) -> Confusion {
        Confusion {
            tp: self.tp + o.tp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
        }
    }
}

impl std::iter::Sum for Confusion {
    fn sum<I: Iterator<Item = Confusion>>(iter: I) -> Confusion {
        iter.fold(Confusion::default(), |a, b| a + b)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// SEN, SPE and ACC at one operating threshold; `None` marks an empty
/// denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionMetrics {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
}

pub fn confusion_metrics(scores: &[f64], labels: &[bool], threshold: f64) -> ConfusionMetrics {
    let c = Confusion::from_scores(scores, labels, threshold);
    ConfusionMetrics {
        sensitivity: c.sensitivity(),
        specificity: c.specificity(),
        accuracy: c.accuracy(),
    }
}

/// Vertical averaging of ROC curves on the FPR grid 0.00, 0.01, …, 1.00.
pub fn mean_roc(curves: &[Roc]) -> Vec<RocPoint> {
    const STEPS: usize = 100;
    let valid: Vec<&Roc> = curves.iter().filter(|c| !c.points.is_empty()).collect();
    let mut out = Vec::with_capacity(STEPS + 1);
    for s in 0..=STEPS {
        let fpr = s as f64 / STEPS as f64;
        let tpr = if s == 0 {
            0.0
        } else if s == STEPS || valid.is_empty() {
            if valid.is_empty() { fpr } else { 1.0 }
        } else {
            valid.iter().map(|c| interpolate_tpr(&c.points, fpr)).sum::<f64>() / valid.len() as f64
        };
        out.push(RocPoint { fpr, tpr });
    }
    out
}

/// TPR at `fpr`; on a vertical segment the highest TPR is taken.
pub fn interpolate_tpr(points: &[RocPoint], fpr: f64) -> f64 {
    let last = points.iter().rposition(|p| p.fpr <= fpr).unwrap_or(0);
    let a = points[last];
    match points.get(last + 1) {
        Some(b) if b.fpr > a.fpr => a.tpr + (b.tpr - a.tpr) * (fpr - a.fpr) / (b.fpr - a.fpr),
        _ => a.tpr,
    }
}
