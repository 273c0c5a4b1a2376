//! `ISARF-REPORT v1`: sectioned text with comma-separated rows.
//!
//! Sections, in order: `[config]` (key=value), `[overall]`, `[per_fold]`,
//! `[per_group]`, `[size_thresholds]`, `[mean_roc]` (`fpr,tpr`),
//! `[subjects]` (`id,label,prob,fold,group`), `[selection_per_fold]`,
//! `[selection_frequency]`, then `[end]`. Undefined metrics are `null`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::cv::CvReport;
use super::groups::GROUP_LABELS;
use crate::error::{Error, Result};
use crate::features::Label;

pub const REPORT_MAGIC: &str = "ISARF-REPORT v1";

pub const SECTIONS: [&str; 9] = [
    "config",
    "overall",
    "per_fold",
    "per_group",
    "size_thresholds",
    "mean_roc",
    "subjects",
    "selection_per_fold",
    "selection_frequency",
];

const OVERALL_HEADER: &str = "metric,pooled,fold_mean";
const PER_FOLD_HEADER: &str = "fold,n,tp,fn,tn,fp,SEN,SPE,ACC,AUC";
const PER_GROUP_HEADER: &str = "group,n_covid,n_cap,SEN,SPE,ACC,AUC";
const THRESHOLDS_HEADER: &str = "fold,thresholds";
const ROC_HEADER: &str = "fpr,tpr";
const SUBJECTS_HEADER: &str = "id,label,prob,fold,group";
const SELECTION_HEADER: &str = "fold,lambda,fallback,selected";
const FREQUENCY_HEADER: &str = "feature,count";

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "null".to_string(), |v| format!("{v}"))
}

pub fn format_report(r: &CvReport) -> String {
    let mut s = String::new();
    let c = &r.config;
    let w = &mut s;
    writeln!(w, "{REPORT_MAGIC}").unwrap();
    writeln!(w, "[config]").unwrap();
    writeln!(w, "model={}", c.variant).unwrap();
    writeln!(w, "seed={}", c.seed).unwrap();
    writeln!(w, "folds={}", c.folds).unwrap();
    writeln!(w, "stratified=class").unwrap();
    writeln!(w, "threshold={}", c.threshold).unwrap();
    writeln!(w, "n_subjects={}", r.subjects.len()).unwrap();
    writeln!(w, "manifest_hash={}", r.manifest_hash).unwrap();

    writeln!(w, "[overall]\n{OVERALL_HEADER}").unwrap();
    let (p, m) = (&r.pooled, &r.fold_mean);
    for (name, a, b) in [
        ("SEN", p.sensitivity, m.sensitivity),
        ("SPE", p.specificity, m.specificity),
        ("ACC", p.accuracy, m.accuracy),
        ("AUC", p.auc, m.auc),
    ] {
        writeln!(w, "{name},{},{}", opt(a), opt(b)).unwrap();
    }

    writeln!(w, "[per_fold]\n{PER_FOLD_HEADER}").unwrap();
    for f in &r.folds {
        let cf = &f.confusion;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            f.fold,
            cf.n(),
            cf.tp,
            cf.fn_,
            cf.tn,
            cf.fp,
            opt(cf.sensitivity()),
            opt(cf.specificity()),
            opt(cf.accuracy()),
            opt(f.roc.auc)
        )
        .unwrap();
    }

    writeln!(w, "[per_group]\n{PER_GROUP_HEADER}").unwrap();
    for g in &r.per_group {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            g.label,
            g.n_covid,
            g.n_cap,
            opt(g.sensitivity),
            opt(g.specificity),
            opt(g.accuracy),
            opt(g.auc)
        )
        .unwrap();
    }

    writeln!(w, "[size_thresholds]\n{THRESHOLDS_HEADER}").unwrap();
    for f in &r.folds {
        if let Some(t) = &f.size_thresholds {
            let t: Vec<String> = t.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{},{}", f.fold, t.join(";")).unwrap();
        }
    }

    writeln!(w, "[mean_roc]\n{ROC_HEADER}").unwrap();
    for pt in &r.mean_roc {
        writeln!(w, "{},{}", pt.fpr, pt.tpr).unwrap();
    }

    writeln!(w, "[subjects]\n{SUBJECTS_HEADER}").unwrap();
    for sp in &r.subjects {
        writeln!(
            w,
            "{},{},{},{},{}",
            sp.id,
            Label::from_positive(sp.label).as_str(),
            sp.prob,
            sp.fold,
            sp.group
        )
        .unwrap();
    }

    writeln!(w, "[selection_per_fold]\n{SELECTION_HEADER}").unwrap();
    for f in &r.folds {
        let sel = &f.selection;
        let picked: Vec<String> = sel.selected.iter().map(|j| j.to_string()).collect();
        writeln!(w, "{},{},{},{}", f.fold, sel.lambda, sel.fallback, picked.join(";")).unwrap();
    }

    writeln!(w, "[selection_frequency]\n{FREQUENCY_HEADER}").unwrap();
    for (name, count) in &r.selection_frequency {
        writeln!(w, "{name},{count}").unwrap();
    }
    s.push_str("[end]\n");
    s
}

pub fn write_report(r: &CvReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_report(r)).map_err(|e| Error::io(path, e))
}

/// Headline numbers recovered from a validated report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSummary {
    pub model: String,
    pub n_subjects: usize,
    /// `(label, n_covid, n_cap, ACC)` per reporting group.
    pub groups: Vec<(String, usize, usize, Option<f64>)>,
    pub pooled_acc: Option<f64>,
    pub pooled_auc: Option<f64>,
    /// Learned size thresholds per fold, when present.
    pub size_thresholds: Vec<Vec<f64>>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(format!("report: {}", msg.into()))
}

fn metric(tok: &str) -> Result<Option<f64>> {
    if tok == "null" {
        return Ok(None);
    }
    let v: f64 = tok.parse().map_err(|_| bad(format!("bad number `{tok}`")))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(bad(format!("metric {v} outside [0, 1]")));
    }
    Ok(Some(v))
}

fn count(tok: &str) -> Result<usize> {
    tok.parse().map_err(|_| bad(format!("bad count `{tok}`")))
}

/// Checks layout, arities, value ranges and the subject accounting rules.
pub fn validate_report(text: &str) -> Result<ReportSummary> {
    let mut lines = text.lines();
    if lines.next() != Some(REPORT_MAGIC) {
        return Err(bad("missing ISARF-REPORT v1 header"));
    }
    let mut body: Vec<(String, Vec<&str>)> = Vec::new();
    let mut ended = false;
    for l in lines {
        if ended {
            return Err(bad("content after [end]"));
        }
        if l == "[end]" {
            ended = true;
        } else if let Some(name) = l.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            body.push((name.to_string(), Vec::new()));
        } else {
            body.last_mut().ok_or_else(|| bad("row before first section"))?.1.push(l);
        }
    }
    if !ended {
        return Err(bad("missing [end]"));
    }
    let names: Vec<&str> = body.iter().map(|(n, _)| n.as_str()).collect();
    if names != SECTIONS {
        return Err(bad(format!("sections {names:?} do not match {SECTIONS:?}")));
    }
    let section = |i: usize, header: &str| -> Result<Vec<Vec<&str>>> {
        let rows = &body[i].1;
        if rows.first() != Some(&header) {
            return Err(bad(format!("[{}] header should be `{header}`", SECTIONS[i])));
        }
        let arity = header.split(',').count();
        rows[1..]
            .iter()
            .map(|r| {
                let t: Vec<&str> = r.split(',').collect();
                if t.len() == arity {
                    Ok(t)
                } else {
                    Err(bad(format!("[{}] row `{r}` has {} fields", SECTIONS[i], t.len())))
                }
            })
            .collect()
    };

    let mut model = None;
    let mut n_subjects = None;
    let mut folds = None;
    for row in &body[0].1 {
        let (k, v) = row.split_once('=').ok_or_else(|| bad(format!("config row `{row}`")))?;
        match k {
            "model" => model = Some(v.to_string()),
            "n_subjects" => n_subjects = Some(count(v)?),
            "folds" => folds = Some(count(v)?),
            _ => {}
        }
    }
    let model = model.ok_or_else(|| bad("config lacks model"))?;
    let n_subjects = n_subjects.ok_or_else(|| bad("config lacks n_subjects"))?;
    let folds = folds.ok_or_else(|| bad("config lacks folds"))?;

    let overall = section(1, OVERALL_HEADER)?;
    let mut pooled = [None; 4];
    if overall.len() != 4 {
        return Err(bad("[overall] needs SEN, SPE, ACC and AUC rows"));
    }
    for (i, (row, name)) in overall.iter().zip(["SEN", "SPE", "ACC", "AUC"]).enumerate() {
        if row[0] != name {
            return Err(bad(format!("[overall] row {i} should be {name}")));
        }
        pooled[i] = metric(row[1])?;
        metric(row[2])?;
    }

    let per_fold = section(2, PER_FOLD_HEADER)?;
    if per_fold.len() != folds {
        return Err(bad("[per_fold] row count differs from folds"));
    }
    let mut fold_total = 0;
    for row in &per_fold {
        let n = count(row[1])?;
        let parts: usize = row[2..6].iter().map(|t| count(t)).sum::<Result<usize>>()?;
        if parts != n {
            return Err(bad("per-fold confusion counts do not add up"));
        }
        fold_total += n;
        for t in &row[6..] {
            metric(t)?;
        }
    }

    let per_group = section(3, PER_GROUP_HEADER)?;
    if per_group.len() != GROUP_LABELS.len() {
        return Err(bad("[per_group] needs five rows"));
    }
    let mut groups = Vec::new();
    for (row, label) in per_group.iter().zip(GROUP_LABELS) {
        if row[0] != label {
            return Err(bad(format!("group `{}` should be `{label}`", row[0])));
        }
        for t in &row[3..] {
            metric(t)?;
        }
        groups.push((label.to_string(), count(row[1])?, count(row[2])?, metric(row[5])?));
    }

    let size_thresholds = section(4, THRESHOLDS_HEADER)?
        .iter()
        .map(|row| {
            if row[1].is_empty() {
                return Ok(Vec::new());
            }
            row[1]
                .split(';')
                .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad threshold `{t}`"))))
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let roc = section(5, ROC_HEADER)?;
    let mut last = 0.0;
    for row in &roc {
        metric(row[0])?;
        let tpr = metric(row[1])?.unwrap_or(0.0);
        if tpr < last {
            return Err(bad("mean ROC is not monotone"));
        }
        last = tpr;
    }

    let subjects = section(6, SUBJECTS_HEADER)?;
    let mut ids = HashSet::new();
    for row in &subjects {
        if !ids.insert(row[0]) {
            return Err(bad(format!("subject {} appears twice", row[0])));
        }
        Label::parse(row[1]).ok_or_else(|| bad(format!("bad label `{}`", row[1])))?;
        if metric(row[2])?.is_none() {
            return Err(bad("subject probability is null"));
        }
        if count(row[3])? >= folds || count(row[4])? >= GROUP_LABELS.len() {
            return Err(bad("subject fold or group out of range"));
        }
    }
    let group_total: usize = groups.iter().map(|g| g.1 + g.2).sum();
    if subjects.len() != n_subjects || fold_total != n_subjects || group_total != n_subjects {
        return Err(bad("subject, fold and group totals disagree"));
    }
    section(7, SELECTION_HEADER)?;
    section(8, FREQUENCY_HEADER)?;

    Ok(ReportSummary {
        model,
        n_subjects,
        groups,
        pooled_acc: pooled[2],
        pooled_auc: pooled[3],
        size_thresholds,
    })
}

/// Overall metrics and the five-group table for a terminal.
pub fn summary_table(r: &CvReport) -> String {
    let mut s = String::new();
    let f = |x: Option<f64>| x.map_or_else(|| "  n/a".to_string(), |v| format!("{v:.3}"));
    let p = &r.pooled;
    writeln!(
        s,
        "{} overall: SEN {}  SPE {}  ACC {}  AUC {}",
        r.config.variant,
        f(p.sensitivity),
        f(p.specificity),
        f(p.accuracy),
        f(p.auc)
    )
    .unwrap();
    writeln!(s, "{:<10} {:>7} {:>6} {:>6} {:>6} {:>6} {:>6}", "group", "n_covid", "n_cap", "SEN", "SPE", "ACC", "AUC").unwrap();
    for g in &r.per_group {
        writeln!(
            s,
            "{:<10} {:>7} {:>6} {:>6} {:>6} {:>6} {:>6}",
            g.label,
            g.n_covid,
            g.n_cap,
            f(g.sensitivity),
            f(g.specificity),
            f(g.accuracy),
            f(g.auc)
        )
        .unwrap();
    }
    s
}
