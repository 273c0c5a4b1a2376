//! Cohort directories: `manifest.csv`, `truth.csv` and three SVOL files per
//! subject.

use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use super::config::CohortConfig;
use super::subject::{generate_subject, GroundTruth};
use crate::error::{Error, Result};
use crate::features::{Label, SubjectRecord};
use crate::rng::{derive_seed, domain, stream};
use crate::volume::svol::{read_svol, write_svol};

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const TRUTH_FILE: &str = "truth.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub label: Option<Label>,
    pub intensity_file: String,
    pub infection_file: String,
    pub segmentation_file: String,
    pub size_target: Option<f64>,
}

pub fn subject_id(index: usize) -> String {
    format!("subj{index:05}")
}

/// Label and size target of subject `index`, followed by its images. Each
/// subject draws from its own stream, so any one can be rebuilt alone.
pub fn generate_indexed_subject(config: &CohortConfig, index: usize) -> Result<(SubjectRecord, GroundTruth)> {
    let mut rng = stream(derive_seed(config.seed, domain::SUBJECT), index as u64);
    let covid = rng.random_bool(config.covid_fraction);
    let profile = config.profile(covid);
    let regime = WeightedIndex::new(profile.size_weights)
        .map_err(|e| Error::invalid(format!("size weights: {e}")))?
        .sample(&mut rng);
    let (lo, hi) = config.regime_bounds(regime);
    let size_target = (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp();
    generate_subject(&subject_id(index), Label::from_positive(covid), size_target, config, &mut rng)
}

/// In-memory cohort, in index order.
pub fn generate_cohort_in_memory(config: &CohortConfig) -> Result<Vec<(SubjectRecord, GroundTruth)>> {
    config.validate()?;
    (0..config.n_subjects)
        .into_par_iter()
        .map(|i| generate_indexed_subject(config, i))
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other:?}", path.display())),
    }
}

/// Writes the cohort under `dir`, creating it if needed. Subjects are
/// generated in parallel; output does not depend on the thread count.
pub fn generate_cohort(config: &CohortConfig, dir: impl AsRef<Path>) -> Result<Vec<GroundTruth>> {
    config.validate()?;
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let results: Vec<(ManifestEntry, GroundTruth)> = (0..config.n_subjects)
        .into_par_iter()
        .map(|i| {
            let (record, truth) = generate_indexed_subject(config, i)?;
            let entry = ManifestEntry {
                subject_id: record.id.clone(),
                label: record.label,
                intensity_file: format!("{}_int.svol", record.id),
                infection_file: format!("{}_inf.svol", record.id),
                segmentation_file: format!("{}_seg.svol", record.id),
                size_target: Some(truth.size_target),
            };
            write_svol(dir.join(&entry.intensity_file), &record.intensity)?;
            write_svol(dir.join(&entry.infection_file), &record.infection)?;
            write_svol(dir.join(&entry.segmentation_file), &record.lung_labels)?;
            Ok((entry, truth))
        })
        .collect::<Result<_>>()?;

    let path = dir.join(MANIFEST_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    w.write_record(["subject_id", "label", "intensity_file", "infection_file", "segmentation_file", "size_target"])
        .map_err(|e| csv_error(&path, e))?;
    for (m, _) in &results {
        w.write_record([
            m.subject_id.as_str(),
            m.label.map_or("", |l| l.as_str()),
            &m.intensity_file,
            &m.infection_file,
            &m.segmentation_file,
            &m.size_target.map_or(String::new(), |t| t.to_string()),
        ])
        .map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(TRUTH_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    w.write_record([
        "subject_id",
        "label",
        "size_target",
        "regime",
        "achieved_fraction",
        "lesion_count",
        "bilateral",
        "peripherality",
    ])
    .map_err(|e| csv_error(&path, e))?;
    for (_, t) in &results {
        w.write_record([
            t.id.clone(),
            t.label.as_str().to_string(),
            t.size_target.to_string(),
            t.regime.to_string(),
            t.achieved_fraction.to_string(),
            t.lesion_count.to_string(),
            (t.bilateral as u8).to_string(),
            t.peripherality.to_string(),
        ])
        .map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(results.into_iter().map(|(_, t)| t).collect())
}

pub fn read_manifest(dir: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = dir.as_ref().join(MANIFEST_FILE);
    let mut r = csv::Reader::from_path(&path).map_err(|e| csv_error(&path, e))?;
    let headers = r.headers().map_err(|e| csv_error(&path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("{}: missing column {name}", path.display())))
    };
    let (id, label, int, inf, seg) = (
        col("subject_id")?,
        col("label")?,
        col("intensity_file")?,
        col("infection_file")?,
        col("segmentation_file")?,
    );
    let target = headers.iter().position(|h| h == "size_target");
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(&path, e))?;
        let field = |i: usize| rec.get(i).unwrap_or("").to_string();
        let label_text = field(label);
        let label = match label_text.as_str() {
            "" => None,
            t => Some(Label::parse(t).ok_or_else(|| {
                Error::Format(format!("{}: subject {} has unknown label `{t}`", path.display(), field(id)))
            })?),
        };
        let size_target = match target.map(field).as_deref() {
            None | Some("") => None,
            Some(t) => Some(t.parse().map_err(|_| {
                Error::Format(format!("{}: bad size_target `{t}`", path.display()))
            })?),
        };
        out.push(ManifestEntry {
            subject_id: field(id),
            label,
            intensity_file: field(int),
            infection_file: field(inf),
            segmentation_file: field(seg),
            size_target,
        });
    }
    Ok(out)
}

pub fn load_subject(dir: impl AsRef<Path>, entry: &ManifestEntry) -> Result<SubjectRecord> {
    let dir = dir.as_ref();
    let load = |f: &str| -> Result<_> {
        let p: PathBuf = dir.join(f);
        read_svol(&p).map_err(|e| match e {
            Error::Io { .. } => Error::Format(format!("subject {}: cannot read {}: {e}", entry.subject_id, p.display())),
            Error::Format(msg) => Error::Format(format!("subject {}: {msg}", entry.subject_id)),
            other => other,
        })
    };
    Ok(SubjectRecord {
        id: entry.subject_id.clone(),
        label: entry.label,
        intensity: load(&entry.intensity_file)?,
        infection: load(&entry.infection_file)?,
        lung_labels: load(&entry.segmentation_file)?,
    })
}
