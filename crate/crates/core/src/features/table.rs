//! Feature CSV: `subject_id,label,size_fraction,<96 manifest names>`, one
//! row per subject, reals written with 9 significant digits.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use super::manifest::{hash_names, names, N_FEATURES};
use super::{FeatureVector, Label};
use crate::error::{Error, Result};
use crate::numeric::format_sig;

pub const SIG_DIGITS: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub ids: Vec<String>,
    pub labels: Vec<Option<Label>>,
    pub size_fractions: Vec<f64>,
    /// `n × names.len()`.
    pub values: Array2<f64>,
}

impl FeatureTable {
    pub fn from_vectors(vectors: &[FeatureVector]) -> Self {
        let mut values = Array2::zeros((vectors.len(), N_FEATURES));
        for (mut row, fv) in values.rows_mut().into_iter().zip(vectors) {
            row.assign(&ndarray::ArrayView1::from(&fv.values));
        }
        FeatureTable {
            names: names().into_iter().map(String::from).collect(),
            ids: vectors.iter().map(|v| v.subject_id.clone()).collect(),
            labels: vectors.iter().map(|v| v.label).collect(),
            size_fractions: vectors.iter().map(|v| v.size_fraction).collect(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn manifest_hash(&self) -> String {
        hash_names(&self.names)
    }

    pub fn row(&self, i: usize) -> FeatureVector {
        FeatureVector {
            subject_id: self.ids[i].clone(),
            label: self.labels[i],
            size_fraction: self.size_fractions[i],
            values: self.values.row(i).to_vec(),
        }
    }

    /// Labels as `true` for COVID; every row must be labelled.
    pub fn positive_labels(&self) -> Result<Vec<bool>> {
        self.labels
            .iter()
            .zip(&self.ids)
            .map(|(l, id)| {
                l.map(|l| l.is_positive())
                    .ok_or_else(|| Error::invalid(format!("subject {id} has no label")))
            })
            .collect()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> FeatureTable {
        FeatureTable {
            names: self.names.clone(),
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            size_fractions: indices.iter().map(|&i| self.size_fractions[i]).collect(),
            values: self.values.select(ndarray::Axis(0), indices),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("subject_id,label,size_fraction");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&self.ids[i]);
            out.push(',');
            out.push_str(self.labels[i].map(|l| l.as_str()).unwrap_or(""));
            out.push(',');
            out.push_str(&format_sig(self.size_fractions[i], SIG_DIGITS));
            for v in self.values.row(i) {
                out.push(',');
                out.push_str(&format_sig(*v, SIG_DIGITS));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv_string().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file).map_err(|e| match e {
            Error::InvalidInput(msg) => Error::InvalidInput(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_reader(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::invalid(format!("bad CSV header: {e}")))?
            .clone();
        let cols: Vec<&str> = header.iter().collect();
        if cols.len() < 4 || cols[..3] != ["subject_id", "label", "size_fraction"] {
            return Err(Error::invalid(
                "CSV header must start with subject_id,label,size_fraction",
            ));
        }
        let names: Vec<String> = cols[3..].iter().map(|s| s.to_string()).collect();
        let p = names.len();

        let mut ids = Vec::new();
        let mut labels = Vec::new();
        let mut sizes = Vec::new();
        let mut flat = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::invalid(format!("CSV row {}: {e}", line + 2)))?;
            if rec.len() != p + 3 {
                return Err(Error::invalid(format!(
                    "CSV row {} has {} fields, expected {}",
                    line + 2,
                    rec.len(),
                    p + 3
                )));
            }
            ids.push(rec[0].to_string());
            labels.push(match &rec[1] {
                "" => None,
                s => Some(Label::parse(s).ok_or_else(|| {
                    Error::invalid(format!("CSV row {}: unknown label {s:?}", line + 2))
                })?),
            });
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::invalid(format!("CSV row {}: bad number {s:?}", line + 2)))
            };
            sizes.push(parse(&rec[2])?);
            for field in rec.iter().skip(3) {
                flat.push(parse(field)?);
            }
        }
        let values = Array2::from_shape_vec((ids.len(), p), flat)
            .map_err(|e| Error::invalid(e.to_string()))?;
        Ok(FeatureTable {
            names,
            ids,
            labels,
            size_fractions: sizes,
            values,
        })
    }
}
