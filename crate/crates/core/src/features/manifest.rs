//! The canonical ordered list of the 96 features.

use std::sync::LazyLock;

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Volume,
    Number,
    Histogram,
    Surface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Millilitre,
    Fraction,
    Count,
    Hounsfield,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpec {
    pub name: String,
    pub family: Family,
    pub unit: Unit,
}

pub const N_VOLUME: usize = 26;
pub const N_NUMBER: usize = 31;
pub const N_HISTOGRAM: usize = 32;
pub const N_SURFACE: usize = 7;
pub const N_FEATURES: usize = N_VOLUME + N_NUMBER + N_HISTOGRAM + N_SURFACE;

pub const VOLUME_OFFSET: usize = 0;
pub const NUMBER_OFFSET: usize = VOLUME_OFFSET + N_VOLUME;
pub const HISTOGRAM_OFFSET: usize = NUMBER_OFFSET + N_NUMBER;
pub const SURFACE_OFFSET: usize = HISTOGRAM_OFFSET + N_HISTOGRAM;

/// Index of `vol_pct_total`, which equals the infection size fraction.
pub const VOL_PCT_TOTAL: usize = 1;

pub static MANIFEST: LazyLock<Vec<FeatureSpec>> = LazyLock::new(build);

fn build() -> Vec<FeatureSpec> {
    let mut out = Vec::with_capacity(N_FEATURES);
    let mut push = |name: String, family, unit| out.push(FeatureSpec { name, family, unit });

    use Family::*;
    use Unit::*;
    push("vol_abs_total".into(), Volume, Millilitre);
    push("vol_pct_total".into(), Volume, Fraction);
    for lobe in 1..=5 {
        push(format!("vol_pct_lobe_{lobe}"), Volume, Fraction);
    }
    for seg in 1..=18 {
        push(format!("vol_pct_seg_{seg:02}"), Volume, Fraction);
    }
    push("vol_pct_lr_diff".into(), Volume, Fraction);

    for name in ["num_total", "num_lung_L", "num_lung_R", "num_lr_diff"] {
        push(name.into(), Number, Count);
    }
    for lobe in 1..=5 {
        push(format!("num_lobe_{lobe}"), Number, Count);
    }
    for seg in 1..=18 {
        push(format!("num_seg_{seg:02}"), Number, Count);
    }
    for name in ["lesion_vol_mean", "lesion_vol_max", "lesion_vol_std"] {
        push(name.into(), Number, Millilitre);
    }
    push("num_large".into(), Number, Count);

    for bin in 0..30 {
        push(format!("hist_bin_{bin:02}"), Histogram, Fraction);
    }
    push("hist_mean".into(), Histogram, Hounsfield);
    push("hist_std".into(), Histogram, Hounsfield);

    for band in 1..=5 {
        push(format!("surf_cnt_band_{band}"), Surface, Count);
    }
    push("surf_total".into(), Surface, Count);
    push("surf_peripheral_frac".into(), Surface, Fraction);
    out
}

pub fn names() -> Vec<&'static str> {
    MANIFEST.iter().map(|f| f.name.as_str()).collect()
}

pub fn index_of(name: &str) -> Option<usize> {
    MANIFEST.iter().position(|f| f.name == name)
}

/// Short digest of an ordered name list; models and feature tables carry
/// it so mismatched layouts are caught.
pub fn hash_names<S: AsRef<str>>(names: &[S]) -> String {
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_ref().as_bytes());
        h.update(b"\n");
    }
    h.finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn manifest_hash() -> String {
    hash_names(&names())
}
