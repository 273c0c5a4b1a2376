//! Location-specific handcrafted features of one subject.
//!
//! Every subject is resampled to 1.5 mm isotropic voxels first (nearest
//! neighbour for masks and label maps, trilinear for intensities); the
//! families then operate on `infection ∩ lung`.

mod histogram;
pub mod manifest;
mod regional;
mod surface;
pub mod table;

pub use histogram::{histogram_features, hu_bin, BIN_WIDTH, HU_MAX, HU_MIN, N_BINS};
pub use manifest::{manifest_hash, Family, FeatureSpec, MANIFEST, N_FEATURES};
pub use regional::{number_features, volume_features, DEFAULT_LARGE_LESION_ML, LESION_CONNECTIVITY};
pub use surface::{band_of_squared, surface_features, BAND_EDGES};
pub use table::FeatureTable;

use manifest::{HISTOGRAM_OFFSET, NUMBER_OFFSET, SURFACE_OFFSET, VOLUME_OFFSET};

use crate::error::{Error, Result};
use crate::volume::{resample_isotropic, Interpolation, LabelMap, Mask, VoxelVolume};

/// Isotropic voxel size all features are computed at, in mm.
pub const FEATURE_SPACING_MM: f64 = 1.5;

/// Volume of one 1.5 mm voxel in mL.
pub const VOXEL_ML: f64 = FEATURE_SPACING_MM * FEATURE_SPACING_MM * FEATURE_SPACING_MM / 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Covid,
    Cap,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Covid => "COVID",
            Label::Cap => "CAP",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "COVID" => Some(Label::Covid),
            "CAP" => Some(Label::Cap),
            _ => None,
        }
    }

    /// COVID is the positive class.
    pub fn is_positive(&self) -> bool {
        *self == Label::Covid
    }

    pub fn from_positive(positive: bool) -> Self {
        if positive {
            Label::Covid
        } else {
            Label::Cap
        }
    }
}

/// One subject: CT intensities, infection mask and 18-segment lung fields.
#[derive(Debug, Clone)]
pub struct SubjectRecord {
    pub id: String,
    pub label: Option<Label>,
    pub intensity: VoxelVolume,
    pub infection: VoxelVolume,
    pub lung_labels: VoxelVolume,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub subject_id: String,
    pub label: Option<Label>,
    pub size_fraction: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureOptions {
    /// Lesions at least this large (mL) count towards `num_large`.
    pub large_lesion_ml: f64,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions {
            large_lesion_ml: DEFAULT_LARGE_LESION_ML,
        }
    }
}

/// Infected share of the whole lung. Infected voxels outside the lung are
/// ignored with a warning.
pub fn infection_fraction(infection: &Mask, lungs: &LabelMap) -> Result<f64> {
    let lung = lungs.lung_count();
    if lung == 0 {
        return Err(Error::invalid("lung map is empty"));
    }
    let mut inside = 0usize;
    let mut outside = 0usize;
    for i in infection.indices() {
        if lungs.get(i) > 0 {
            inside += 1;
        } else {
            outside += 1;
        }
    }
    if outside > 0 {
        log::warn!("{outside} infected voxels lie outside the lung and were ignored");
    }
    Ok(inside as f64 / lung as f64)
}

/// Grids of one subject after resampling to the feature spacing.
pub struct PreparedSubject {
    pub intensity: VoxelVolume,
    pub infection: Mask,
    pub lungs: LabelMap,
}

pub fn prepare(subject: &SubjectRecord) -> Result<PreparedSubject> {
    let intensity = resample_isotropic(&subject.intensity, FEATURE_SPACING_MM, Interpolation::Trilinear)?;
    let infection = resample_isotropic(&subject.infection, FEATURE_SPACING_MM, Interpolation::Nearest)?.to_mask()?;
    let lungs = resample_isotropic(&subject.lung_labels, FEATURE_SPACING_MM, Interpolation::Nearest)?.to_labels()?;
    if intensity.dims() != infection.dims() || infection.dims() != lungs.dims() {
        return Err(Error::invalid(format!(
            "subject {}: grids differ after resampling (intensity {}, infection {}, lungs {})",
            subject.id,
            intensity.dims(),
            infection.dims(),
            lungs.dims()
        )));
    }
    Ok(PreparedSubject {
        intensity,
        infection,
        lungs,
    })
}

pub fn extract_feature_vector(subject: &SubjectRecord, options: &FeatureOptions) -> Result<FeatureVector> {
    let prepared = prepare(subject)?;
    let mut fv = features_from_grids(&prepared.intensity, &prepared.infection, &prepared.lungs, options)?;
    fv.subject_id = subject.id.clone();
    fv.label = subject.label;
    Ok(fv)
}

/// Feature vector of grids that are already at the feature spacing.
pub fn features_from_grids(
    intensity: &VoxelVolume,
    infection: &Mask,
    lungs: &LabelMap,
    options: &FeatureOptions,
) -> Result<FeatureVector> {
    let size_fraction = infection_fraction(infection, lungs)?;
    let infection = infection.and(&lungs.lung_mask());

    let mut values = vec![0.0; N_FEATURES];
    values[VOLUME_OFFSET..NUMBER_OFFSET].copy_from_slice(&volume_features(&infection, lungs));
    values[NUMBER_OFFSET..HISTOGRAM_OFFSET]
        .copy_from_slice(&number_features(&infection, lungs, options.large_lesion_ml));
    values[HISTOGRAM_OFFSET..SURFACE_OFFSET].copy_from_slice(&histogram_features(intensity, &infection));
    values[SURFACE_OFFSET..].copy_from_slice(&surface_features(&infection, lungs)?);

    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("feature {} is not finite", MANIFEST[bad].name)));
    }
    Ok(FeatureVector {
        subject_id: String::new(),
        label: None,
        size_fraction,
        values,
    })
}
