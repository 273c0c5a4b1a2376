//! Infection-size-aware random forest (iSARF) screening pipeline.
//!
//! The crate is organised bottom-up:
//!
//! * [`volume`] holds the voxel container, the SVOL reader/writer, isotropic
//!   resampling and the geometric kernels (connected components, boundary
//!   voxels, exact Euclidean distance transform).
//! * [`features`] turns one subject (intensity, infection mask, lung-field
//!   label map) into the 96-entry location-specific feature vector.
//! * [`selection`] standardizes features and picks a subset with LASSO.
//! * [`forest`] contains CART, random forests and the size-split composite.
//! * [`baseline`] has the logistic-regression and MLP comparison models.
//! * [`eval`] is the stratified cross-validation harness and its metrics.
//! * [`synth`] generates synthetic cohorts with a known ground truth.

pub mod baseline;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod numeric;
pub mod rng;
pub mod selection;
pub mod synth;
pub mod taxonomy;
pub mod volume;

#[cfg(any(test, feature = "oracles"))]
pub mod oracle;

pub use error::{Error, Result};
pub use features::{FeatureVector, Label, SubjectRecord};
pub use volume::{Dims, VolumeKind, VoxelVolume};
