//! Synthetic cohorts with planted class- and size-dependent lesion patterns.

mod cohort;
mod config;
mod lungs;
mod subject;

pub use cohort::{
    generate_cohort, generate_cohort_in_memory, generate_indexed_subject, load_subject, read_manifest, subject_id,
    ManifestEntry, MANIFEST_FILE, TRUTH_FILE,
};
pub use config::{ClassProfile, CohortConfig, N_REGIMES};
pub use lungs::{generate_lung_fields, MIN_DIM};
pub use subject::{generate_subject, GroundTruth, MAX_GROWTH_ITERATIONS, MAX_SIZE_TARGET, PERIPHERAL_DEPTH};
