use super::manifest::N_HISTOGRAM;
use crate::volume::{Mask, VoxelVolume};

pub const HU_MIN: f64 = -1350.0;
pub const HU_MAX: f64 = 150.0;
pub const N_BINS: usize = 30;
pub const BIN_WIDTH: f64 = (HU_MAX - HU_MIN) / N_BINS as f64;

/// Bin of an intensity; values outside `[-1350, 150)` clamp to the end bins.
pub fn hu_bin(hu: f64) -> usize {
    let b = ((hu - HU_MIN) / BIN_WIDTH).floor();
    if b < 0.0 {
        0
    } else {
        (b as usize).min(N_BINS - 1)
    }
}

/// `hist_bin_00..29` (normalized frequencies), `hist_mean`, `hist_std` over
/// the infected voxels.
pub fn histogram_features(intensity: &VoxelVolume, infection: &Mask) -> [f64; N_HISTOGRAM] {
    assert_eq!(intensity.dims(), infection.dims(), "intensity and mask grids differ");
    let mut out = [0.0; N_HISTOGRAM];
    let values: Vec<f64> = infection
        .indices()
        .map(|i| intensity.data()[i] as f64)
        .collect();
    if values.is_empty() {
        return out;
    }
    let n = values.len() as f64;
    let mut counts = [0usize; N_BINS];
    for &v in &values {
        counts[hu_bin(v)] += 1;
    }
    for (o, c) in out.iter_mut().zip(counts) {
        *o = c as f64 / n;
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    out[N_BINS] = mean;
    out[N_BINS + 1] = var.sqrt();
    out
}
