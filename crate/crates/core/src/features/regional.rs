//! Volume and lesion-number families: infection burden per lung, lobe and
//! segment.

use super::manifest::{N_NUMBER, N_VOLUME};
use super::VOXEL_ML;
use crate::taxonomy::{lobe_codes, lobe_of_segment, lung_codes, lung_of_segment, Lung};
use crate::volume::{component_counts_by_region, connected_components, Connectivity, LabelMap, Mask};

/// Lesions are 26-connected.
pub const LESION_CONNECTIVITY: Connectivity = Connectivity::TwentySix;

pub const DEFAULT_LARGE_LESION_ML: f64 = 1.0;

/// Voxel tallies over the segment / lobe / lung hierarchy.
struct RegionTally {
    segment: [usize; 19],
    lobe: [usize; 6],
    left: usize,
    right: usize,
}

impl RegionTally {
    fn new(lungs: &LabelMap, keep: impl Fn(usize) -> bool) -> Self {
        let mut segment = [0usize; 19];
        for (i, &code) in lungs.codes().iter().enumerate() {
            if code > 0 && keep(i) {
                segment[code as usize] += 1;
            }
        }
        let mut lobe = [0usize; 6];
        let (mut left, mut right) = (0, 0);
        for s in 1..=18u8 {
            let n = segment[s as usize];
            lobe[lobe_of_segment(s).unwrap() as usize] += n;
            match lung_of_segment(s).unwrap() {
                Lung::Left => left += n,
                Lung::Right => right += n,
            }
        }
        RegionTally {
            segment,
            lobe,
            left,
            right,
        }
    }

    fn total(&self) -> usize {
        self.left + self.right
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `vol_abs_total, vol_pct_total, vol_pct_lobe_1..5, vol_pct_seg_01..18,
/// vol_pct_lr_diff`.
pub fn volume_features(infection: &Mask, lungs: &LabelMap) -> [f64; N_VOLUME] {
    let lung = RegionTally::new(lungs, |_| true);
    let inf = RegionTally::new(lungs, |i| infection.get(i));

    let mut out = [0.0; N_VOLUME];
    out[0] = inf.total() as f64 * VOXEL_ML;
    out[1] = ratio(inf.total(), lung.total());
    for lobe in 1..=5 {
        out[1 + lobe] = ratio(inf.lobe[lobe], lung.lobe[lobe]);
    }
    for seg in 1..=18 {
        out[6 + seg] = ratio(inf.segment[seg], lung.segment[seg]);
    }
    out[25] = (ratio(inf.left, lung.left) - ratio(inf.right, lung.right)).abs();
    out
}

/// `num_total, num_lung_L, num_lung_R, num_lr_diff, num_lobe_1..5,
/// num_seg_01..18, lesion_vol_mean, lesion_vol_max, lesion_vol_std,
/// num_large`.
///
/// Regional counts are components of the infection intersected with each
/// region, so a lesion crossing a fissure is counted in both lobes.
pub fn number_features(infection: &Mask, lungs: &LabelMap, large_lesion_ml: f64) -> [f64; N_NUMBER] {
    let inside = infection.and(&lungs.lung_mask());
    let mut out = [0.0; N_NUMBER];
    if inside.is_empty() {
        return out;
    }

    let lesions = connected_components(&inside, LESION_CONNECTIVITY);
    let by_lung = component_counts_by_region(&inside, &lung_codes(lungs.codes()), LESION_CONNECTIVITY, 2);
    let by_lobe = component_counts_by_region(&inside, &lobe_codes(lungs.codes()), LESION_CONNECTIVITY, 5);
    let by_seg = component_counts_by_region(&inside, lungs.codes(), LESION_CONNECTIVITY, 18);

    out[0] = lesions.len() as f64;
    out[1] = by_lung[1] as f64;
    out[2] = by_lung[2] as f64;
    out[3] = (out[1] - out[2]).abs();
    for lobe in 1..=5 {
        out[3 + lobe] = by_lobe[lobe] as f64;
    }
    for seg in 1..=18 {
        out[8 + seg] = by_seg[seg] as f64;
    }

    let volumes: Vec<f64> = lesions.counts.iter().map(|&c| c as f64 * VOXEL_ML).collect();
    let n = volumes.len() as f64;
    let mean = volumes.iter().sum::<f64>() / n;
    let var = volumes.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    out[27] = mean;
    out[28] = volumes.iter().copied().fold(0.0, f64::max);
    out[29] = var.sqrt();
    out[30] = volumes.iter().filter(|&&v| v >= large_lesion_ml).count() as f64;
    out
}
