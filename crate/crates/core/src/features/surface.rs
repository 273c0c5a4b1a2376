//! Distance of the infection surface to the lung wall, in five 3-voxel
//! bands.

use super::manifest::N_SURFACE;
use crate::error::{Error, Result};
use crate::volume::{boundary_mask, distance::squared_distance_transform, LabelMap, Mask};

/// Upper edges of the distance bands in voxels; the first band is closed at 0.
pub const BAND_EDGES: [u32; 5] = [3, 6, 9, 12, 15];

/// Band (0-based) of a squared voxel distance, if within 15 voxels.
pub fn band_of_squared(sq: f64) -> Option<usize> {
    BAND_EDGES
        .iter()
        .position(|&edge| sq <= (edge * edge) as f64)
}

/// `surf_cnt_band_1..5, surf_total, surf_peripheral_frac`.
pub fn surface_features(infection: &Mask, lungs: &LabelMap) -> Result<[f64; N_SURFACE]> {
    let lung = lungs.lung_mask();
    if lung.is_empty() {
        return Err(Error::invalid("lung map is empty"));
    }
    let mut out = [0.0; N_SURFACE];
    let lesion_surface = boundary_mask(&infection.and(&lung));
    let total = lesion_surface.count();
    if total == 0 {
        return Ok(out);
    }
    let wall_sq = squared_distance_transform(&boundary_mask(&lung));
    let mut banded = 0usize;
    for i in lesion_surface.indices() {
        if let Some(b) = band_of_squared(wall_sq[i]) {
            out[b] += 1.0;
            banded += 1;
        }
    }
    out[5] = total as f64;
    out[6] = banded as f64 / total as f64;
    Ok(out)
}
