use super::{Dims, VolumeKind, VoxelVolume};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Nearest,
    Trilinear,
}

/// Resamples onto an isotropic grid of `target` mm voxels.
///
/// Output voxel centres sit at `(i + 0.5) * target` mm from the grid origin,
/// so a volume already at the target spacing maps onto itself.
pub fn resample_isotropic(vol: &VoxelVolume, target: f64, mode: Interpolation) -> Result<VoxelVolume> {
    if !target.is_finite() || target <= 0.0 {
        return Err(Error::invalid(format!("target spacing must be positive, got {target}")));
    }
    if mode == Interpolation::Trilinear && vol.kind() != VolumeKind::Intensity {
        return Err(Error::invalid(format!(
            "trilinear interpolation is not defined for a {} volume",
            vol.kind().as_str()
        )));
    }
    let in_dims = vol.dims().as_array();
    let spacing = vol.spacing();
    if spacing.iter().all(|&s| s == target) {
        return Ok(vol.clone());
    }

    let mut out = [0usize; 3];
    for a in 0..3 {
        out[a] = ((in_dims[a] as f64 * spacing[a] / target).round() as usize).max(1);
    }
    let out_dims = Dims::new(out[0], out[1], out[2]);

    // Continuous source coordinate of every output index, per axis.
    let source: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            let max = (in_dims[a] - 1) as f64;
            (0..out[a])
                .map(|i| ((i as f64 + 0.5) * target / spacing[a] - 0.5).clamp(0.0, max))
                .collect()
        })
        .collect();

    let src = vol.data();
    let in_d = vol.dims();
    let mut data = Vec::with_capacity(out_dims.len());
    match mode {
        Interpolation::Nearest => {
            let idx: Vec<Vec<usize>> = source
                .iter()
                .map(|axis| axis.iter().map(|&c| c.round() as usize).collect())
                .collect();
            for &z in &idx[2] {
                for &y in &idx[1] {
                    for &x in &idx[0] {
                        data.push(src[in_d.index(x, y, z)]);
                    }
                }
            }
        }
        Interpolation::Trilinear => {
            let split = |c: f64, n: usize| {
                let i0 = (c.floor() as usize).min(n - 1);
                let i1 = (i0 + 1).min(n - 1);
                (i0, i1, c - i0 as f64)
            };
            for &cz in &source[2] {
                let (z0, z1, tz) = split(cz, in_d.z);
                for &cy in &source[1] {
                    let (y0, y1, ty) = split(cy, in_d.y);
                    for &cx in &source[0] {
                        let (x0, x1, tx) = split(cx, in_d.x);
                        let v = |x, y, z| src[in_d.index(x, y, z)] as f64;
                        let lerp = |a: f64, b: f64, t: f64| if t == 0.0 { a } else { a + (b - a) * t };
                        let c00 = lerp(v(x0, y0, z0), v(x1, y0, z0), tx);
                        let c10 = lerp(v(x0, y1, z0), v(x1, y1, z0), tx);
                        let c01 = lerp(v(x0, y0, z1), v(x1, y0, z1), tx);
                        let c11 = lerp(v(x0, y1, z1), v(x1, y1, z1), tx);
                        let c0 = lerp(c00, c10, ty);
                        let c1 = lerp(c01, c11, ty);
                        data.push(lerp(c0, c1, tz) as f32);
                    }
                }
            }
        }
    }
    VoxelVolume::new(out_dims, [target; 3], vol.kind(), vol.dtype(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::DType;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn labels_of(v: &VoxelVolume) -> BTreeSet<i32> {
        v.data().iter().map(|&x| x as i32).collect()
    }

    #[test]
    fn identity_at_target_spacing() {
        let d = Dims::new(3, 4, 2);
        let v = VoxelVolume::intensity(d, [1.5; 3], (0..24).map(|i| i as f32).collect()).unwrap();
        assert_eq!(resample_isotropic(&v, 1.5, Interpolation::Trilinear).unwrap(), v);
        assert_eq!(resample_isotropic(&v, 1.5, Interpolation::Nearest).unwrap(), v);
    }

    #[test]
    fn upsampled_mask_keeps_labels() {
        let d = Dims::cube(8);
        let data: Vec<f32> = (0..d.len()).map(|i| (i % 3 == 0) as u8 as f32).collect();
        let v = VoxelVolume::new(d, [3.0; 3], VolumeKind::Mask, DType::UInt8, data).unwrap();
        let r = resample_isotropic(&v, 1.5, Interpolation::Nearest).unwrap();
        assert_eq!(r.dims(), Dims::cube(16));
        assert_eq!(r.spacing(), [1.5; 3]);
        assert_eq!(labels_of(&r), labels_of(&v));
        // Each source voxel becomes a 2x2x2 block.
        assert_eq!(r.get(5, 3, 1), v.get(2, 1, 0));
    }

    #[test]
    fn constant_stays_constant() {
        let d = Dims::new(5, 3, 4);
        let v = VoxelVolume::intensity(d, [0.8, 1.1, 2.5], vec![-612.0; d.len()]).unwrap();
        let r = resample_isotropic(&v, 1.5, Interpolation::Trilinear).unwrap();
        assert_eq!(r.dims(), Dims::new(3, 2, 7));
        assert!(r.data().iter().all(|&x| x == -612.0));
    }

    #[test]
    fn rejects_trilinear_labels_and_bad_target() {
        let d = Dims::cube(2);
        let v = VoxelVolume::new(d, [1.0; 3], VolumeKind::Labels, DType::UInt8, vec![3.0; 8]).unwrap();
        assert!(resample_isotropic(&v, 1.5, Interpolation::Trilinear).is_err());
        assert!(resample_isotropic(&v, 0.0, Interpolation::Nearest).is_err());
        assert!(resample_isotropic(&v, 1.5, Interpolation::Nearest).is_ok());
    }

    proptest! {
        #[test]
        fn nearest_never_invents_labels(
            codes in proptest::collection::vec(0u8..=18, 27),
            sx in 0.5f64..4.0, sz in 0.5f64..4.0,
        ) {
            let v = VoxelVolume::new(
                Dims::cube(3), [sx, 1.2, sz], VolumeKind::Labels, DType::UInt8,
                codes.iter().map(|&c| c as f32).collect(),
            ).unwrap();
            let r = resample_isotropic(&v, 1.5, Interpolation::Nearest).unwrap();
            prop_assert!(labels_of(&r).is_subset(&labels_of(&v)));
        }
    }
}
