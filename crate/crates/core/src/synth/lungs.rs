//! Two jittered ellipsoidal lungs cut into 18 segments by axial and coronal
//! planes.

use rand::Rng;

use crate::error::{Error, Result};
use crate::volume::{Dims, LabelMap, Mask};

pub const MIN_DIM: usize = 32;

/// Segment code of a point in a lung's normalised frame. `v` runs
/// anterior (−1) to posterior (+1) and `w` inferior (−1) to superior (+1).
fn segment_code(right: bool, v: f64, w: f64) -> u8 {
    let bin = |k: usize, lo: f64, hi: f64| -> u8 {
        let t = ((v - lo) / (hi - lo) * k as f64).floor();
        t.clamp(0.0, (k - 1) as f64) as u8
    };
    if right {
        if w > 0.33 {
            1 + bin(3, -1.0, 1.0)
        } else if w > -0.2 && v < 0.0 {
            4 + bin(2, -1.0, 0.0)
        } else {
            6 + bin(5, -1.0, 1.0)
        }
    } else if w > 0.0 {
        11 + bin(4, -1.0, 1.0)
    } else {
        15 + bin(4, -1.0, 1.0)
    }
}

/// Lung-field label map and its lung mask.
pub fn generate_lung_fields<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> Result<(LabelMap, Mask)> {
    if dims.x < MIN_DIM || dims.y < MIN_DIM || dims.z < MIN_DIM {
        return Err(Error::invalid(format!("lung fields need at least {MIN_DIM}³ voxels, got {dims}")));
    }
    let (fx, fy, fz) = (dims.x as f64, dims.y as f64, dims.z as f64);
    let mut centre = |v: f64| v * rng.random_range(0.98..1.02);
    let c_right = [centre(0.28 * fx), centre(0.5 * fy), centre(0.5 * fz)];
    let c_left = [centre(0.72 * fx), centre(0.5 * fy), centre(0.5 * fz)];
    let mut axis = |v: f64| v * rng.random_range(0.94..1.06);
    // (right?, centre, semi-axes); the left lung is a little smaller.
    let lungs = [
        (true, c_right, [axis(0.19 * fx), axis(0.34 * fy), axis(0.42 * fz)]),
        (false, c_left, [axis(0.18 * fx), axis(0.33 * fy), axis(0.41 * fz)]),
    ];
    let mut codes = vec![0u8; dims.len()];
    for (i, code) in codes.iter_mut().enumerate() {
        let [x, y, z] = dims.coords(i);
        let p = [x as f64 + 0.5, y as f64 + 0.5, z as f64 + 0.5];
        for (right, c, a) in &lungs {
            let u = (p[0] - c[0]) / a[0];
            let v = (p[1] - c[1]) / a[1];
            let w = (p[2] - c[2]) / a[2];
            if u * u + v * v + w * w <= 1.0 {
                *code = segment_code(*right, v, w);
                break;
            }
        }
    }
    let labels = LabelMap::from_codes(dims, codes)?;
    let mask = labels.lung_mask();
    Ok((labels, mask))
}
