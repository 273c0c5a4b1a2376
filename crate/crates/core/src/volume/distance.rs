//! Exact Euclidean distance transform by three separable passes of the
//! lower envelope of parabolas (Felzenszwalb & Huttenlocher).
//!
//! Squared distances are sums of squared integers and stay exact in `f64`;
//! the envelope breakpoints are only compared against integer positions, so
//! rounding in them cannot change which parabola wins.

use rayon::prelude::*;

use super::{Dims, Mask};
use crate::error::{Error, Result};

/// Euclidean distance (voxel units) from every voxel to the nearest seed.
pub fn distance_transform(seeds: &[[usize; 3]], dims: Dims) -> Result<Vec<f64>> {
    let mut mask = Mask::empty(dims);
    for &[x, y, z] in seeds {
        if x >= dims.x || y >= dims.y || z >= dims.z {
            return Err(Error::invalid(format!("seed {:?} outside grid {dims}", [x, y, z])));
        }
        mask.set(dims.index(x, y, z), true);
    }
    distance_transform_from_mask(&mask)
}

pub fn distance_transform_from_mask(seeds: &Mask) -> Result<Vec<f64>> {
    if seeds.is_empty() {
        return Err(Error::invalid("distance transform needs at least one seed"));
    }
    let mut sq = squared_distance_transform(seeds);
    sq.iter_mut().for_each(|v| *v = v.sqrt());
    Ok(sq)
}

pub(crate) fn squared_distance_transform(seeds: &Mask) -> Vec<f64> {
    let dims = seeds.dims();
    let mut f: Vec<f64> = seeds
        .bits()
        .iter()
        .map(|&b| if b { 0.0 } else { f64::INFINITY })
        .collect();
    let plane = dims.x * dims.y;

    // x and y passes touch one z-slice at a time.
    f.par_chunks_mut(plane).for_each(|slice| {
        let mut env = Envelope::new(dims.x.max(dims.y));
        let mut line = vec![0.0; dims.x.max(dims.y)];
        for row in slice.chunks_mut(dims.x) {
            line[..dims.x].copy_from_slice(row);
            env.transform(&line[..dims.x], row);
        }
        let mut out = vec![0.0; dims.y];
        for x in 0..dims.x {
            for y in 0..dims.y {
                line[y] = slice[x + y * dims.x];
            }
            env.transform(&line[..dims.y], &mut out);
            for y in 0..dims.y {
                slice[x + y * dims.x] = out[y];
            }
        }
    });

    // z pass: gather the x-rows of one y into a small block so the
    // column reads stay in cache.
    let mut env = Envelope::new(dims.z);
    let mut block = vec![0.0; dims.x * dims.z];
    let mut line = vec![0.0; dims.z];
    let mut out = vec![0.0; dims.z];
    for y in 0..dims.y {
        for z in 0..dims.z {
            let src = y * dims.x + z * plane;
            block[z * dims.x..(z + 1) * dims.x].copy_from_slice(&f[src..src + dims.x]);
        }
        for x in 0..dims.x {
            for z in 0..dims.z {
                line[z] = block[z * dims.x + x];
            }
            env.transform(&line, &mut out);
            for z in 0..dims.z {
                block[z * dims.x + x] = out[z];
            }
        }
        for z in 0..dims.z {
            let dst = y * dims.x + z * plane;
            f[dst..dst + dims.x].copy_from_slice(&block[z * dims.x..(z + 1) * dims.x]);
        }
    }
    f
}

struct Envelope {
    vertices: Vec<usize>,
    breaks: Vec<f64>,
}

impl Envelope {
    fn new(n: usize) -> Self {
        Envelope {
            vertices: vec![0; n],
            breaks: vec![0.0; n + 1],
        }
    }

    /// `out[q] = min_p (q - p)^2 + f[p]` over finite `f[p]`.
    fn transform(&mut self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        let v = &mut self.vertices;
        let z = &mut self.breaks;
        let mut k: isize = -1;
        for q in 0..n {
            if !f[q].is_finite() {
                continue;
            }
            let fq = f[q] + (q * q) as f64;
            while k >= 0 {
                let p = v[k as usize];
                let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
                if s <= z[k as usize] {
                    k -= 1;
                } else {
                    break;
                }
            }
            k += 1;
            let ku = k as usize;
            v[ku] = q;
            z[ku] = if ku == 0 {
                f64::NEG_INFINITY
            } else {
                let p = v[ku - 1];
                (fq - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64)
            };
            z[ku + 1] = f64::INFINITY;
        }
        if k < 0 {
            out.iter_mut().for_each(|o| *o = f64::INFINITY);
            return;
        }
        let mut j = 0usize;
        for (q, o) in out.iter_mut().enumerate() {
            while z[j + 1] < q as f64 {
                j += 1;
            }
            let d = q.abs_diff(v[j]) as f64;
            *o = d * d + f[v[j]];
        }
    }
}
