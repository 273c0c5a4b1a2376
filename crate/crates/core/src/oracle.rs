//! Brute-force reference implementations for the test suites. Each one is
//! written straight from the definition and shares no code with the
//! production path it checks.

use crate::volume::{Connectivity, Dims, LabelMap, Mask, VoxelVolume};

/// Component sizes by flood fill from each unvisited voxel in scan order.
pub fn flood_fill_counts(mask: &Mask, connectivity: Connectivity) -> Vec<usize> {
    let dims = mask.dims();
    let diag = connectivity == Connectivity::TwentySix;
    let inside = |x: i64, y: i64, z: i64| {
        x >= 0 && y >= 0 && z >= 0 && x < dims.x as i64 && y < dims.y as i64 && z < dims.z as i64
    };
    let mut visited = vec![false; dims.len()];
    let mut out = Vec::new();
    for start in 0..dims.len() {
        if !mask.get(start) || visited[start] {
            continue;
        }
        visited[start] = true;
        let mut stack = vec![start];
        let mut n = 0;
        while let Some(i) = stack.pop() {
            n += 1;
            let [x, y, z] = dims.coords(i);
            for dz in -1..=1i64 {
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        let manhattan = dx.abs() + dy.abs() + dz.abs();
                        if manhattan == 0 || (!diag && manhattan > 1) {
                            continue;
                        }
                        let (nx, ny, nz) = (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                        if !inside(nx, ny, nz) {
                            continue;
                        }
                        let j = dims.index(nx as usize, ny as usize, nz as usize);
                        if mask.get(j) && !visited[j] {
                            visited[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        out.push(n);
    }
    out
}

/// Foreground voxels that touch background or the grid edge across a face.
pub fn boundary_scan(mask: &Mask) -> Vec<[usize; 3]> {
    let dims = mask.dims();
    let get = |x: i64, y: i64, z: i64| {
        x >= 0
            && y >= 0
            && z >= 0
            && x < dims.x as i64
            && y < dims.y as i64
            && z < dims.z as i64
            && mask.at(x as usize, y as usize, z as usize)
    };
    let mut out = Vec::new();
    for z in 0..dims.z as i64 {
        for y in 0..dims.y as i64 {
            for x in 0..dims.x as i64 {
                if !get(x, y, z) {
                    continue;
                }
                let neighbours = [
                    get(x - 1, y, z),
                    get(x + 1, y, z),
                    get(x, y - 1, z),
                    get(x, y + 1, z),
                    get(x, y, z - 1),
                    get(x, y, z + 1),
                ];
                if neighbours.iter().any(|&n| !n) {
                    out.push([x as usize, y as usize, z as usize]);
                }
            }
        }
    }
    out
}

/// Minimum Euclidean distance to any seed, computed over all pairs.
pub fn all_pairs_distance(seeds: &[[usize; 3]], dims: Dims) -> Vec<f64> {
    (0..dims.len())
        .map(|i| {
            let [x, y, z] = dims.coords(i);
            seeds
                .iter()
                .map(|s| {
                    let dx = x as f64 - s[0] as f64;
                    let dy = y as f64 - s[1] as f64;
                    let dz = z as f64 - s[2] as f64;
                    (dx * dx + dy * dy + dz * dz).sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// AUC as the fraction of concordant (positive, negative) pairs, ties
/// counting one half.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut twice = 0u64;
    let mut pairs = 0u64;
    for i in 0..scores.len() {
        if !labels[i] {
            continue;
        }
        for j in 0..scores.len() {
            if labels[j] {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                twice += 2;
            } else if scores[i] == scores[j] {
                twice += 1;
            }
        }
    }
    twice as f64 / (2 * pairs) as f64
}

/// Best `(feature, threshold)` by trying every midpoint of every feature and
/// recounting the children from scratch. Ties go to the lower feature, then
/// the lower threshold.
pub fn exhaustive_split(
    x: ndarray::ArrayView2<'_, f64>,
    y: &[bool],
    samples: &[usize],
) -> Option<(usize, f64)> {
    let gini = |pos: f64, n: f64| {
        let p = pos / n;
        1.0 - p * p - (1.0 - p) * (1.0 - p)
    };
    let n = samples.len() as f64;
    let parent_pos = samples.iter().filter(|&&i| y[i]).count() as f64;
    let parent = gini(parent_pos, n);
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..x.ncols() {
        let mut values: Vec<f64> = samples.iter().map(|&i| x[[i, f]]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let (mut nl, mut pl, mut nr, mut pr) = (0.0, 0.0, 0.0, 0.0);
            for &i in samples {
                if x[[i, f]] <= t {
                    nl += 1.0;
                    pl += y[i] as u8 as f64;
                } else {
                    nr += 1.0;
                    pr += y[i] as u8 as f64;
                }
            }
            let decrease = parent - (nl * gini(pl, nl) + nr * gini(pr, nr)) / n;
            if decrease <= 1e-12 {
                continue;
            }
            if best.is_none_or(|(_, _, d)| decrease > d + 1e-12) {
                best = Some((f, t, decrease));
            }
        }
    }
    best.map(|(f, t, _)| (f, t))
}

/// Lobe (1..=5) and lung (0 right, 1 left) of a segment code, from the
/// fixed table: right upper 1-3, right middle 4-5, right lower 6-10, left
/// upper 11-14, left lower 15-18.
fn naive_hierarchy(segment: u8) -> (usize, usize) {
    let lobe = match segment {
        1..=3 => 1,
        4..=5 => 2,
        6..=10 => 3,
        11..=14 => 4,
        _ => 5,
    };
    (lobe, if lobe <= 3 { 0 } else { 1 })
}

/// All 96 features of grids already at 1.5 mm, one voxel loop per quantity.
/// Returns `(values, size_fraction)`.
pub fn naive_features(intensity: &VoxelVolume, infection: &Mask, lungs: &LabelMap, large_ml: f64) -> (Vec<f64>, f64) {
    let dims = lungs.dims();
    let ml = 1.5 * 1.5 * 1.5 / 1000.0;
    let frac = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let infected = |i: usize| infection.get(i) && lungs.get(i) > 0;

    let mut seg_total = [0usize; 19];
    let mut seg_inf = [0usize; 19];
    for i in 0..dims.len() {
        let s = lungs.get(i) as usize;
        if s > 0 {
            seg_total[s] += 1;
            if infected(i) {
                seg_inf[s] += 1;
            }
        }
    }
    let mut lobe_total = [0usize; 6];
    let mut lobe_inf = [0usize; 6];
    let mut side_total = [0usize; 2];
    let mut side_inf = [0usize; 2];
    for s in 1..=18u8 {
        let (lobe, side) = naive_hierarchy(s);
        lobe_total[lobe] += seg_total[s as usize];
        lobe_inf[lobe] += seg_inf[s as usize];
        side_total[side] += seg_total[s as usize];
        side_inf[side] += seg_inf[s as usize];
    }
    let lung_n: usize = seg_total.iter().sum();
    let inf_n: usize = seg_inf.iter().sum();

    let mut v = Vec::with_capacity(96);
    v.push(inf_n as f64 * ml);
    v.push(frac(inf_n, lung_n));
    for lobe in 1..=5 {
        v.push(frac(lobe_inf[lobe], lobe_total[lobe]));
    }
    for s in 1..=18 {
        v.push(frac(seg_inf[s], seg_total[s]));
    }
    v.push((frac(side_inf[1], side_total[1]) - frac(side_inf[0], side_total[0])).abs());

    let region_count = |keep: &dyn Fn(u8) -> bool| {
        let m = Mask::from_fn(dims, |x, y, z| {
            let i = dims.index(x, y, z);
            infected(i) && keep(lungs.get(i))
        });
        flood_fill_counts(&m, Connectivity::TwentySix).len() as f64
    };
    let lesions = flood_fill_counts(&Mask::from_fn(dims, |x, y, z| infected(dims.index(x, y, z))), Connectivity::TwentySix);
    let left = region_count(&|s| s > 0 && naive_hierarchy(s).1 == 1);
    let right = region_count(&|s| s > 0 && naive_hierarchy(s).1 == 0);
    v.push(lesions.len() as f64);
    v.push(left);
    v.push(right);
    v.push((left - right).abs());
    for lobe in 1..=5 {
        v.push(region_count(&|s| s > 0 && naive_hierarchy(s).0 == lobe));
    }
    for seg in 1..=18u8 {
        v.push(region_count(&|s| s == seg));
    }
    if lesions.is_empty() {
        v.extend([0.0; 4]);
    } else {
        let vols: Vec<f64> = lesions.iter().map(|&c| c as f64 * ml).collect();
        let mean = vols.iter().sum::<f64>() / vols.len() as f64;
        let var = vols.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / vols.len() as f64;
        v.push(mean);
        v.push(vols.iter().cloned().fold(0.0, f64::max));
        v.push(var.sqrt());
        v.push(vols.iter().filter(|&&x| x >= large_ml).count() as f64);
    }

    let hu: Vec<f64> = (0..dims.len()).filter(|&i| infected(i)).map(|i| intensity.data()[i] as f64).collect();
    let mut bins = [0.0; 30];
    for &h in &hu {
        let mut b = 0;
        while b < 29 && h >= -1350.0 + 50.0 * (b + 1) as f64 {
            b += 1;
        }
        bins[b] += 1.0;
    }
    if hu.is_empty() {
        v.extend([0.0; 32]);
    } else {
        let n = hu.len() as f64;
        v.extend(bins.iter().map(|c| c / n));
        let mean = hu.iter().sum::<f64>() / n;
        v.push(mean);
        v.push((hu.iter().map(|h| (h - mean) * (h - mean)).sum::<f64>() / n).sqrt());
    }

    let lesion_mask = Mask::from_fn(dims, |x, y, z| infected(dims.index(x, y, z)));
    let surface = boundary_scan(&lesion_mask);
    if surface.is_empty() {
        v.extend([0.0; 7]);
    } else {
        let wall = boundary_scan(&lungs.lung_mask());
        let dist = all_pairs_distance(&wall, dims);
        let mut bands = [0.0; 5];
        for c in &surface {
            let d = dist[dims.index(c[0], c[1], c[2])];
            let edges = [3.0, 6.0, 9.0, 12.0, 15.0];
            if let Some(b) = edges.iter().position(|&e| d <= e) {
                bands[b] += 1.0;
            }
        }
        let banded: f64 = bands.iter().sum();
        v.extend(bands);
        v.push(surface.len() as f64);
        v.push(banded / surface.len() as f64);
    }
    (v, frac(inf_n, lung_n))
}
