//! One synthetic subject: lesions grown inside generated lung fields.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Normal, Poisson};

use super::config::{CohortConfig, N_REGIMES};
use super::lungs::generate_lung_fields;
use crate::error::{Error, Result};
use crate::features::{Label, SubjectRecord};
use crate::taxonomy::{lung_of_segment, Lung};
use crate::volume::distance::squared_distance_transform;
use crate::volume::{boundary_mask, connected_components, Connectivity, Dims, LabelMap, Mask, VoxelVolume};

pub const MAX_SIZE_TARGET: f64 = 0.6;
pub const MAX_GROWTH_ITERATIONS: usize = 50;
/// Wall distance (voxels) within which a voxel counts as peripheral.
pub const PERIPHERAL_DEPTH: f64 = 3.0;
/// Central lesions are seeded at least this deep.
const CENTRAL_DEPTH: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub id: String,
    pub label: Label,
    pub size_target: f64,
    pub regime: usize,
    pub achieved_fraction: f64,
    /// 26-connected components of the infection mask.
    pub lesion_count: usize,
    pub bilateral: bool,
    /// Share of infected voxels within 3 voxels of the lung wall.
    pub peripherality: f64,
}

#[derive(Debug, Clone)]
struct Lesion {
    centre: [f64; 3],
    scale: [f64; 3],
    waves: [([f64; 3], f64); 3],
    candidates: Vec<usize>,
}

impl Lesion {
    /// Ellipsoidal distance perturbed by a smooth random field.
    fn distance(&self, p: [f64; 3]) -> f64 {
        let mut r2 = 0.0;
        for a in 0..3 {
            r2 += ((p[a] - self.centre[a]) / self.scale[a]).powi(2);
        }
        let wobble: f64 = self
            .waves
            .iter()
            .map(|(k, phase)| (k[0] * p[0] + k[1] * p[1] + k[2] * p[2] + phase).cos())
            .sum::<f64>()
            / 3.0;
        r2.sqrt() * (1.0 + 0.25 * wobble)
    }

    /// Candidates ordered by distance from the centre, ties by index.
    fn ranked(&self, dims: Dims) -> Vec<(usize, f64)> {
        let mut d: Vec<(usize, f64)> = self
            .candidates
            .iter()
            .map(|&i| {
                let [x, y, z] = dims.coords(i);
                (i, self.distance([x as f64, y as f64, z as f64]))
            })
            .collect();
        d.sort_unstable_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        d
    }
}

fn pick<R: Rng + ?Sized>(rng: &mut R, pool: &[usize]) -> usize {
    pool[rng.random_range(0..pool.len())]
}

/// Generates one subject with roughly `size_target` of its lung infected.
pub fn generate_subject<R: Rng + ?Sized>(
    id: &str,
    label: Label,
    size_target: f64,
    config: &CohortConfig,
    rng: &mut R,
) -> Result<(SubjectRecord, GroundTruth)> {
    if !(0.0..=MAX_SIZE_TARGET).contains(&size_target) {
        return Err(Error::invalid(format!("size target {size_target} outside [0, {MAX_SIZE_TARGET}]")));
    }
    let dims = config.dims;
    let (lungs, lung_mask) = generate_lung_fields(dims, rng)?;
    let wall_sq = squared_distance_transform(&boundary_mask(&lung_mask));
    let side = |i: usize| lung_of_segment(lungs.get(i));
    let lung_voxels: Vec<usize> = lung_mask.indices().collect();
    let by_side = |s: Lung| -> Vec<usize> { lung_voxels.iter().copied().filter(|&i| side(i) == Some(s)).collect() };
    let sides = [by_side(Lung::Right), by_side(Lung::Left)];

    let regime = config.regime_of(size_target).min(N_REGIMES - 1);
    let profile = config.profile(label.is_positive());
    let budget = if size_target > 0.0 {
        ((size_target * lung_voxels.len() as f64).round() as usize).max(1)
    } else {
        0
    };

    // Placement.
    let count_mean = profile.lesion_count_mean[regime];
    let drawn = if count_mean > 0.0 {
        Poisson::new(count_mean).map_err(|e| Error::invalid(e.to_string()))?.sample(rng) as usize
    } else {
        0
    };
    let n_lesions = drawn.max(1).min(budget.max(1));
    let bilateral = n_lesions > 1 && rng.random_bool(profile.bilateral_prob[regime]);
    let first_side = if rng.random_bool(sides[0].len() as f64 / lung_voxels.len() as f64) { 0 } else { 1 };
    // A single lung cannot hold much more than 80% of itself.
    let spread = bilateral || budget as f64 > 0.8 * sides[first_side].len() as f64;
    let mut lesions = Vec::with_capacity(n_lesions);
    let mut shares = Vec::with_capacity(n_lesions);
    for l in 0..n_lesions {
        let s = if spread && n_lesions > 1 { (first_side + l) % 2 } else { first_side };
        let peripheral = rng.random_bool(profile.peripheral_prob[regime]);
        let pool: Vec<usize> = sides[s]
            .iter()
            .copied()
            .filter(|&i| {
                if peripheral {
                    wall_sq[i] <= PERIPHERAL_DEPTH * PERIPHERAL_DEPTH
                } else {
                    wall_sq[i] >= CENTRAL_DEPTH * CENTRAL_DEPTH
                }
            })
            .collect();
        let seed = if pool.is_empty() { pick(rng, &sides[s]) } else { pick(rng, &pool) };
        let [x, y, z] = dims.coords(seed);
        let mut wave = || {
            let k: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.6..0.6));
            (k, rng.random_range(0.0..std::f64::consts::TAU))
        };
        let waves = [wave(), wave(), wave()];
        // Near-total targets may need both lungs for one lesion.
        let candidates = if budget >= lung_voxels.len() / 2 { lung_voxels.clone() } else { sides[s].clone() };
        lesions.push(Lesion {
            centre: [x as f64, y as f64, z as f64],
            scale: [1.0, rng.random_range(0.6..1.4), rng.random_range(0.6..1.4)],
            waves,
            candidates,
        });
        let e: f64 = Exp1.sample(rng);
        shares.push(e + 0.05);
    }
    let total_share: f64 = shares.iter().sum();

    // Growth: enlarge every lesion until the union reaches the budget.
    let mut infection = Mask::empty(dims);
    let mut core = vec![0.0f64; dims.len()];
    if budget > 0 {
        let ranked: Vec<Vec<(usize, f64)>> = lesions.iter().map(|l| l.ranked(dims)).collect();
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_GROWTH_ITERATIONS {
            infection = Mask::empty(dims);
            core.iter_mut().for_each(|c| *c = 0.0);
            for (order, share) in ranked.iter().zip(&shares) {
                let k = ((budget as f64 * share / total_share * scale).round() as usize).clamp(1, order.len());
                let grown = &order[..k];
                let reach = grown[k - 1].1.max(1e-9);
                for &(i, d) in grown {
                    infection.set(i, true);
                    core[i] = core[i].max(1.0 - d / reach);
                }
            }
            let got = infection.count();
            let tol = (budget as f64 * 0.02).max(1.0);
            if (got as f64 - budget as f64).abs() <= tol {
                accepted = true;
                break;
            }
            scale *= budget as f64 / got as f64;
        }
        let got = infection.count() as f64;
        if !accepted && !(got >= budget as f64 / 2.0 && got <= budget as f64 * 2.0) {
            return Err(Error::Numerical(format!(
                "subject {id}: could not reach {budget} infected voxels (got {got})"
            )));
        }
    }

    // Intensities.
    let noise = |sd: f64| Normal::new(0.0, sd).map_err(|e| Error::invalid(e.to_string()));
    let subject_mean = profile.hu_mean[regime] + noise(profile.hu_subject_sd)?.sample(rng);
    let voxel = noise(profile.hu_voxel_sd)?;
    let background = Normal::new(config.background_hu.0, config.background_hu.1).map_err(|e| Error::invalid(e.to_string()))?;
    let tissue = noise(30.0)?;
    let mut hu = vec![0f32; dims.len()];
    for (i, v) in hu.iter_mut().enumerate() {
        let value = if infection.get(i) {
            subject_mean + profile.core_boost * core[i] + voxel.sample(rng)
        } else if lung_mask.get(i) {
            background.sample(rng)
        } else {
            40.0 + tissue.sample(rng)
        };
        *v = value.round().clamp(-1024.0, 3071.0) as f32;
    }

    let truth = ground_truth(id, label, size_target, regime, &infection, &lungs, &wall_sq);
    let spacing = [config.spacing_mm; 3];
    let record = SubjectRecord {
        id: id.to_string(),
        label: Some(label),
        intensity: VoxelVolume::intensity(dims, spacing, hu)?,
        infection: VoxelVolume::from_mask(&infection, spacing),
        lung_labels: VoxelVolume::from_labels(&lungs, spacing),
    };
    Ok((record, truth))
}

fn ground_truth(
    id: &str,
    label: Label,
    size_target: f64,
    regime: usize,
    infection: &Mask,
    lungs: &LabelMap,
    wall_sq: &[f64],
) -> GroundTruth {
    let n = infection.count();
    let mut in_side = [false; 2];
    let mut peripheral = 0usize;
    for i in infection.indices() {
        match lung_of_segment(lungs.get(i)) {
            Some(Lung::Right) => in_side[0] = true,
            Some(Lung::Left) => in_side[1] = true,
            None => {}
        }
        if wall_sq[i] <= PERIPHERAL_DEPTH * PERIPHERAL_DEPTH {
            peripheral += 1;
        }
    }
    GroundTruth {
        id: id.to_string(),
        label,
        size_target,
        regime,
        achieved_fraction: n as f64 / lungs.lung_count() as f64,
        lesion_count: connected_components(infection, Connectivity::TwentySix).len(),
        bilateral: in_side[0] && in_side[1],
        peripherality: if n == 0 { 0.0 } else { peripheral as f64 / n as f64 },
    }
}
