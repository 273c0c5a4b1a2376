use crate::error::{Error, Result};
use crate::volume::Dims;

/// Number of designed size regimes, separated by three breakpoints.
pub const N_REGIMES: usize = 4;

/// Class-conditional generator knobs. Entries indexed by regime apply to
/// subjects whose size target falls in that regime.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProfile {
    /// Poisson mean of the lesion count (at least one lesion is placed).
    pub lesion_count_mean: [f64; N_REGIMES],
    pub bilateral_prob: [f64; N_REGIMES],
    pub peripheral_prob: [f64; N_REGIMES],
    /// Mean HU of a subject's lesions.
    pub hu_mean: [f64; N_REGIMES],
    /// Spread of the per-subject lesion mean around `hu_mean`.
    pub hu_subject_sd: f64,
    pub hu_voxel_sd: f64,
    /// Extra HU at a lesion's centre, fading linearly to its rim.
    pub core_boost: f64,
    /// Relative frequency of each size regime.
    pub size_weights: [f64; N_REGIMES],
}

impl ClassProfile {
    fn check(&self, name: &str) -> Result<()> {
        let probs = self.bilateral_prob.iter().chain(&self.peripheral_prob);
        if probs.clone().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid(format!("{name}: probabilities must lie in [0, 1]")));
        }
        if self.lesion_count_mean.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
            return Err(Error::invalid(format!("{name}: lesion count means must be non-negative")));
        }
        if self.size_weights.iter().any(|&w| !(w >= 0.0)) || self.size_weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::invalid(format!("{name}: size weights must be non-negative with a positive sum")));
        }
        if !(self.hu_subject_sd >= 0.0 && self.hu_voxel_sd >= 0.0) {
            return Err(Error::invalid(format!("{name}: HU spreads must be non-negative")));
        }
        Ok(())
    }

    fn average(a: &Self, b: &Self) -> Self {
        let mid = |x: [f64; N_REGIMES], y: [f64; N_REGIMES]| std::array::from_fn(|r| (x[r] + y[r]) / 2.0);
        ClassProfile {
            lesion_count_mean: mid(a.lesion_count_mean, b.lesion_count_mean),
            bilateral_prob: mid(a.bilateral_prob, b.bilateral_prob),
            peripheral_prob: mid(a.peripheral_prob, b.peripheral_prob),
            hu_mean: mid(a.hu_mean, b.hu_mean),
            hu_subject_sd: (a.hu_subject_sd + b.hu_subject_sd) / 2.0,
            hu_voxel_sd: (a.hu_voxel_sd + b.hu_voxel_sd) / 2.0,
            core_boost: (a.core_boost + b.core_boost) / 2.0,
            size_weights: mid(a.size_weights, b.size_weights),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortConfig {
    pub n_subjects: usize,
    pub covid_fraction: f64,
    pub dims: Dims,
    pub spacing_mm: f64,
    pub seed: u64,
    /// Size-regime boundaries as infection fractions.
    pub breakpoints: [f64; N_REGIMES - 1],
    /// Size targets stay this factor away from every breakpoint.
    pub breakpoint_margin: f64,
    pub min_size: f64,
    pub max_size: f64,
    pub background_hu: (f64, f64),
    pub covid: ClassProfile,
    pub cap: ClassProfile,
}

impl Default for CohortConfig {
    /// Size-dependent signatures: in the second regime (between the first
    /// two breakpoints) the class patterns of bilaterality, peripherality
    /// and lesion density are reversed.
    fn default() -> Self {
        let flip = |a: f64, b: f64| [a, b, a, a];
        CohortConfig {
            covid: ClassProfile {
                lesion_count_mean: [2.5; N_REGIMES],
                bilateral_prob: flip(0.8, 0.1),
                peripheral_prob: flip(0.85, 0.2),
                hu_mean: flip(-425.0, -675.0),
                hu_subject_sd: 80.0,
                hu_voxel_sd: 100.0,
                core_boost: 60.0,
                size_weights: [0.06, 0.22, 0.36, 0.36],
            },
            cap: ClassProfile {
                lesion_count_mean: [2.5; N_REGIMES],
                bilateral_prob: flip(0.1, 0.8),
                peripheral_prob: flip(0.2, 0.85),
                hu_mean: flip(-675.0, -425.0),
                hu_subject_sd: 80.0,
                hu_voxel_sd: 100.0,
                core_boost: 60.0,
                size_weights: [0.40, 0.35, 0.20, 0.05],
            },
            ..CohortConfig::uniform_signatures()
        }
    }
}

impl CohortConfig {
    /// Class patterns that do not depend on infection size: COVID lesions
    /// are more numerous, bilateral, peripheral and ground-glass with denser
    /// cores; CAP lesions are few, unilateral and consolidated.
    pub fn uniform_signatures() -> Self {
        CohortConfig {
            n_subjects: 100,
            covid_fraction: 0.6,
            dims: Dims::cube(64),
            spacing_mm: 1.5,
            seed: 0,
            breakpoints: [1e-4, 3e-3, 7e-2],
            breakpoint_margin: 1.15,
            min_size: 2e-5,
            max_size: 0.5,
            background_hu: (-850.0, 50.0),
            covid: ClassProfile {
                lesion_count_mean: [4.0; N_REGIMES],
                bilateral_prob: [0.8; N_REGIMES],
                peripheral_prob: [0.8; N_REGIMES],
                hu_mean: [-650.0; N_REGIMES],
                hu_subject_sd: 0.0,
                hu_voxel_sd: 100.0,
                core_boost: 150.0,
                size_weights: [0.06, 0.22, 0.36, 0.36],
            },
            cap: ClassProfile {
                lesion_count_mean: [1.2; N_REGIMES],
                bilateral_prob: [0.15; N_REGIMES],
                peripheral_prob: [0.4; N_REGIMES],
                hu_mean: [-300.0; N_REGIMES],
                hu_subject_sd: 0.0,
                hu_voxel_sd: 120.0,
                core_boost: 0.0,
                size_weights: [0.40, 0.35, 0.20, 0.05],
            },
        }
    }

    /// Negative control: both classes share one averaged profile, so labels
    /// carry no information about the images.
    pub fn null_effect(mut self) -> Self {
        let shared = ClassProfile::average(&self.covid, &self.cap);
        self.covid = shared.clone();
        self.cap = shared;
        self
    }

    pub fn profile(&self, covid: bool) -> &ClassProfile {
        if covid {
            &self.covid
        } else {
            &self.cap
        }
    }

    /// Size-target interval `[lo, hi]` of a regime.
    pub fn regime_bounds(&self, regime: usize) -> (f64, f64) {
        let lo = if regime == 0 {
            self.min_size
        } else {
            self.breakpoints[regime - 1] * self.breakpoint_margin
        };
        let hi = if regime == N_REGIMES - 1 {
            self.max_size
        } else {
            self.breakpoints[regime] / self.breakpoint_margin
        };
        (lo, hi)
    }

    pub fn regime_of(&self, size: f64) -> usize {
        self.breakpoints.iter().filter(|&&b| b <= size).count()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.covid_fraction) {
            return Err(Error::invalid("covid fraction must lie in [0, 1]"));
        }
        let d = self.dims;
        if d.x < super::MIN_DIM || d.y < super::MIN_DIM || d.z < super::MIN_DIM {
            return Err(Error::invalid(format!("grid must be at least {0}³, got {d}", super::MIN_DIM)));
        }
        if !(self.spacing_mm > 0.0 && self.spacing_mm.is_finite()) {
            return Err(Error::invalid("spacing must be positive"));
        }
        if !(self.breakpoint_margin >= 1.0) {
            return Err(Error::invalid("breakpoint margin must be at least 1"));
        }
        let mut edges = vec![self.min_size];
        edges.extend(self.breakpoints);
        edges.push(self.max_size);
        if !(self.min_size > 0.0 && self.max_size <= 0.6) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("size bounds and breakpoints must increase inside (0, 0.6]"));
        }
        if (0..N_REGIMES).any(|r| {
            let (lo, hi) = self.regime_bounds(r);
            lo >= hi
        }) {
            return Err(Error::invalid("breakpoint margin leaves an empty size regime"));
        }
        self.covid.check("COVID profile")?;
        self.cap.check("CAP profile")
    }
}
