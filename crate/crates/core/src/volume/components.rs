use super::{Dims, Mask};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    /// Face neighbours.
    Six,
    /// Face, edge and corner neighbours.
    TwentySix,
}

impl Connectivity {
    pub fn offsets(self) -> &'static [[isize; 3]] {
        match self {
            Connectivity::Six => &FACE_OFFSETS,
            Connectivity::TwentySix => &ALL_OFFSETS,
        }
    }
}

pub(crate) const FACE_OFFSETS: [[isize; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

const ALL_OFFSETS: [[isize; 3]; 26] = {
    let mut out = [[0isize; 3]; 26];
    let mut n = 0;
    let mut dz = -1;
    while dz <= 1 {
        let mut dy = -1;
        while dy <= 1 {
            let mut dx = -1;
            while dx <= 1 {
                if dx != 0 || dy != 0 || dz != 0 {
                    out[n] = [dx, dy, dz];
                    n += 1;
                }
                dx += 1;
            }
            dy += 1;
        }
        dz += 1;
    }
    out
};

/// Component labelling of a binary mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// 0 for background, 1..=K for components, numbered in scan order of
    /// their first voxel.
    pub labels: Vec<u32>,
    /// Voxel count of component `k` at position `k - 1`.
    pub counts: Vec<usize>,
}

impl Components {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

pub fn connected_components(mask: &Mask, connectivity: Connectivity) -> Components {
    label_where(mask.dims(), connectivity, |i| mask.get(i), |_, _| true)
}

/// Number of components of `mask ∩ {key == r}` for every key value `r`.
///
/// Voxels are joined only when they share a key, which is the same as
/// labelling each intersected mask separately. Keys of 0 are ignored.
pub fn component_counts_by_region(
    mask: &Mask,
    keys: &[u8],
    connectivity: Connectivity,
    n_keys: usize,
) -> Vec<usize> {
    assert_eq!(keys.len(), mask.dims().len(), "key volume does not match mask");
    let comps = label_where(
        mask.dims(),
        connectivity,
        |i| mask.get(i) && keys[i] != 0,
        |a, b| keys[a] == keys[b],
    );
    let mut seen = vec![false; comps.counts.len() + 1];
    let mut counts = vec![0usize; n_keys + 1];
    for (i, &label) in comps.labels.iter().enumerate() {
        if label != 0 && !seen[label as usize] {
            seen[label as usize] = true;
            counts[keys[i] as usize] += 1;
        }
    }
    counts
}

fn label_where(
    dims: Dims,
    connectivity: Connectivity,
    inside: impl Fn(usize) -> bool,
    joins: impl Fn(usize, usize) -> bool,
) -> Components {
    let offsets = connectivity.offsets();
    let mut labels = vec![0u32; dims.len()];
    let mut counts = Vec::new();
    let mut stack = Vec::new();
    for start in 0..dims.len() {
        if labels[start] != 0 || !inside(start) {
            continue;
        }
        let label = counts.len() as u32 + 1;
        labels[start] = label;
        stack.push(start);
        let mut size = 0usize;
        while let Some(i) = stack.pop() {
            size += 1;
            let c = dims.coords(i);
            for &d in offsets {
                if let Some(j) = dims.offset(c, d) {
                    if labels[j] == 0 && inside(j) && joins(i, j) {
                        labels[j] = label;
                        stack.push(j);
                    }
                }
            }
        }
        counts.push(size);
    }
    Components { labels, counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_voxel() {
        let mut m = Mask::empty(Dims::cube(4));
        m.set(Dims::cube(4).index(1, 2, 3), true);
        let c = connected_components(&m, Connectivity::TwentySix);
        assert_eq!(c.counts, vec![1]);
    }

    #[test]
    fn corner_contact_depends_on_connectivity() {
        let d = Dims::cube(3);
        let mut m = Mask::empty(d);
        m.set(d.index(0, 0, 0), true);
        m.set(d.index(1, 1, 1), true);
        assert_eq!(connected_components(&m, Connectivity::TwentySix).len(), 1);
        assert_eq!(connected_components(&m, Connectivity::Six).len(), 2);
    }

    #[test]
    fn empty_mask_has_no_components() {
        let c = connected_components(&Mask::empty(Dims::cube(5)), Connectivity::Six);
        assert!(c.is_empty());
        assert!(c.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn matches_flood_fill_on_random_masks() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..50 {
            let d = Dims::cube(16);
            let p = rng.random_range(0.1..0.5);
            let m = Mask::from_fn(d, |_, _, _| rng.random_bool(p));
            for conn in [Connectivity::Six, Connectivity::TwentySix] {
                let ours = connected_components(&m, conn);
                let mut got = ours.counts.clone();
                let mut want = oracle::flood_fill_counts(&m, conn);
                got.sort_unstable();
                want.sort_unstable();
                assert_eq!(got, want, "trial {trial} {conn:?}");
                assert_eq!(got.iter().sum::<usize>(), m.count());
            }
        }
    }

    #[test]
    fn region_counts_match_intersected_masks() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let d = Dims::cube(12);
        for _ in 0..10 {
            let m = Mask::from_fn(d, |_, _, _| rng.random_bool(0.3));
            let keys: Vec<u8> = (0..d.len()).map(|_| rng.random_range(0..4)).collect();
            let got = component_counts_by_region(&m, &keys, Connectivity::TwentySix, 3);
            for r in 1..=3u8 {
                let region = Mask::from_bits(d, keys.iter().map(|&k| k == r).collect()).unwrap();
                let want = oracle::flood_fill_counts(&m.and(&region), Connectivity::TwentySix).len();
                assert_eq!(got[r as usize], want);
            }
        }
    }

    proptest! {
        // Relabelling a reflected mask yields the same partition sizes.
        #[test]
        fn partition_independent_of_scan_order(bits in proptest::collection::vec(any::<bool>(), 6 * 5 * 4)) {
            let d = Dims::new(6, 5, 4);
            let m = Mask::from_bits(d, bits).unwrap();
            let flipped = Mask::from_fn(d, |x, y, z| m.at(d.x - 1 - x, d.y - 1 - y, d.z - 1 - z));
            for conn in [Connectivity::Six, Connectivity::TwentySix] {
                let mut a = connected_components(&m, conn).counts;
                let mut b = connected_components(&flipped, conn).counts;
                a.sort_unstable();
                b.sort_unstable();
                prop_assert_eq!(a, b);
            }
        }
    }
}
