use super::components::FACE_OFFSETS;
use super::Mask;

/// Foreground voxels with at least one face neighbour that is background or
/// outside the grid, as `[x, y, z]` in linear-index order.
pub fn boundary_voxels(mask: &Mask) -> Vec<[usize; 3]> {
    let dims = mask.dims();
    boundary_mask(mask).indices().map(|i| dims.coords(i)).collect()
}

pub fn boundary_mask(mask: &Mask) -> Mask {
    let dims = mask.dims();
    let mut out = Mask::empty(dims);
    for i in mask.indices() {
        let c = dims.coords(i);
        let exposed = FACE_OFFSETS
            .iter()
            .any(|&d| dims.offset(c, d).is_none_or(|j| !mask.get(j)));
        if exposed {
            out.set(i, true);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::volume::Dims;
    use rand::{Rng, SeedableRng};

    #[test]
    fn solid_cube_shell() {
        let d = Dims::cube(5);
        let m = Mask::from_fn(d, |x, y, z| (1..4).contains(&x) && (1..4).contains(&y) && (1..4).contains(&z));
        let b = boundary_voxels(&m);
        assert_eq!(b.len(), 26);
        assert!(!b.contains(&[2, 2, 2]));
    }

    #[test]
    fn single_voxel_is_its_own_boundary() {
        let d = Dims::cube(3);
        let m = Mask::from_fn(d, |x, y, z| (x, y, z) == (1, 1, 1));
        assert_eq!(boundary_voxels(&m), vec![[1, 1, 1]]);
    }

    #[test]
    fn full_grid_gives_outer_shell() {
        let d = Dims::new(4, 5, 6);
        let m = Mask::from_fn(d, |_, _, _| true);
        let b = boundary_voxels(&m);
        assert_eq!(b.len(), d.len() - 2 * 3 * 4);
        for [x, y, z] in b {
            assert!(x == 0 || y == 0 || z == 0 || x == 3 || y == 4 || z == 5);
        }
    }

    #[test]
    fn matches_definition_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let d = Dims::new(rng.random_range(4..14), rng.random_range(4..14), rng.random_range(4..14));
            let m = Mask::from_fn(d, |_, _, _| rng.random_bool(0.6));
            let got = boundary_voxels(&m);
            assert_eq!(got, oracle::boundary_scan(&m));
            assert!(got.iter().all(|&[x, y, z]| m.at(x, y, z)));
        }
    }
}
