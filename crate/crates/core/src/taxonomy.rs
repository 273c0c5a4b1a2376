//! Fixed hierarchy of the lung fields: 18 pulmonary segments, 5 lobes,
//! 2 lungs.

pub const N_SEGMENTS: usize = 18;
pub const N_LOBES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lung {
    Right,
    Left,
}

/// Lobe codes: 1 right upper, 2 right middle, 3 right lower, 4 left upper,
/// 5 left lower.
pub const fn lobe_of_segment(segment: u8) -> Option<u8> {
    match segment {
        1..=3 => Some(1),
        4..=5 => Some(2),
        6..=10 => Some(3),
        11..=14 => Some(4),
        15..=18 => Some(5),
        _ => None,
    }
}

pub const fn lung_of_lobe(lobe: u8) -> Option<Lung> {
    match lobe {
        1..=3 => Some(Lung::Right),
        4..=5 => Some(Lung::Left),
        _ => None,
    }
}

pub const fn lung_of_segment(segment: u8) -> Option<Lung> {
    match lobe_of_segment(segment) {
        Some(lobe) => lung_of_lobe(lobe),
        None => None,
    }
}

/// Segment range of a lobe, inclusive.
pub const fn segments_of_lobe(lobe: u8) -> (u8, u8) {
    match lobe {
        1 => (1, 3),
        2 => (4, 5),
        3 => (6, 10),
        4 => (11, 14),
        5 => (15, 18),
        _ => (0, 0),
    }
}

/// Per-voxel lobe codes (0 outside the lung) for a segment label array.
pub fn lobe_codes(segments: &[u8]) -> Vec<u8> {
    segments.iter().map(|&s| lobe_of_segment(s).unwrap_or(0)).collect()
}

/// Per-voxel lung codes: 0 outside, 1 left, 2 right.
pub fn lung_codes(segments: &[u8]) -> Vec<u8> {
    segments
        .iter()
        .map(|&s| match lung_of_segment(s) {
            Some(Lung::Left) => 1,
            Some(Lung::Right) => 2,
            None => 0,
        })
        .collect()
}
