//! Voxel container and the geometric kernels every feature depends on.

mod boundary;
mod components;
pub(crate) mod distance;
mod resample;
pub mod svol;

pub use boundary::{boundary_mask, boundary_voxels};
pub use components::{
    component_counts_by_region, connected_components, Components, Connectivity,
};
pub use distance::{distance_transform, distance_transform_from_mask};
pub use resample::{resample_isotropic, Interpolation};

use crate::error::{Error, Result};

/// Voxel counts along x, y, z. Linear indices are x-fastest, z-slowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Dims {
    pub const fn new(x: usize, y: usize, z: usize) -> Self {
        Dims { x, y, z }
    }

    pub const fn cube(n: usize) -> Self {
        Dims { x: n, y: n, z: n }
    }

    pub const fn len(&self) -> usize {
        self.x * self.y * self.z
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub const fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.x * (y + self.y * z)
    }

    #[inline]
    pub const fn coords(&self, i: usize) -> [usize; 3] {
        let x = i % self.x;
        let yz = i / self.x;
        [x, yz % self.y, yz / self.y]
    }

    pub const fn as_array(&self) -> [usize; 3] {
        [self.x, self.y, self.z]
    }

    /// Linear index of the neighbour at `offset`, or `None` outside the grid.
    #[inline]
    pub fn offset(&self, c: [usize; 3], d: [isize; 3]) -> Option<usize> {
        let x = c[0].checked_add_signed(d[0]).filter(|&v| v < self.x)?;
        let y = c[1].checked_add_signed(d[1]).filter(|&v| v < self.y)?;
        let z = c[2].checked_add_signed(d[2]).filter(|&v| v < self.z)?;
        Some(self.index(x, y, z))
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeKind {
    /// CT intensities in Hounsfield units.
    Intensity,
    /// Values in {0, 1}.
    Mask,
    /// Lung-field segment codes in 0..=18.
    Labels,
}

impl VolumeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VolumeKind::Intensity => "intensity",
            VolumeKind::Mask => "mask",
            VolumeKind::Labels => "labels",
        }
    }
}

/// Storage type of the on-disk payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DType {
    Int16,
    UInt8,
    UInt16,
}

impl DType {
    pub fn as_str(&self) -> &'static str {
        match self {
            DType::Int16 => "int16",
            DType::UInt8 => "uint8",
            DType::UInt16 => "uint16",
        }
    }

    pub fn size(&self) -> usize {
        match self {
            DType::UInt8 => 1,
            DType::Int16 | DType::UInt16 => 2,
        }
    }

    fn range(&self) -> (f32, f32) {
        match self {
            DType::Int16 => (i16::MIN as f32, i16::MAX as f32),
            DType::UInt8 => (0.0, u8::MAX as f32),
            DType::UInt16 => (0.0, u16::MAX as f32),
        }
    }
}

/// A 3-D scalar grid with physical spacing (mm per voxel).
///
/// Values are held as `f32`, which represents every integer of the supported
/// storage types exactly and leaves room for interpolated intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelVolume {
    dims: Dims,
    spacing: [f64; 3],
    kind: VolumeKind,
    dtype: DType,
    data: Vec<f32>,
}

impl VoxelVolume {
    pub fn new(
        dims: Dims,
        spacing: [f64; 3],
        kind: VolumeKind,
        dtype: DType,
        data: Vec<f32>,
    ) -> Result<Self> {
        if dims.x == 0 || dims.y == 0 || dims.z == 0 {
            return Err(Error::invalid(format!("dimensions must be positive, got {dims}")));
        }
        if data.len() != dims.len() {
            return Err(Error::invalid(format!(
                "data length {} does not match dims {dims} ({} voxels)",
                data.len(),
                dims.len()
            )));
        }
        if spacing.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::invalid(format!("spacing must be positive, got {spacing:?}")));
        }
        let valid = match kind {
            VolumeKind::Intensity => data.iter().all(|v| v.is_finite()),
            VolumeKind::Mask => data.iter().all(|&v| v == 0.0 || v == 1.0),
            VolumeKind::Labels => data
                .iter()
                .all(|&v| v.fract() == 0.0 && (0.0..=18.0).contains(&v)),
        };
        if !valid {
            return Err(Error::invalid(format!(
                "voxel values out of range for a {} volume",
                kind.as_str()
            )));
        }
        Ok(VoxelVolume {
            dims,
            spacing,
            kind,
            dtype,
            data,
        })
    }

    pub fn from_mask(mask: &Mask, spacing: [f64; 3]) -> Self {
        let data = mask.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        VoxelVolume::new(mask.dims, spacing, VolumeKind::Mask, DType::UInt8, data)
            .expect("mask volume is valid by construction")
    }

    pub fn from_labels(labels: &LabelMap, spacing: [f64; 3]) -> Self {
        let data = labels.codes.iter().map(|&c| c as f32).collect();
        VoxelVolume::new(labels.dims, spacing, VolumeKind::Labels, DType::UInt8, data)
            .expect("label volume is valid by construction")
    }

    pub fn intensity(dims: Dims, spacing: [f64; 3], data: Vec<f32>) -> Result<Self> {
        VoxelVolume::new(dims, spacing, VolumeKind::Intensity, DType::Int16, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn kind(&self) -> VolumeKind {
        self.kind
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f32 {
        self.data[self.dims.index(x, y, z)]
    }

    /// Interprets the volume as a binary mask (any non-zero voxel is set).
    pub fn to_mask(&self) -> Result<Mask> {
        if self.kind == VolumeKind::Intensity {
            return Err(Error::invalid("an intensity volume cannot be used as a mask"));
        }
        Ok(Mask {
            dims: self.dims,
            bits: self.data.iter().map(|&v| v != 0.0).collect(),
        })
    }

    pub fn to_labels(&self) -> Result<LabelMap> {
        if self.kind != VolumeKind::Labels {
            return Err(Error::invalid(format!(
                "expected a label map, got a {} volume",
                self.kind.as_str()
            )));
        }
        Ok(LabelMap {
            dims: self.dims,
            codes: self.data.iter().map(|&v| v as u8).collect(),
        })
    }
}

/// Binary voxel mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    dims: Dims,
    bits: Vec<bool>,
}

impl Mask {
    pub fn empty(dims: Dims) -> Self {
        Mask {
            dims,
            bits: vec![false; dims.len()],
        }
    }

    pub fn from_bits(dims: Dims, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != dims.len() {
            return Err(Error::invalid(format!(
                "mask length {} does not match dims {dims}",
                bits.len()
            )));
        }
        Ok(Mask { dims, bits })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(dims.len());
        for z in 0..dims.z {
            for y in 0..dims.y {
                for x in 0..dims.x {
                    bits.push(f(x, y, z));
                }
            }
        }
        Mask { dims, bits }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> bool {
        self.bits[self.dims.index(x, y, z)]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn and(&self, other: &Mask) -> Mask {
        assert_eq!(self.dims, other.dims, "mask dimensions differ");
        Mask {
            dims: self.dims,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| a && b).collect(),
        }
    }

    /// Linear indices of set voxels, ascending.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }
}

/// Lung-field segment codes: 0 outside the lung, 1..=18 pulmonary segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    dims: Dims,
    codes: Vec<u8>,
}

impl LabelMap {
    pub fn from_codes(dims: Dims, codes: Vec<u8>) -> Result<Self> {
        if codes.len() != dims.len() {
            return Err(Error::invalid(format!(
                "label map length {} does not match dims {dims}",
                codes.len()
            )));
        }
        if let Some(bad) = codes.iter().find(|&&c| c > 18) {
            return Err(Error::invalid(format!("segment code {bad} outside 0..=18")));
        }
        Ok(LabelMap { dims, codes })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.codes[i]
    }

    pub fn lung_mask(&self) -> Mask {
        Mask {
            dims: self.dims,
            bits: self.codes.iter().map(|&c| c > 0).collect(),
        }
    }

    pub fn lung_count(&self) -> usize {
        self.codes.iter().filter(|&&c| c > 0).count()
    }
}
