//! SVOL: a small raw volume format.
//!
//! ```text
//! SVOL1
//! dim=<x> <y> <z>
//! spacing=<sx> <sy> <sz>
//! dtype=<int16|uint8|uint16>
//! kind=<intensity|mask|labels>
//!
//! <little-endian payload, x-fastest, z-slowest>
//! ```
//!
//! Spacing is written with the shortest decimal that round-trips, so reading
//! and re-writing a file produced by [`write_svol`] is byte-identical.

use std::fs;
use std::path::Path;

use super::{DType, Dims, VolumeKind, VoxelVolume};
use crate::error::{Error, Result};

const MAGIC: &str = "SVOL1";

pub fn read_svol(path: impl AsRef<Path>) -> Result<VoxelVolume> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_svol(&bytes).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_svol(path: impl AsRef<Path>, volume: &VoxelVolume) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_svol(volume)).map_err(|e| Error::io(path, e))
}

pub fn encode_svol(volume: &VoxelVolume) -> Vec<u8> {
    let dims = volume.dims();
    let [sx, sy, sz] = volume.spacing();
    let dtype = volume.dtype();
    let header = format!(
        "{MAGIC}\ndim={} {} {}\nspacing={sx} {sy} {sz}\ndtype={}\nkind={}\n\n",
        dims.x,
        dims.y,
        dims.z,
        dtype.as_str(),
        volume.kind().as_str()
    );
    let mut out = Vec::with_capacity(header.len() + dims.len() * dtype.size());
    out.extend_from_slice(header.as_bytes());
    let (lo, hi) = dtype.range();
    for &v in volume.data() {
        let v = v.round().clamp(lo, hi);
        match dtype {
            DType::UInt8 => out.push(v as u8),
            DType::Int16 => out.extend_from_slice(&(v as i16).to_le_bytes()),
            DType::UInt16 => out.extend_from_slice(&(v as u16).to_le_bytes()),
        }
    }
    out
}

pub fn decode_svol(bytes: &[u8]) -> Result<VoxelVolume> {
    let mut lines = HeaderLines { bytes, pos: 0 };
    let magic = lines.next_line()?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic line {magic:?}")));
    }

    let dims = parse_triple::<usize>(lines.field("dim")?, "dim")?;
    let spacing = parse_triple::<f64>(lines.field("spacing")?, "spacing")?;
    let dtype = match lines.field("dtype")? {
        "int16" => DType::Int16,
        "uint8" => DType::UInt8,
        "uint16" => DType::UInt16,
        other => return Err(Error::Format(format!("unknown dtype {other:?}"))),
    };
    let kind = match lines.field("kind")? {
        "intensity" => VolumeKind::Intensity,
        "mask" => VolumeKind::Mask,
        "labels" => VolumeKind::Labels,
        other => return Err(Error::Format(format!("unknown kind {other:?}"))),
    };
    let blank = lines.next_line()?;
    if !blank.is_empty() {
        return Err(Error::Format(format!(
            "expected blank line after header, found {blank:?}"
        )));
    }

    if dims.iter().any(|&d| d == 0) {
        return Err(Error::Format(format!("non-positive dimension in {dims:?}")));
    }
    let dims = Dims::new(dims[0], dims[1], dims[2]);
    let payload = &bytes[lines.pos..];
    let expected = dims
        .x
        .checked_mul(dims.y)
        .and_then(|v| v.checked_mul(dims.z))
        .and_then(|v| v.checked_mul(dtype.size()))
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload has {} bytes, header requires {expected} ({dims} x {})",
            payload.len(),
            dtype.as_str()
        )));
    }

    let data: Vec<f32> = match dtype {
        DType::UInt8 => payload.iter().map(|&b| b as f32).collect(),
        DType::Int16 => payload
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]) as f32)
            .collect(),
        DType::UInt16 => payload
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]) as f32)
            .collect(),
    };
    VoxelVolume::new(dims, spacing, kind, dtype, data).map_err(|e| Error::Format(e.to_string()))
}

struct HeaderLines<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderLines<'a> {
    fn next_line(&mut self) -> Result<&'a str> {
        let rest = &self.bytes[self.pos..];
        let end = rest
            .iter()
            .take(256)
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("truncated header".into()))?;
        self.pos += end + 1;
        std::str::from_utf8(&rest[..end]).map_err(|_| Error::Format("header is not ASCII".into()))
    }

    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        line.strip_prefix(key)
            .and_then(|s| s.strip_prefix('='))
            .ok_or_else(|| Error::Format(format!("expected `{key}=` line, found {line:?}")))
    }
}

fn parse_triple<T: std::str::FromStr>(value: &str, key: &str) -> Result<[T; 3]> {
    let parts: Vec<&str> = value.split(' ').collect();
    if parts.len() != 3 {
        return Err(Error::Format(format!("`{key}` needs three values, got {value:?}")));
    }
    let mut out = Vec::with_capacity(3);
    for p in parts {
        out.push(
            p.parse::<T>()
                .map_err(|_| Error::Format(format!("bad `{key}` value {p:?}")))?,
        );
    }
    let mut it = out.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}
