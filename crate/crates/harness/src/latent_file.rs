//! Binary latent container.
//!
//! Layout, all integers little-endian:
//!
//! | offset | size | content                                   |
//! |--------|------|-------------------------------------------|
//! | 0      | 4    | magic `FMML`                              |
//! | 4      | 4    | format version (1)                        |
//! | 8      | 4    | element type (0 = f32)                    |
//! | 12     | 4    | ndim                                      |
//! | 16     | 4n   | dims, e.g. channels, height, width        |
//! | ...    | 4N   | f32 payload, channel-major then row-major |

use std::io::{Read, Write};
use std::path::Path;

use fmm_core::{RealField, Shape};

use crate::error::{HarnessError, Result};

pub const MAGIC: &[u8; 4] = b"FMML";
pub const VERSION: u32 = 1;
pub const ELEMENT_F32: u32 = 0;
const MAX_NDIM: u32 = 8;

/// Decoded latent: dims plus raw f32 values.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentFile {
    pub dims: Vec<u32>,
    pub values: Vec<f32>,
}

impl LatentFile {
    pub fn from_field(field: &RealField) -> Self {
        let s = field.shape();
        Self {
            dims: vec![s.channels as u32, s.height as u32, s.width as u32],
            values: field.data().iter().map(|&x| x as f32).collect(),
        }
    }

    /// Accepts 3 dims `(C, H, W)` or 2 dims `(H, W)`.
    pub fn to_field(&self) -> Result<RealField> {
        let (c, h, w) = match self.dims.as_slice() {
            [c, h, w] => (*c, *h, *w),
            [h, w] => (1, *h, *w),
            d => {
                return Err(HarnessError::Format {
                    offset: 12,
                    message: format!("expected 2 or 3 dims, found {}", d.len()),
                })
            }
        };
        let shape = Shape::new(c as usize, h as usize, w as usize)?;
        Ok(RealField::new(shape, self.values.iter().map(|&x| f64::from(x)).collect())?)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.dims.len() + 4 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&ELEMENT_F32.to_le_bytes());
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for d in &self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Decodes one latent from the front of `bytes`, returning it and the
    /// number of bytes consumed. Offsets in errors are relative to `bytes`.
    pub fn decode_prefix(bytes: &[u8]) -> Result<(Self, usize)> {
        let word = |offset: usize| -> Result<u32> {
            bytes
                .get(offset..offset + 4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .ok_or_else(|| HarnessError::Format { offset, message: "truncated header".into() })
        };
        if bytes.get(0..4) != Some(MAGIC.as_slice()) {
            return Err(HarnessError::Format { offset: 0, message: "bad magic, expected \"FMML\"".into() });
        }
        let version = word(4)?;
        if version != VERSION {
            return Err(HarnessError::UnsupportedVersion { found: version, supported: VERSION });
        }
        let element = word(8)?;
        if element != ELEMENT_F32 {
            return Err(HarnessError::Format { offset: 8, message: format!("unknown element type {element}") });
        }
        let ndim = word(12)?;
        if ndim == 0 || ndim > MAX_NDIM {
            return Err(HarnessError::Format { offset: 12, message: format!("ndim {ndim} not in 1..={MAX_NDIM}") });
        }
        let dims = (0..ndim as usize).map(|i| word(16 + 4 * i)).collect::<Result<Vec<_>>>()?;
        let start = 16 + 4 * ndim as usize;
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
            .filter(|n| n.checked_mul(4).is_some())
            .ok_or_else(|| HarnessError::Format { offset: 16, message: "dims overflow".into() })?;
        let end = start + 4 * count;
        let payload = bytes.get(start..end).ok_or_else(|| HarnessError::Format {
            offset: bytes.len(),
            message: format!("payload needs {} bytes, {} present", 4 * count, bytes.len().saturating_sub(start)),
        })?;
        let values = payload.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
        Ok((Self { dims, values }, end))
    }

    /// Decodes a buffer holding exactly one latent.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let (file, used) = Self::decode_prefix(bytes)?;
        if used != bytes.len() {
            return Err(HarnessError::Format { offset: used, message: "trailing bytes after payload".into() });
        }
        Ok(file)
    }
}

pub fn write_latent(mut w: impl Write, file: &LatentFile) -> Result<()> {
    w.write_all(&file.encode())?;
    Ok(())
}

pub fn read_latent(mut r: impl Read) -> Result<LatentFile> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    LatentFile::decode(&buf)
}

pub fn write_latent_path(path: &Path, file: &LatentFile) -> Result<()> {
    std::fs::write(path, file.encode())?;
    Ok(())
}

pub fn read_latent_path(path: &Path) -> Result<LatentFile> {
    LatentFile::decode(&std::fs::read(path)?)
}
