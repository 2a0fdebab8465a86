//! Binary per-frame feature files.
//!
//! Layout (little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "KFDF"
//! 4       4     version (u32) = 1
//! 8       4     frame count K (u32)
//! 12      4     feature dimension d (u32)
//! 16      4·K·d f32 payload, row-major (one row per frame)
//! ```

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"KFDF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

/// A K×d matrix of fused per-frame features, one row per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    frames: usize,
    dim: usize,
    data: Vec<f32>,
}

impl FeatureSequence {
    pub fn new(frames: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if frames < 2 {
            return Err(Error::Data(format!("need at least 2 frames, got {frames}")));
        }
        if dim < 1 {
            return Err(Error::Data("feature dimension must be positive".into()));
        }
        if data.len() != frames * dim {
            return Err(Error::Data(format!(
                "expected {} values for {frames}x{dim}, got {}",
                frames * dim,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite feature at frame {}, column {}",
                i / dim,
                i % dim
            )));
        }
        Ok(Self { frames, dim, data })
    }

    /// Build from f64 rows, rounding each value to f32.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Data("ragged feature rows".into()));
        }
        let data = rows.iter().flatten().map(|&v| v as f32).collect();
        Self::new(rows.len(), dim, data)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Row `i` widened to f64.
    pub fn row_f64(&self, i: usize) -> Vec<f64> {
        self.row(i).iter().map(|&v| f64::from(v)).collect()
    }
}

pub fn encode_features(seq: &FeatureSequence) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 4 * seq.data.len());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(seq.frames as u32).to_le_bytes());
    buf.extend_from_slice(&(seq.dim as u32).to_le_bytes());
    for v in &seq.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn write_features(seq: &FeatureSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if u32::try_from(seq.frames).is_err() || u32::try_from(seq.dim).is_err() {
        return Err(Error::Data("dimensions exceed u32".into()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&encode_features(seq))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<(usize, usize)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(path, "file shorter than 16-byte header"));
    }
    if bytes[0..4] != MAGIC {
        return Err(Error::format(
            path,
            format!("bad magic {:?}", String::from_utf8_lossy(&bytes[0..4])),
        ));
    }
    let word = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(Error::format(
            path,
            format!("unsupported version {version}"),
        ));
    }
    let (frames, dim) = (word(8) as usize, word(12) as usize);
    if frames < 2 || dim < 1 {
        return Err(Error::format(
            path,
            format!("header declares {frames}x{dim}; need K >= 2 and d >= 1"),
        ));
    }
    Ok((frames, dim))
}

/// Read only the header, returning `(K, d)`.
pub fn read_header(path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    let mut head = [0u8; HEADER_LEN];
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut filled = 0;
    while filled < HEADER_LEN {
        let n = file
            .read(&mut head[filled..])
            .map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        filled += n;
    }
    parse_header(path, &head[..filled])
}

pub fn decode_features(path: &Path, bytes: &[u8]) -> Result<FeatureSequence> {
    let (frames, dim) = parse_header(path, bytes)?;
    let count = frames
        .checked_mul(dim)
        .ok_or_else(|| Error::format(path, "K*d overflows"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 4 * count {
        return Err(Error::format(
            path,
            format!(
                "payload holds {} bytes, header implies {} values ({} bytes)",
                payload.len(),
                count,
                4 * count
            ),
        ));
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureSequence::new(frames, dim, data)
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureSequence> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_features(path, &bytes)
}
