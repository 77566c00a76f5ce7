//! On-disk raster and point formats.
//!
//! Grids: an ASCII line `GRD <width> <height> <channels>` then row-major,
//! channel-interleaved little-endian `f32`. Masks: `MSK <width> <height>`
//! then one byte (0 or 1) per pixel. Point clouds: one `x y z nx ny nz`
//! line per point; blank lines and `#` comments are skipped.

use std::fs;
use std::path::Path;

use roomloop_core::grid::{BinaryMask, Grid2D};
use roomloop_core::ingest::PointSample;

use crate::error::FormatError;

const NORMAL_TOLERANCE: f64 = 1e-3;

fn split_header<'a>(bytes: &'a [u8], magic: &str, fields: usize) -> Result<(Vec<usize>, &'a [u8]), FormatError> {
    let nl = bytes
        .iter()
        .take(128)
        .position(|&b| b == b'\n')
        .ok_or_else(|| FormatError::Header("missing header line".into()))?;
    let line = std::str::from_utf8(&bytes[..nl]).map_err(|_| FormatError::Header("header is not ASCII".into()))?;
    let mut parts = line.split_ascii_whitespace();
    if parts.next() != Some(magic) {
        return Err(FormatError::Header(format!("expected magic {magic}")));
    }
    let dims = parts
        .map(|s| s.parse::<usize>().map_err(|_| FormatError::Header(format!("bad dimension {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if dims.len() != fields {
        return Err(FormatError::Header(format!("expected {fields} dimensions, got {}", dims.len())));
    }
    if dims.contains(&0) {
        return Err(FormatError::Header("zero dimension".into()));
    }
    Ok((dims, &bytes[nl + 1..]))
}

fn check_len(data: &[u8], expected: usize) -> Result<(), FormatError> {
    match data.len() {
        n if n < expected => Err(FormatError::Truncated { expected, found: n }),
        n if n > expected => Err(FormatError::TrailingData { extra: n - expected }),
        _ => Ok(()),
    }
}

/// Encodes equally sized grids as the channels of one file.
pub fn encode_grids(channels: &[&Grid2D]) -> Vec<u8> {
    assert!(!channels.is_empty(), "at least one channel");
    let (w, h) = (channels[0].width(), channels[0].height());
    assert!(channels.iter().all(|g| g.width() == w && g.height() == h));
    let mut out = format!("GRD {w} {h} {}\n", channels.len()).into_bytes();
    out.reserve(w * h * channels.len() * 4);
    for i in 0..w * h {
        for g in channels {
            out.extend_from_slice(&g.values()[i].to_le_bytes());
        }
    }
    out
}

pub fn decode_grids(bytes: &[u8]) -> Result<Vec<Grid2D>, FormatError> {
    let (dims, data) = split_header(bytes, "GRD", 3)?;
    let (w, h, c) = (dims[0], dims[1], dims[2]);
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(c))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| FormatError::Header("dimensions overflow".into()))?;
    check_len(data, expected)?;
    let mut values = vec![Vec::with_capacity(w * h); c];
    for (k, chunk) in data.chunks_exact(4).enumerate() {
        values[k % c].push(f32::from_le_bytes(chunk.try_into().unwrap()));
    }
    Ok(values
        .into_iter()
        .map(|v| Grid2D::from_values(w, h, v).expect("length checked"))
        .collect())
}

pub fn encode_mask(m: &BinaryMask) -> Vec<u8> {
    let mut out = format!("MSK {} {}\n", m.width(), m.height()).into_bytes();
    out.extend(m.bits().iter().map(|&b| b as u8));
    out
}

pub fn decode_mask(bytes: &[u8]) -> Result<BinaryMask, FormatError> {
    let (dims, data) = split_header(bytes, "MSK", 2)?;
    let (w, h) = (dims[0], dims[1]);
    let expected = w
        .checked_mul(h)
        .ok_or_else(|| FormatError::Header("dimensions overflow".into()))?;
    check_len(data, expected)?;
    let bits = data
        .iter()
        .enumerate()
        .map(|(i, &b)| match b {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(FormatError::Header(format!("mask byte {v} at offset {i}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BinaryMask::from_bits(w, h, bits).expect("length checked"))
}

fn read(path: &Path) -> Result<Vec<u8>, FormatError> {
    fs::read(path).map_err(|e| FormatError::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    fs::write(path, bytes).map_err(|e| FormatError::io(path, e))
}

pub fn save_grid(g: &Grid2D, path: impl AsRef<Path>) -> Result<(), FormatError> {
    write(path.as_ref(), &encode_grids(&[g]))
}

pub fn save_grids(channels: &[&Grid2D], path: impl AsRef<Path>) -> Result<(), FormatError> {
    write(path.as_ref(), &encode_grids(channels))
}

/// Loads a single-channel grid.
pub fn load_grid(path: impl AsRef<Path>) -> Result<Grid2D, FormatError> {
    let path = path.as_ref();
    let mut gs = load_grids(path)?;
    if gs.len() != 1 {
        return Err(FormatError::Header(format!("expected 1 channel, found {}", gs.len())).at(path));
    }
    Ok(gs.pop().unwrap())
}

pub fn load_grids(path: impl AsRef<Path>) -> Result<Vec<Grid2D>, FormatError> {
    let path = path.as_ref();
    decode_grids(&read(path)?).map_err(|e| e.at(path))
}

pub fn save_mask(m: &BinaryMask, path: impl AsRef<Path>) -> Result<(), FormatError> {
    write(path.as_ref(), &encode_mask(m))
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask, FormatError> {
    let path = path.as_ref();
    decode_mask(&read(path)?).map_err(|e| e.at(path))
}

pub fn parse_points(text: &str) -> Result<Vec<PointSample>, FormatError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| FormatError::Parse { line: i + 1, reason };
        let v = line
            .split_ascii_whitespace()
            .map(|s| s.parse::<f64>().map_err(|_| err(format!("not a number: {s:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if v.len() != 6 {
            return Err(err(format!("expected 6 values, found {}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(err("non-finite value".into()));
        }
        let norm = (v[3] * v[3] + v[4] * v[4] + v[5] * v[5]).sqrt();
        if (norm - 1.0).abs() > NORMAL_TOLERANCE {
            return Err(err(format!("normal has length {norm}")));
        }
        out.push(PointSample {
            x: v[0],
            y: v[1],
            z: v[2],
            nx: v[3],
            ny: v[4],
            nz: v[5],
        });
    }
    Ok(out)
}

pub fn load_points(path: impl AsRef<Path>) -> Result<Vec<PointSample>, FormatError> {
    let path = path.as_ref();
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| FormatError::Parse {
        line: 0,
        reason: "file is not UTF-8".into(),
    });
    text.and_then(|t| parse_points(&t)).map_err(|e| e.at(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use roomloop_core::grid::PixelCoord;

    #[test]
    fn hand_built_grid() {
        let mut bytes = b"GRD 4 4 1\n".to_vec();
        for i in 0..16 {
            bytes.extend_from_slice(&(i as f32 * 0.5).to_le_bytes());
        }
        let g = decode_grids(&bytes).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!((g[0].width(), g[0].height()), (4, 4));
        assert_eq!(g[0].get(PixelCoord::new(1, 2)), 4.5);
    }

    #[test]
    fn channels_are_interleaved() {
        let a = Grid2D::from_values(2, 1, vec![1.0, 2.0]).unwrap();
        let b = Grid2D::from_values(2, 1, vec![3.0, 4.0]).unwrap();
        let bytes = encode_grids(&[&a, &b]);
        let floats: Vec<f32> = bytes[b"GRD 2 1 2\n".len()..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        assert_eq!(floats, [1.0, 3.0, 2.0, 4.0]);
        assert_eq!(decode_grids(&bytes).unwrap(), [a, b]);
    }

    #[test]
    fn bad_grids() {
        let mut bytes = encode_grids(&[&Grid2D::filled(3, 3, 0.25)]);
        bytes.pop();
        assert!(matches!(decode_grids(&bytes), Err(FormatError::Truncated { expected: 36, found: 35 })));
        assert!(matches!(decode_grids(b"GRX 1 1 1\n\0\0\0\0"), Err(FormatError::Header(_))));
        assert!(matches!(decode_grids(b"GRD 1 1\n\0\0\0\0"), Err(FormatError::Header(_))));
        assert!(matches!(decode_grids(b"GRD 0 1 1\n"), Err(FormatError::Header(_))));
        assert!(matches!(decode_grids(b"GRD 1 1 1\n\0\0\0\0\0"), Err(FormatError::TrailingData { extra: 1 })));
        assert!(matches!(decode_grids(b""), Err(FormatError::Header(_))));
    }

    #[test]
    fn masks() {
        let mut m = BinaryMask::new(3, 2);
        m.set(PixelCoord::new(2, 1), true);
        let bytes = encode_mask(&m);
        assert_eq!(bytes, b"MSK 3 2\n\0\0\0\0\0\x01");
        assert_eq!(decode_mask(&bytes).unwrap(), m);
        assert!(matches!(decode_mask(b"MSK 2 1\n\x01\x02"), Err(FormatError::Header(_))));
        assert!(matches!(decode_mask(b"MSK 2 1\n\x01"), Err(FormatError::Truncated { .. })));
    }

    #[test]
    fn point_text() {
        let pts = parse_points("# header\n0 1 2 0 0 1\n\n3.5 -1 0 1 0 0 # wall\n").unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].x, 3.5);
        assert_eq!(pts[1].nx, 1.0);
        assert!(matches!(parse_points("1 2 3\n"), Err(FormatError::Parse { line: 1, .. })));
        assert!(matches!(parse_points("\n1 2 3 0 0 2\n"), Err(FormatError::Parse { line: 2, .. })));
        assert!(matches!(parse_points("1 2 x 0 0 1\n"), Err(FormatError::Parse { .. })));
    }
}
