//! Likelihood bundles as a directory of grid and mask files.
//!
//! `corner.grd` and `edge.grd` hold one channel each, `direction.grd` holds
//! the 36 direction bins as channels, and room segments are
//! `segment_000.msk`, `segment_001.msk`, ... numbered without gaps.

use std::path::{Path, PathBuf};

use roomloop_core::oracle::{DirectionMap, LikelihoodBundle, DIRECTION_BINS};

use crate::error::FormatError;
use crate::formats::{load_grid, load_grids, load_mask, save_grid, save_grids, save_mask};

pub const CORNER_FILE: &str = "corner.grd";
pub const EDGE_FILE: &str = "edge.grd";
pub const DIRECTION_FILE: &str = "direction.grd";

pub fn segment_file(i: usize) -> String {
    format!("segment_{i:03}.msk")
}

pub fn save_bundle(b: &LikelihoodBundle, dir: &Path) -> Result<Vec<PathBuf>, FormatError> {
    let mut written = vec![dir.join(CORNER_FILE), dir.join(EDGE_FILE), dir.join(DIRECTION_FILE)];
    save_grid(&b.corner, &written[0])?;
    save_grid(&b.edge, &written[1])?;
    let bins: Vec<_> = b.direction.bins.iter().collect();
    save_grids(&bins, &written[2])?;
    for (i, s) in b.segments.iter().enumerate() {
        let p = dir.join(segment_file(i));
        save_mask(s, &p)?;
        written.push(p);
    }
    Ok(written)
}

pub fn load_bundle(dir: &Path) -> Result<LikelihoodBundle, FormatError> {
    let corner = load_grid(dir.join(CORNER_FILE))?;
    let edge = load_grid(dir.join(EDGE_FILE))?;
    let dir_path = dir.join(DIRECTION_FILE);
    let bins = load_grids(&dir_path)?;
    if bins.len() != DIRECTION_BINS {
        return Err(FormatError::Header(format!("expected {DIRECTION_BINS} channels, found {}", bins.len())).at(dir_path));
    }
    let mut segments = Vec::new();
    loop {
        let p = dir.join(segment_file(segments.len()));
        if !p.exists() {
            break;
        }
        segments.push(load_mask(&p)?);
    }
    if segments.is_empty() {
        return Err(FormatError::io(
            dir.join(segment_file(0)),
            std::io::Error::new(std::io::ErrorKind::NotFound, "no room segments"),
        ));
    }
    let (w, h) = (corner.width(), corner.height());
    let mismatch = |what: &str, ww: usize, hh: usize| {
        (ww != w || hh != h).then(|| FormatError::Header(format!("{what} is {ww}x{hh}, corner map is {w}x{h}")).at(dir))
    };
    if let Some(e) = mismatch("edge map", edge.width(), edge.height())
        .or_else(|| mismatch("direction map", bins[0].width(), bins[0].height()))
        .or_else(|| segments.iter().find_map(|s| mismatch("segment", s.width(), s.height())))
    {
        return Err(e);
    }
    Ok(LikelihoodBundle {
        corner,
        edge,
        direction: DirectionMap { bins },
        segments,
    })
}
