//! Top-down projection of an aligned point cloud into a density/normal map.

use alloc::vec;
use core::fmt;

use crate::grid::{Grid2D, PixelCoord};
use crate::math;

/// Fraction of the XY extent added on every side before binning.
pub const BORDER_EXPANSION: f64 = 0.025;

pub const DEFAULT_RESOLUTION: usize = 256;

/// A 3D point with its unit surface normal. Z is the gravity axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub nx: f64,
    pub ny: f64,
    pub nz: f64,
}

/// Four-channel top-down map: point density in `[0, 1]` plus the mean normal.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityNormalMap {
    pub density: Grid2D,
    pub normal_x: Grid2D,
    pub normal_y: Grid2D,
    pub normal_z: Grid2D,
}

impl DensityNormalMap {
    pub fn channels(&self) -> [&Grid2D; 4] {
        [&self.density, &self.normal_x, &self.normal_y, &self.normal_z]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestError {
    EmptyCloud,
    ResolutionTooSmall(usize),
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestError::EmptyCloud => write!(f, "point cloud is empty"),
            IngestError::ResolutionTooSmall(r) => write!(f, "resolution {r} is below 16"),
        }
    }
}

impl core::error::Error for IngestError {}

struct AxisBinning {
    min: f64,
    pad: f64,
    span: f64,
}

impl AxisBinning {
    fn new(min: f64, max: f64) -> Self {
        let extent = max - min;
        Self {
            min,
            pad: BORDER_EXPANSION * extent,
            span: extent * (1.0 + 2.0 * BORDER_EXPANSION),
        }
    }

    // Half-open bins, with the far edge folded into the last bin. A zero
    // extent maps everything to the centre pixel.
    fn bin(&self, v: f64, resolution: usize) -> usize {
        if self.span <= 0.0 {
            return resolution / 2;
        }
        let t = math::floor(((v - self.min) + self.pad) / self.span * resolution as f64);
        (t.max(0.0) as usize).min(resolution - 1)
    }
}

/// Projects points onto the XY plane: tight rectangle expanded by 2.5% per
/// side, scaled non-uniformly onto a `resolution`² grid. Row index follows
/// the y coordinate, column index the x coordinate.
///
/// Density is the per-pixel point count divided by the maximum count. Normals
/// are summed in input order, then renormalized; pixels whose normals cancel
/// out are left at zero.
pub fn project_point_cloud(
    points: &[PointSample],
    resolution: usize,
) -> Result<DensityNormalMap, IngestError> {
    if points.is_empty() {
        return Err(IngestError::EmptyCloud);
    }
    if resolution < 16 {
        return Err(IngestError::ResolutionTooSmall(resolution));
    }
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let bx = AxisBinning::new(min_x, max_x);
    let by = AxisBinning::new(min_y, max_y);

    let n = resolution * resolution;
    let mut counts = vec![0u32; n];
    let mut sums = vec![[0.0f64; 3]; n];
    for p in points {
        let i = by.bin(p.y, resolution) * resolution + bx.bin(p.x, resolution);
        counts[i] += 1;
        sums[i][0] += p.nx;
        sums[i][1] += p.ny;
        sums[i][2] += p.nz;
    }
    let max_count = counts.iter().copied().max().unwrap_or(0).max(1) as f32;

    let mut density = Grid2D::zeros(resolution, resolution);
    let mut normal_x = Grid2D::zeros(resolution, resolution);
    let mut normal_y = Grid2D::zeros(resolution, resolution);
    let mut normal_z = Grid2D::zeros(resolution, resolution);
    for i in 0..n {
        if counts[i] == 0 {
            continue;
        }
        let px = PixelCoord::new((i % resolution) as i32, (i / resolution) as i32);
        density.set(px, counts[i] as f32 / max_count);
        let [sx, sy, sz] = sums[i];
        let norm = math::sqrt(sx * sx + sy * sy + sz * sz);
        if norm > 1e-12 {
            normal_x.set(px, (sx / norm) as f32);
            normal_y.set(px, (sy / norm) as f32);
            normal_z.set(px, (sz / norm) as f32);
        }
    }
    Ok(DensityNormalMap {
        density,
        normal_x,
        normal_y,
        normal_z,
    })
}

/// Pixel a point would land in, for callers that need the binning alone.
pub fn pixel_of(points: &[PointSample], resolution: usize, index: usize) -> Option<PixelCoord> {
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let p = points.get(index)?;
    let bx = AxisBinning::new(min_x, max_x);
    let by = AxisBinning::new(min_y, max_y);
    Some(PixelCoord::new(
        bx.bin(p.x, resolution) as i32,
        by.bin(p.y, resolution) as i32,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn pt(x: f64, y: f64) -> PointSample {
        PointSample {
            x,
            y,
            z: 0.0,
            nx: 0.0,
            ny: 0.0,
            nz: 1.0,
        }
    }

    #[test]
    fn empty_cloud_errors() {
        assert_eq!(project_point_cloud(&[], 256), Err(IngestError::EmptyCloud));
        assert_eq!(
            project_point_cloud(&[pt(0.0, 0.0)], 8),
            Err(IngestError::ResolutionTooSmall(8))
        );
    }

    #[test]
    fn single_point_lands_in_centre() {
        let m = project_point_cloud(&[pt(3.0, -1.0)], 64).unwrap();
        let ones: Vec<_> = m.density.values().iter().filter(|&&v| v == 1.0).collect();
        assert_eq!(ones.len(), 1);
        assert_eq!(m.density.get(PixelCoord::new(32, 32)), 1.0);
        assert_eq!(m.normal_z.get(PixelCoord::new(32, 32)), 1.0);
    }

    #[test]
    fn density_rescales_linearly() {
        // Four points near one corner, two near the other.
        let mut pts = vec![pt(0.0, 0.0); 4];
        pts.extend([pt(10.0, 10.0), pt(10.0, 10.0)]);
        let m = project_point_cloud(&pts, 32).unwrap();
        let a = pixel_of(&pts, 32, 0).unwrap();
        let b = pixel_of(&pts, 32, 4).unwrap();
        assert_eq!(m.density.get(a), 1.0);
        assert_eq!(m.density.get(b), 0.5);
        // 2.5% expansion: the min corner sits at 0.025/1.05 of the way in.
        assert_eq!(a, PixelCoord::new(0, 0));
        assert_eq!(b, PixelCoord::new(31, 31));
    }

    #[test]
    fn lattice_gives_near_uniform_plateau() {
        let mut pts = Vec::new();
        for i in 0..100 {
            for j in 0..100 {
                pts.push(pt(i as f64 + 0.5, j as f64 + 0.5));
            }
        }
        let res = 50;
        let m = project_point_cloud(&pts, res).unwrap();
        // Direct counting oracle.
        let mut counts = vec![0u32; res * res];
        let lo = 0.5 - 0.025 * 99.0;
        let span = 99.0 * 1.05;
        let bin = |v: f64| (((v - lo) / span * res as f64).floor() as usize).min(res - 1);
        for p in &pts {
            counts[bin(p.y) * res + bin(p.x)] += 1;
        }
        let max = *counts.iter().max().unwrap() as f32;
        for (i, &c) in counts.iter().enumerate() {
            assert_eq!(m.density.values()[i], c as f32 / max);
        }
        // Bins are about 2.08 lattice steps wide: interior pixels hold 2 or 3
        // points per axis, so 4, 6 or 9 in total.
        let inner: Vec<f32> = (5..45)
            .flat_map(|y| (5..45).map(move |x| (x, y)))
            .map(|(x, y)| m.density.get(PixelCoord::new(x, y)))
            .collect();
        let lo = inner.iter().copied().fold(f32::INFINITY, f32::min);
        assert!(lo >= 4.0 / 9.0, "plateau minimum {lo}");
        for v in inner {
            assert!([4.0f32 / 9.0, 6.0 / 9.0, 1.0].contains(&v), "{v}");
        }
    }

    #[test]
    fn opposite_normals_leave_pixel_empty() {
        let mut a = pt(0.0, 0.0);
        let mut b = pt(0.0, 0.0);
        a.nz = 1.0;
        b.nz = -1.0;
        let m = project_point_cloud(&[a, b, pt(5.0, 5.0)], 16).unwrap();
        let q = pixel_of(&[a, b, pt(5.0, 5.0)], 16, 0).unwrap();
        assert_eq!(m.density.get(q), 1.0);
        assert_eq!(m.normal_z.get(q), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        // Dyadic coordinates keep the translated arithmetic exact.
        fn cloud() -> impl Strategy<Value = Vec<PointSample>> {
            proptest::collection::vec((0i32..400, 0i32..400), 1..60).prop_map(|v| {
                v.into_iter()
                    .map(|(x, y)| pt(x as f64 * 0.25, y as f64 * 0.25))
                    .collect()
            })
        }

        proptest! {
            #[test]
            fn translation_leaves_density_unchanged(pts in cloud(), tx in -64i32..64, ty in -64i32..64) {
                let moved: Vec<_> = pts
                    .iter()
                    .map(|p| pt(p.x + tx as f64 * 0.5, p.y + ty as f64 * 0.5))
                    .collect();
                let a = project_point_cloud(&pts, 32).unwrap();
                let b = project_point_cloud(&moved, 32).unwrap();
                prop_assert_eq!(a.density, b.density);
            }

            #[test]
            fn density_in_unit_range_with_a_peak(pts in cloud()) {
                let m = project_point_cloud(&pts, 24).unwrap();
                prop_assert!(m.density.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
                prop_assert_eq!(m.density.max_value(), 1.0);
            }
        }
    }
}
