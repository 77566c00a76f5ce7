//! Raster primitives: pixel coordinates, scalar grids, binary masks, Bresenham
//! lines, binary morphology, bounding boxes and polygon fill.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

/// Integer pixel position. `x` is the column, `y` the row.
///
/// Ordering is lexicographic on `(x, y)`; deterministic tie-breaks across the
/// crate rely on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PixelCoord {
    pub x: i32,
    pub y: i32,
}

impl PixelCoord {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn dist(self, other: PixelCoord) -> f64 {
        math::hypot((self.x - other.x) as f64, (self.y - other.y) as f64)
    }

    pub fn dist_sq(self, other: PixelCoord) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        dx * dx + dy * dy
    }
}

impl From<(i32, i32)> for PixelCoord {
    fn from((x, y): (i32, i32)) -> Self {
        Self::new(x, y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridError {
    EmptyMask,
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::EmptyMask => write!(f, "mask has no set pixels"),
            GridError::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} values, got {got}")
            }
        }
    }
}

impl core::error::Error for GridError {}

/// Row-major scalar raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl Grid2D {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f32>) -> Result<Self, GridError> {
        if values.len() != width * height {
            return Err(GridError::DimensionMismatch {
                expected: width * height,
                got: values.len(),
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn contains(&self, p: PixelCoord) -> bool {
        in_bounds(self.width, self.height, p)
    }

    pub fn get(&self, p: PixelCoord) -> f32 {
        self.values[p.y as usize * self.width + p.x as usize]
    }

    /// Value at `p`, or `0.0` outside the grid.
    pub fn get_or_zero(&self, p: PixelCoord) -> f32 {
        if self.contains(p) {
            self.get(p)
        } else {
            0.0
        }
    }

    pub fn set(&mut self, p: PixelCoord, v: f32) {
        let w = self.width;
        self.values[p.y as usize * w + p.x as usize] = v;
    }

    pub fn max_value(&self) -> f32 {
        self.values.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }
}

/// Row-major boolean raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, GridError> {
        if bits.len() != width * height {
            return Err(GridError::DimensionMismatch {
                expected: width * height,
                got: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn contains(&self, p: PixelCoord) -> bool {
        in_bounds(self.width, self.height, p)
    }

    /// `false` outside the mask.
    pub fn get(&self, p: PixelCoord) -> bool {
        self.contains(p) && self.bits[p.y as usize * self.width + p.x as usize]
    }

    pub fn set(&mut self, p: PixelCoord, v: bool) {
        if self.contains(p) {
            let w = self.width;
            self.bits[p.y as usize * w + p.x as usize] = v;
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Set pixels in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = PixelCoord> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| PixelCoord::new((i % w) as i32, (i / w) as i32))
    }

    pub fn union_with(&mut self, other: &BinaryMask) {
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a && b)
            .count()
    }

    /// `true` when every set pixel of `self` is set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Mean of the set pixels' coordinates, `None` for an empty mask.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for p in self.iter_set() {
            sx += p.x as f64;
            sy += p.y as f64;
            n += 1;
        }
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }
}

fn in_bounds(width: usize, height: usize, p: PixelCoord) -> bool {
    p.x >= 0 && p.y >= 0 && (p.x as usize) < width && (p.y as usize) < height
}

/// Inclusive axis-aligned pixel box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub min: PixelCoord,
    pub max: PixelCoord,
}

impl BoundingBox {
    pub fn new(min: PixelCoord, max: PixelCoord) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y);
        Self { min, max }
    }

    pub fn width(&self) -> usize {
        (self.max.x - self.min.x + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.max.y - self.min.y + 1) as usize
    }

    pub fn contains(&self, p: PixelCoord) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(i32, i32)] {
        match self {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[
                (1, 0),
                (-1, 0),
                (0, 1),
                (0, -1),
                (1, 1),
                (1, -1),
                (-1, 1),
                (-1, -1),
            ],
        }
    }
}

/// Pixels of the 8-connected Bresenham trace from `a` to `b`, both endpoints
/// included.
///
/// This is the classical integer-error variant (`e2 >= dy` steps x, `e2 <= dx`
/// steps y). It is always traced from the smaller endpoint in `PixelCoord`
/// order and reversed when needed, so `bresenham_line(b, a)` is exactly the
/// reverse of `bresenham_line(a, b)`.
pub fn bresenham_line(a: PixelCoord, b: PixelCoord) -> Vec<PixelCoord> {
    let mut out = Vec::new();
    bresenham_into(a, b, &mut out);
    out
}

/// Appends the trace of `bresenham_line(a, b)` to `out`.
pub fn bresenham_into(a: PixelCoord, b: PixelCoord, out: &mut Vec<PixelCoord>) {
    let start = out.len();
    let (from, to, reversed) = if b < a { (b, a, true) } else { (a, b, false) };
    let dx = (to.x - from.x).abs();
    let dy = -(to.y - from.y).abs();
    let sx = if from.x < to.x { 1 } else { -1 };
    let sy = if from.y < to.y { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (from.x, from.y);
    loop {
        out.push(PixelCoord::new(x, y));
        if x == to.x && y == to.y {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    if reversed {
        out[start..].reverse();
    }
}

/// Binary dilation. Out-of-bounds pixels count as unset.
pub fn dilate(m: &BinaryMask, iterations: usize, connectivity: Connectivity) -> BinaryMask {
    let mut cur = m.clone();
    for _ in 0..iterations {
        let mut next = cur.clone();
        for p in cur.iter_set() {
            for &(dx, dy) in connectivity.offsets() {
                next.set(p.offset(dx, dy), true);
            }
        }
        cur = next;
    }
    cur
}

/// Binary erosion. Out-of-bounds pixels count as unset, so masks shrink at
/// the grid border.
pub fn erode(m: &BinaryMask, iterations: usize, connectivity: Connectivity) -> BinaryMask {
    let mut cur = m.clone();
    for _ in 0..iterations {
        let mut next = BinaryMask::new(cur.width, cur.height);
        for p in cur.iter_set() {
            if connectivity
                .offsets()
                .iter()
                .all(|&(dx, dy)| cur.get(p.offset(dx, dy)))
            {
                next.set(p, true);
            }
        }
        cur = next;
    }
    cur
}

/// Tight box around the set pixels, grown by `margin` and clamped to the mask.
pub fn bounding_box(m: &BinaryMask, margin: usize) -> Result<BoundingBox, GridError> {
    let mut it = m.iter_set();
    let first = it.next().ok_or(GridError::EmptyMask)?;
    let (mut min, mut max) = (first, first);
    for p in it {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    let margin = margin as i32;
    Ok(BoundingBox::new(
        PixelCoord::new((min.x - margin).max(0), (min.y - margin).max(0)),
        PixelCoord::new(
            (max.x + margin).min(m.width as i32 - 1),
            (max.y + margin).min(m.height as i32 - 1),
        ),
    ))
}

/// Lattice points lying exactly on the closed segment `a`-`b`.
pub fn lattice_points_on_segment(a: PixelCoord, b: PixelCoord) -> impl Iterator<Item = PixelCoord> {
    let dx = (b.x - a.x) as i64;
    let dy = (b.y - a.y) as i64;
    let g = math::gcd(dx, dy).max(1);
    let (sx, sy) = ((dx / g) as i32, (dy / g) as i32);
    let steps = if dx == 0 && dy == 0 { 0 } else { g as i32 };
    (0..=steps).map(move |k| PixelCoord::new(a.x + k * sx, a.y + k * sy))
}

/// Even-odd scanline fill of the polygon `corners` (closed implicitly).
///
/// Only pixels whose centres lie strictly inside are set: pixels exactly on
/// the polygon boundary stay unset, so two rooms sharing a wall get disjoint
/// fills.
pub fn fill_polygon(corners: &[PixelCoord], width: usize, height: usize) -> BinaryMask {
    let mut mask = BinaryMask::new(width, height);
    let n = corners.len();
    if n < 3 {
        return mask;
    }
    let mut xs: Vec<f64> = Vec::new();
    for y in 0..height as i32 {
        xs.clear();
        for i in 0..n {
            let a = corners[i];
            let b = corners[(i + 1) % n];
            if a.y == b.y {
                continue;
            }
            let (lo, hi) = if a.y < b.y { (a, b) } else { (b, a) };
            if y < lo.y || y >= hi.y {
                continue;
            }
            let t = (y - lo.y) as f64 / (hi.y - lo.y) as f64;
            xs.push(lo.x as f64 + t * (hi.x - lo.x) as f64);
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let x0 = math::floor(pair[0]) as i32 + 1;
            let x1 = pair[1];
            let mut x = x0.max(0);
            while (x as f64) < x1 && (x as usize) < width {
                mask.set(PixelCoord::new(x, y), true);
                x += 1;
            }
        }
    }
    for i in 0..n {
        for p in lattice_points_on_segment(corners[i], corners[(i + 1) % n]) {
            mask.set(p, false);
        }
    }
    mask
}
