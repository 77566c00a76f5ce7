//! The reconstruction objective.
//!
//! For a set of loops the energy is
//!
//! ```text
//!   sum_i data(L_i) + consistency(all loops) + sum_i model(L_i)
//! ```
//!
//! - data: `λ1 (1 - corner(p))` over each loop's corner pixels, plus
//!   `λ2 (1 - edge(p)) + λ3 [p in any room segment]` over its edge pixels;
//! - consistency: `λ4` per pixel used as a corner by at least one loop plus
//!   `λ5` per pixel used as an edge pixel by at least one loop;
//! - model: `λ6` per corner.
//!
//! Everything here works on pixel *sets*; the solver's additive edge weights
//! must agree with these functions on pixel-simple loops.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::frames::ManhattanFrame;
use crate::grid::{bresenham_into, BinaryMask, Grid2D, PixelCoord};

/// Term weights, `λ1` to `λ6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    /// λ1, corner likelihood penalty.
    pub corner_data: f64,
    /// λ2, edge likelihood penalty.
    pub edge_data: f64,
    /// λ3, the large constant charged per edge pixel inside a room segment.
    pub interior: f64,
    /// λ4, per pixel used as a corner by any loop.
    pub corner_consistency: f64,
    /// λ5, per pixel used as an edge pixel by any loop.
    pub edge_consistency: f64,
    /// λ6, per corner.
    pub model: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            corner_data: 0.2,
            edge_data: 0.2,
            interior: 100.0,
            corner_consistency: 0.2,
            edge_consistency: 0.1,
            model: 1.0,
        }
    }
}

impl Weights {
    pub fn zero() -> Self {
        Self {
            corner_data: 0.0,
            edge_data: 0.0,
            interior: 0.0,
            corner_consistency: 0.0,
            edge_consistency: 0.0,
            model: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.corner_data,
            self.edge_data,
            self.interior,
            self.corner_consistency,
            self.edge_consistency,
            self.model,
        ]
    }

    pub fn is_valid(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoopError {
    TooFewCorners(usize),
    RepeatedCorner(usize),
}

impl fmt::Display for LoopError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoopError::TooFewCorners(n) => write!(f, "a loop needs at least 3 corners, got {n}"),
            LoopError::RepeatedCorner(i) => {
                write!(f, "corner {i} repeats the previous corner")
            }
        }
    }
}

impl core::error::Error for LoopError {}

/// Closed polygonal curve through integer pixels; the last corner connects
/// back to the first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LoopPolygon {
    corners: Vec<PixelCoord>,
}

impl LoopPolygon {
    pub fn new(corners: Vec<PixelCoord>) -> Result<Self, LoopError> {
        let n = corners.len();
        if n < 3 {
            return Err(LoopError::TooFewCorners(n));
        }
        for i in 0..n {
            if corners[i] == corners[(i + n - 1) % n] {
                return Err(LoopError::RepeatedCorner(i));
            }
        }
        Ok(Self { corners })
    }

    /// Axis-aligned rectangle through two opposite corners.
    pub fn rectangle(min: PixelCoord, max: PixelCoord) -> Result<Self, LoopError> {
        Self::new(alloc::vec![
            min,
            PixelCoord::new(max.x, min.y),
            max,
            PixelCoord::new(min.x, max.y),
        ])
    }

    pub fn corners(&self) -> &[PixelCoord] {
        &self.corners
    }

    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    /// Directed edges `(corner[i], corner[i + 1])`, wrapping around.
    pub fn edges(&self) -> impl Iterator<Item = (PixelCoord, PixelCoord)> + '_ {
        let n = self.corners.len();
        (0..n).map(move |i| (self.corners[i], self.corners[(i + 1) % n]))
    }

    /// Same loop started at another corner.
    pub fn rotated(&self, shift: usize) -> Self {
        let mut c = self.corners.clone();
        let n = c.len();
        c.rotate_left(shift % n);
        Self { corners: c }
    }

    pub fn reversed(&self) -> Self {
        let mut c = self.corners.clone();
        c.reverse();
        Self { corners: c }
    }

    /// Traversal pixels with multiplicity: each edge contributes its Bresenham
    /// trace minus its destination corner.
    pub fn traversal_pixels(&self) -> Vec<PixelCoord> {
        let mut out = Vec::new();
        let mut buf = Vec::new();
        for (a, b) in self.edges() {
            buf.clear();
            bresenham_into(a, b, &mut buf);
            buf.pop();
            out.extend_from_slice(&buf);
        }
        out
    }

    /// `true` when no pixel is traversed twice, i.e. the loop's edge pixels
    /// are exactly the sum of its per-edge traces.
    pub fn is_pixel_simple(&self) -> bool {
        let t = self.traversal_pixels();
        let set: BTreeSet<_> = t.iter().copied().collect();
        set.len() == t.len()
    }

    /// Signed area by the shoelace formula (positive for clockwise loops in
    /// image coordinates).
    pub fn signed_area(&self) -> f64 {
        let mut s = 0i64;
        for (a, b) in self.edges() {
            s += a.x as i64 * b.y as i64 - b.x as i64 * a.y as i64;
        }
        s as f64 / 2.0
    }
}

/// Corner pixel set `C(L)`, duplicates collapsed.
pub fn loop_corner_pixels(l: &LoopPolygon) -> BTreeSet<PixelCoord> {
    l.corners.iter().copied().collect()
}

/// Edge pixel set `E(L)`: union of the Bresenham traces of all edges.
pub fn loop_edge_pixels(l: &LoopPolygon) -> BTreeSet<PixelCoord> {
    l.traversal_pixels().into_iter().collect()
}

/// Inputs of the data term: likelihood maps and the union of all room
/// segments (the interior-penalty region).
#[derive(Debug, Clone)]
pub struct DataMaps {
    pub corner: Grid2D,
    pub edge: Grid2D,
    pub occupied: BinaryMask,
}

impl DataMaps {
    pub fn new(corner: Grid2D, edge: Grid2D, segments: &[BinaryMask]) -> Self {
        let mut occupied = BinaryMask::new(corner.width(), corner.height());
        for s in segments {
            occupied.union_with(s);
        }
        Self {
            corner,
            edge,
            occupied,
        }
    }

    pub fn width(&self) -> usize {
        self.corner.width()
    }

    pub fn height(&self) -> usize {
        self.corner.height()
    }

    /// `1 - corner likelihood`, with off-grid pixels fully penalized.
    pub fn corner_penalty(&self, p: PixelCoord) -> f64 {
        1.0 - self.corner.get_or_zero(p) as f64
    }

    pub fn edge_penalty(&self, p: PixelCoord) -> f64 {
        1.0 - self.edge.get_or_zero(p) as f64
    }

    pub fn is_occupied(&self, p: PixelCoord) -> bool {
        self.occupied.get(p)
    }
}

/// Data term split by component, already weighted.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DataTerms {
    pub corner: f64,
    pub edge: f64,
    pub interior: f64,
}

impl DataTerms {
    pub fn total(&self) -> f64 {
        self.corner + self.edge + self.interior
    }
}

pub fn data_term(l: &LoopPolygon, maps: &DataMaps, w: &Weights) -> DataTerms {
    let mut t = DataTerms::default();
    for p in loop_corner_pixels(l) {
        t.corner += w.corner_data * maps.corner_penalty(p);
    }
    for p in loop_edge_pixels(l) {
        t.edge += w.edge_data * maps.edge_penalty(p);
        if maps.is_occupied(p) {
            t.interior += w.interior;
        }
    }
    t
}

/// `(λ4 |∪ C(L_i)|, λ5 |∪ E(L_i)|)`.
pub fn consistency_parts<'a>(
    loops: impl IntoIterator<Item = &'a LoopPolygon>,
    w: &Weights,
) -> (f64, f64) {
    let mut corners = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for l in loops {
        corners.extend(l.corners.iter().copied());
        edges.extend(l.traversal_pixels());
    }
    (
        w.corner_consistency * corners.len() as f64,
        w.edge_consistency * edges.len() as f64,
    )
}

pub fn consistency_term<'a>(loops: impl IntoIterator<Item = &'a LoopPolygon>, w: &Weights) -> f64 {
    let (c, e) = consistency_parts(loops, w);
    c + e
}

pub fn model_term(l: &LoopPolygon, w: &Weights) -> f64 {
    w.model * l.len() as f64
}

/// Loops of a reconstruction in progress. `loops[i]` is `None` until room
/// `i` has been solved once.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorplanState {
    pub loops: Vec<Option<LoopPolygon>>,
    /// Manhattan frames each room's loop was solved with.
    pub frames: Vec<Vec<ManhattanFrame>>,
    pub weights: Weights,
}

impl FloorplanState {
    pub fn new(rooms: usize, weights: Weights) -> Self {
        Self {
            loops: alloc::vec![None; rooms],
            frames: alloc::vec![Vec::new(); rooms],
            weights,
        }
    }

    pub fn rooms(&self) -> usize {
        self.loops.len()
    }

    pub fn solved_loops(&self) -> impl Iterator<Item = &LoopPolygon> + Clone {
        self.loops.iter().flatten()
    }
}

/// Every weighted term of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub corner_data: f64,
    pub edge_data: f64,
    pub interior: f64,
    pub corner_consistency: f64,
    pub edge_consistency: f64,
    pub model: f64,
}

impl EnergyBreakdown {
    pub fn data(&self) -> f64 {
        self.corner_data + self.edge_data + self.interior
    }

    pub fn consistency(&self) -> f64 {
        self.corner_consistency + self.edge_consistency
    }

    pub fn total(&self) -> f64 {
        self.data() + self.consistency() + self.model
    }
}

/// Exact objective of all solved loops in `state`.
pub fn total_energy(state: &FloorplanState, maps: &DataMaps) -> EnergyBreakdown {
    energy_of_loops(state.solved_loops(), maps, &state.weights)
}

pub fn energy_of_loops<'a>(
    loops: impl IntoIterator<Item = &'a LoopPolygon> + Clone,
    maps: &DataMaps,
    w: &Weights,
) -> EnergyBreakdown {
    let mut b = EnergyBreakdown::default();
    for l in loops.clone() {
        let d = data_term(l, maps, w);
        b.corner_data += d.corner;
        b.edge_data += d.edge;
        b.interior += d.interior;
        b.model += model_term(l, w);
    }
    let (c, e) = consistency_parts(loops, w);
    b.corner_consistency = c;
    b.edge_consistency = e;
    b
}
