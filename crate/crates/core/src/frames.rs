//! Dominant Manhattan frames and the per-room direction alphabet.

use alloc::vec::Vec;

use crate::energy::LoopPolygon;
use crate::grid::{bresenham_line, BoundingBox};
use crate::math;
use crate::oracle::{DirectionMap, BIN_DEGREES, DIRECTION_BINS};

/// Number of distinct frames on a 10° lattice.
pub const FRAME_CANDIDATES: usize = 9;
pub const GLOBAL_FRAMES: usize = 4;
pub const FRAMES_PER_ROOM: usize = 2;
pub const DEFAULT_TOLERANCE_DEG: f64 = 5.0;

/// Four mutually orthogonal directions `{θ, θ+90, θ+180, θ+270}` with
/// `θ = 10° · bin`, `bin < 9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ManhattanFrame {
    bin: u8,
}

impl ManhattanFrame {
    pub fn new(bin: usize) -> Option<Self> {
        (bin < FRAME_CANDIDATES).then_some(Self { bin: bin as u8 })
    }

    /// Frame containing the direction `theta` (degrees), rounded to the
    /// nearest 10°.
    pub fn from_degrees(theta: f64) -> Self {
        let t = theta - 90.0 * math::floor(theta / 90.0);
        let bin = (math::floor(t / BIN_DEGREES + 0.5) as usize) % FRAME_CANDIDATES;
        Self { bin: bin as u8 }
    }

    pub fn bin(&self) -> usize {
        self.bin as usize
    }

    pub fn theta_deg(&self) -> f64 {
        self.bin as f64 * BIN_DEGREES
    }

    pub fn directions_deg(&self) -> [f64; 4] {
        let t = self.theta_deg();
        [t, t + 90.0, t + 180.0, t + 270.0]
    }

    /// Indices of the four direction bins in a 36-bin stack.
    pub fn direction_bins(&self) -> [usize; 4] {
        let b = self.bin();
        [b, b + 9, b + 18, b + 27]
    }

    /// `true` when the vector `(dx, dy)` lies within `tolerance` degrees of
    /// one of the frame's directions.
    pub fn admits(&self, dx: f64, dy: f64, tolerance: f64) -> bool {
        let a = math::angle_deg(dx, dy);
        self.directions_deg()
            .iter()
            .any(|&d| math::angle_diff_deg(a, d) <= tolerance + 1e-9)
    }
}

/// Directions an edge may take, each admitted with an angular tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionAlphabet {
    frames: Vec<ManhattanFrame>,
    tolerance: f64,
}

impl DirectionAlphabet {
    /// Frames are deduplicated and sorted. An empty list falls back to the
    /// axis-aligned frame so the alphabet always holds one full frame.
    pub fn new(mut frames: Vec<ManhattanFrame>, tolerance: f64) -> Self {
        frames.sort();
        frames.dedup();
        if frames.is_empty() {
            frames.push(ManhattanFrame { bin: 0 });
        }
        Self { frames, tolerance }
    }

    pub fn axis_aligned() -> Self {
        Self::new(alloc::vec![ManhattanFrame { bin: 0 }], DEFAULT_TOLERANCE_DEG)
    }

    pub fn frames(&self) -> &[ManhattanFrame] {
        &self.frames
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// All directions in degrees, ascending.
    pub fn directions_deg(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self
            .frames
            .iter()
            .flat_map(|f| f.directions_deg())
            .collect();
        d.sort_by(f64::total_cmp);
        d
    }

    /// Unit vectors in image coordinates, in the order of
    /// [`directions_deg`](Self::directions_deg).
    pub fn unit_vectors(&self) -> Vec<(f64, f64)> {
        self.directions_deg()
            .into_iter()
            .map(|d| {
                let r = d.to_radians();
                (math::cos(r), math::sin(r))
            })
            .collect()
    }

    pub fn admits(&self, dx: f64, dy: f64) -> bool {
        if dx == 0.0 && dy == 0.0 {
            return false;
        }
        self.frames.iter().any(|f| f.admits(dx, dy, self.tolerance))
    }
}

fn frame_scores(direction: &DirectionMap, bbox: Option<&BoundingBox>) -> [f64; FRAME_CANDIDATES] {
    let mut bin_sums = [0.0f64; DIRECTION_BINS];
    for (k, g) in direction.bins.iter().enumerate().take(DIRECTION_BINS) {
        let w = g.width();
        let mut s = 0.0;
        match bbox {
            None => {
                for &v in g.values() {
                    s += v as f64;
                }
            }
            Some(b) => {
                for y in b.min.y..=b.max.y {
                    let row = y as usize * w;
                    for x in b.min.x..=b.max.x {
                        s += g.values()[row + x as usize] as f64;
                    }
                }
            }
        }
        bin_sums[k] = s;
    }
    let mut scores = [0.0; FRAME_CANDIDATES];
    for (f, score) in scores.iter_mut().enumerate() {
        *score = (0..4).map(|i| bin_sums[f + 9 * i]).sum();
    }
    scores
}

fn ranked(scores: &[f64; FRAME_CANDIDATES], among: &[ManhattanFrame]) -> Vec<(ManhattanFrame, f64)> {
    let mut r: Vec<_> = among.iter().map(|&f| (f, scores[f.bin()])).collect();
    r.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    r
}

/// The four frames with the largest summed likelihood over their four
/// direction bins, descending, ties to the smaller angle.
pub fn extract_global_frames(direction: &DirectionMap) -> Vec<ManhattanFrame> {
    let scores = frame_scores(direction, None);
    let all: Vec<_> = (0..FRAME_CANDIDATES).map(|b| ManhattanFrame { bin: b as u8 }).collect();
    ranked(&scores, &all)
        .into_iter()
        .take(GLOBAL_FRAMES)
        .map(|(f, _)| f)
        .collect()
}

/// Frames actually used by the edges of `l` (within `tolerance`).
pub fn frames_of_loop(l: &LoopPolygon, tolerance: f64) -> Vec<ManhattanFrame> {
    let mut out: Vec<ManhattanFrame> = Vec::new();
    for (a, b) in l.edges() {
        let (dx, dy) = ((b.x - a.x) as f64, (b.y - a.y) as f64);
        let f = ManhattanFrame::from_degrees(math::angle_deg(dx, dy));
        if f.admits(dx, dy, tolerance) && !out.contains(&f) {
            out.push(f);
        }
    }
    out.sort();
    out
}

/// Alphabet for one room: the two global frames with the most likelihood
/// inside the room's box (frames without any support there are skipped),
/// plus every frame used by an already solved neighbouring loop that passes
/// through the box. Without any direction signal the top two global frames
/// are used.
pub fn assign_room_frames(
    global: &[ManhattanFrame],
    direction: &DirectionMap,
    bbox: &BoundingBox,
    neighbors: &[&LoopPolygon],
    tolerance: f64,
) -> DirectionAlphabet {
    let scores = frame_scores(direction, Some(bbox));
    let ranks = ranked(&scores, global);
    let mut chosen: Vec<ManhattanFrame> = ranks
        .iter()
        .filter(|(_, s)| *s > 0.0)
        .take(FRAMES_PER_ROOM)
        .map(|(f, _)| *f)
        .collect();
    if chosen.is_empty() {
        chosen = global.iter().take(FRAMES_PER_ROOM).copied().collect();
    }
    for l in neighbors {
        let touches = l
            .edges()
            .any(|(a, b)| bresenham_line(a, b).iter().any(|&p| bbox.contains(p)));
        if touches {
            chosen.extend(frames_of_loop(l, tolerance));
        }
    }
    DirectionAlphabet::new(chosen, tolerance)
}
