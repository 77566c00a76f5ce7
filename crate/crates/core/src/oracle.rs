//! Synthetic ground truth and its rendered likelihood maps.
//!
//! Plans are rendered the same way network supervision targets are: every
//! corner as a 7×7 block, every wall as a 5-pixel stroke carrying both its
//! own direction bin and the opposite one, and every room as an even-odd
//! filled interior eroded twice with an 8-connected neighbourhood.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::LoopPolygon;
use crate::grid::{erode, fill_polygon, BinaryMask, Connectivity, Grid2D, PixelCoord};
use crate::math;

/// Half side of the square corner footprint (7×7).
pub const CORNER_RADIUS: i32 = 3;
/// Half width of the wall stroke (5 pixels wide).
pub const EDGE_HALF_WIDTH: f64 = 2.0;
pub const DIRECTION_BINS: usize = 36;
pub const BIN_DEGREES: f64 = 10.0;
pub const SEGMENT_EROSION: usize = 2;
pub const MAX_ROOMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    InvalidRoomCount(usize),
    GenerationFailed { attempts: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::InvalidRoomCount(n) => {
                write!(f, "room count {n} outside 1..={MAX_ROOMS}")
            }
            OracleError::GenerationFailed { attempts } => {
                write!(f, "no valid plan after {attempts} attempts")
            }
        }
    }
}

impl core::error::Error for OracleError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanRoom {
    pub id: usize,
    pub outline: LoopPolygon,
}

/// Annotated floorplan: one closed loop per room, interiors pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthPlan {
    pub width: usize,
    pub height: usize,
    pub rooms: Vec<PlanRoom>,
}

impl GroundTruthPlan {
    pub fn loops(&self) -> Vec<LoopPolygon> {
        self.rooms.iter().map(|r| r.outline.clone()).collect()
    }

    /// Rooms with at least one wall off the axis-aligned frame.
    pub fn non_manhattan_rooms(&self) -> usize {
        self.rooms
            .iter()
            .filter(|r| r.outline.edges().any(|(a, b)| a.x != b.x && a.y != b.y))
            .count()
    }
}

/// 36 stacked per-direction likelihood grids; bin `k` stands for `10·k`
/// degrees (image coordinates, y pointing down).
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionMap {
    pub bins: Vec<Grid2D>,
}

impl DirectionMap {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            bins: vec![Grid2D::zeros(width, height); DIRECTION_BINS],
        }
    }

    pub fn width(&self) -> usize {
        self.bins[0].width()
    }

    pub fn height(&self) -> usize {
        self.bins[0].height()
    }
}

/// Direction bin of the vector `(dx, dy)`: nearest multiple of 10°, halves
/// rounded up (so 45° falls in the 50° bin).
pub fn direction_bin(dx: f64, dy: f64) -> usize {
    let a = math::angle_deg(dx, dy);
    // Snap float noise so exact halves round deterministically.
    let q = math::round(a / BIN_DEGREES * 1e9) / 1e9;
    (math::floor(q + 0.5) as usize) % DIRECTION_BINS
}

/// Everything the optimizer consumes in place of network predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodBundle {
    pub corner: Grid2D,
    pub edge: Grid2D,
    pub direction: DirectionMap,
    pub segments: Vec<BinaryMask>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub size: usize,
    pub rooms: usize,
    pub non_manhattan_fraction: f64,
    /// Minimum room side length in pixels.
    pub min_room_side: i32,
    /// Minimum separation between distinct parallel wall coordinates and
    /// between distinct corners.
    pub min_gap: i32,
}

impl SynthConfig {
    pub fn new(rooms: usize, size: usize, non_manhattan_fraction: f64) -> Self {
        Self {
            size,
            rooms,
            non_manhattan_fraction,
            min_room_side: if size >= 192 { 28 } else { 22 },
            min_gap: 16,
        }
    }
}

const MAX_ATTEMPTS: usize = 64;
const CHAMFER_ANGLES: [i32; 4] = [30, 40, 50, 60];
const MIN_WALL: i32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rect {
    x0: i32,
    y0: i32,
    x1: i32,
    y1: i32,
}

impl Rect {
    fn area(&self) -> i64 {
        (self.x1 - self.x0) as i64 * (self.y1 - self.y0) as i64
    }
}

/// Generates a plan by recursive axis-aligned splits of a random outer
/// rectangle. `floor(fraction · n_rooms)` rooms get one exterior corner cut
/// by a wall at a non-axis angle (a multiple of 10°), which gives those
/// rooms a second Manhattan frame.
pub fn synth_plan(
    seed: u64,
    n_rooms: usize,
    size: usize,
    non_manhattan_fraction: f64,
) -> Result<GroundTruthPlan, OracleError> {
    synth_plan_with(seed, &SynthConfig::new(n_rooms, size, non_manhattan_fraction))
}

pub fn synth_plan_with(seed: u64, cfg: &SynthConfig) -> Result<GroundTruthPlan, OracleError> {
    if cfg.rooms == 0 || cfg.rooms > MAX_ROOMS {
        return Err(OracleError::InvalidRoomCount(cfg.rooms));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(plan) = try_plan(&mut rng, cfg) {
            return Ok(plan);
        }
    }
    Err(OracleError::GenerationFailed {
        attempts: MAX_ATTEMPTS,
    })
}

fn far_from(v: i32, coords: &[i32], gap: i32) -> bool {
    coords.iter().all(|&c| (c - v).abs() >= gap)
}

fn try_plan(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Option<GroundTruthPlan> {
    let size = cfg.size as i32;
    let margin = (size / 10).max(16);
    let slack = (size / 12).max(4);
    let region = Rect {
        x0: rng.gen_range(margin..margin + slack),
        y0: rng.gen_range(margin..margin + slack),
        x1: rng.gen_range(size - margin - slack..size - margin),
        y1: rng.gen_range(size - margin - slack..size - margin),
    };
    let mut rects = vec![region];
    let mut xs = vec![region.x0, region.x1];
    let mut ys = vec![region.y0, region.y1];
    let side = cfg.min_room_side;

    while rects.len() < cfg.rooms {
        let mut order: Vec<usize> = (0..rects.len()).collect();
        order.sort_by_key(|&i| (core::cmp::Reverse(rects[i].area()), i));
        let mut done = false;
        'rooms: for idx in order {
            let r = rects[idx];
            let vertical_first = (r.x1 - r.x0) >= (r.y1 - r.y0);
            for vertical in [vertical_first, !vertical_first] {
                let (lo, hi) = if vertical { (r.x0, r.x1) } else { (r.y0, r.y1) };
                if hi - lo < 2 * side {
                    continue;
                }
                for _ in 0..24 {
                    let c = rng.gen_range(lo + side..=hi - side);
                    let coords = if vertical { &mut xs } else { &mut ys };
                    if !far_from(c, coords, cfg.min_gap) {
                        continue;
                    }
                    coords.push(c);
                    let (a, b) = if vertical {
                        (Rect { x1: c, ..r }, Rect { x0: c, ..r })
                    } else {
                        (Rect { y1: c, ..r }, Rect { y0: c, ..r })
                    };
                    rects[idx] = a;
                    rects.push(b);
                    done = true;
                    break 'rooms;
                }
            }
        }
        if !done {
            return None;
        }
    }

    let mut outlines: Vec<Vec<PixelCoord>> = rects
        .iter()
        .map(|r| {
            vec![
                PixelCoord::new(r.x0, r.y0),
                PixelCoord::new(r.x1, r.y0),
                PixelCoord::new(r.x1, r.y1),
                PixelCoord::new(r.x0, r.y1),
            ]
        })
        .collect();

    let wanted = math::floor(cfg.non_manhattan_fraction.clamp(0.0, 1.0) * cfg.rooms as f64 + 1e-9)
        as usize;
    let mut cut = BTreeSet::new();
    for _ in 0..wanted {
        if !add_chamfer(rng, &rects, &region, &mut outlines, &mut cut, cfg) {
            return None;
        }
    }

    let rooms = outlines
        .into_iter()
        .enumerate()
        .map(|(id, c)| {
            Some(PlanRoom {
                id,
                outline: LoopPolygon::new(c).ok()?,
            })
        })
        .collect::<Option<Vec<_>>>()?;
    Some(GroundTruthPlan {
        width: cfg.size,
        height: cfg.size,
        rooms,
    })
}

// Cuts one exterior region corner of a room with a slanted wall.
fn add_chamfer(
    rng: &mut ChaCha8Rng,
    rects: &[Rect],
    region: &Rect,
    outlines: &mut [Vec<PixelCoord>],
    cut: &mut BTreeSet<usize>,
    cfg: &SynthConfig,
) -> bool {
    // (room, corner slot 0..4 clockwise from top-left)
    let mut options = Vec::new();
    for (i, r) in rects.iter().enumerate() {
        if cut.contains(&i) {
            continue;
        }
        let slots = [
            (r.x0 == region.x0 && r.y0 == region.y0, 0usize),
            (r.x1 == region.x1 && r.y0 == region.y0, 1),
            (r.x1 == region.x1 && r.y1 == region.y1, 2),
            (r.x0 == region.x0 && r.y1 == region.y1, 3),
        ];
        for (ok, slot) in slots {
            if ok {
                options.push((i, slot));
            }
        }
    }
    if options.is_empty() {
        return false;
    }
    for _ in 0..32 {
        let (room, slot) = options[rng.gen_range(0..options.len())];
        let r = rects[room];
        let beta = CHAMFER_ANGLES[rng.gen_range(0..CHAMFER_ANGLES.len())];
        let limit = (r.x1 - r.x0).min(r.y1 - r.y0) - MIN_WALL;
        if limit < 20 {
            continue;
        }
        let t = rng.gen_range(20..=limit.min(40));
        // Clockwise traversal in image coordinates: the slanted wall heads
        // into quadrant `slot` (0: up-right, 1: down-right, ...).
        let base = [270, 0, 90, 180][slot];
        let phi = ((base + beta) as f64).to_radians();
        let dx = math::round(t as f64 * math::cos(phi)) as i32;
        let dy = math::round(t as f64 * math::sin(phi)) as i32;
        let (lx, ly) = (dx.abs(), dy.abs());
        if r.x1 - r.x0 - lx < MIN_WALL || r.y1 - r.y0 - ly < MIN_WALL {
            continue;
        }
        let (from, to) = match slot {
            0 => (PixelCoord::new(r.x0, r.y0 + ly), PixelCoord::new(r.x0 + lx, r.y0)),
            1 => (PixelCoord::new(r.x1 - lx, r.y0), PixelCoord::new(r.x1, r.y0 + ly)),
            2 => (PixelCoord::new(r.x1, r.y1 - ly), PixelCoord::new(r.x1 - lx, r.y1)),
            _ => (PixelCoord::new(r.x0 + lx, r.y1), PixelCoord::new(r.x0, r.y1 - ly)),
        };
        debug_assert_eq!((to.x - from.x, to.y - from.y), (dx, dy));
        let removed = outlines[room][slot];
        let gap2 = (cfg.min_gap as i64) * (cfg.min_gap as i64);
        let clear = outlines.iter().flatten().all(|&c| {
            c == removed || (c.dist_sq(from) >= gap2 && c.dist_sq(to) >= gap2)
        });
        if !clear {
            continue;
        }
        let o = &mut outlines[room];
        o.splice(slot..=slot, [from, to]);
        cut.insert(room);
        return true;
    }
    false
}

/// Corner likelihood: 1.0 on the 7×7 block around every corner.
pub fn render_corner_map(plan: &GroundTruthPlan) -> Grid2D {
    let mut g = Grid2D::zeros(plan.width, plan.height);
    for room in &plan.rooms {
        for &c in room.outline.corners() {
            stamp_block(&mut g, c, CORNER_RADIUS, 1.0);
        }
    }
    g
}

pub(crate) fn stamp_block(g: &mut Grid2D, c: PixelCoord, r: i32, v: f32) {
    for dy in -r..=r {
        for dx in -r..=r {
            let q = c.offset(dx, dy);
            if g.contains(q) {
                g.set(q, v);
            }
        }
    }
}

/// Pixels whose centre lies within `half_width` of the segment `a`-`b`.
pub fn stroke_pixels(a: PixelCoord, b: PixelCoord, half_width: f64, width: usize, height: usize) -> Vec<PixelCoord> {
    let r = math::floor(half_width) as i32 + 1;
    let (x0, x1) = (a.x.min(b.x) - r, a.x.max(b.x) + r);
    let (y0, y1) = (a.y.min(b.y) - r, a.y.max(b.y) + r);
    let mut out = Vec::new();
    let (ax, ay) = (a.x as f64, a.y as f64);
    let (vx, vy) = ((b.x - a.x) as f64, (b.y - a.y) as f64);
    let len2 = vx * vx + vy * vy;
    let hw2 = half_width * half_width + 1e-9;
    for y in y0.max(0)..=y1.min(height as i32 - 1) {
        for x in x0.max(0)..=x1.min(width as i32 - 1) {
            let (px, py) = (x as f64 - ax, y as f64 - ay);
            let t = if len2 > 0.0 {
                ((px * vx + py * vy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let (ex, ey) = (px - t * vx, py - t * vy);
            if ex * ex + ey * ey <= hw2 {
                out.push(PixelCoord::new(x, y));
            }
        }
    }
    out
}

/// Edge likelihood: 1.0 within distance 2 of any wall.
pub fn render_edge_map(plan: &GroundTruthPlan) -> Grid2D {
    let mut g = Grid2D::zeros(plan.width, plan.height);
    for room in &plan.rooms {
        for (a, b) in room.outline.edges() {
            for q in stroke_pixels(a, b, EDGE_HALF_WIDTH, plan.width, plan.height) {
                g.set(q, 1.0);
            }
        }
    }
    g
}

/// Direction likelihood: on each wall's stroke, the wall's direction bin and
/// the opposite bin are 1.0.
pub fn render_direction_map(plan: &GroundTruthPlan) -> DirectionMap {
    let mut d = DirectionMap::zeros(plan.width, plan.height);
    for room in &plan.rooms {
        for (a, b) in room.outline.edges() {
            let bin = direction_bin((b.x - a.x) as f64, (b.y - a.y) as f64);
            let opposite = (bin + DIRECTION_BINS / 2) % DIRECTION_BINS;
            for q in stroke_pixels(a, b, EDGE_HALF_WIDTH, plan.width, plan.height) {
                d.bins[bin].set(q, 1.0);
                d.bins[opposite].set(q, 1.0);
            }
        }
    }
    d
}

/// One eroded interior mask per room.
pub fn render_room_segments(plan: &GroundTruthPlan, erosion_iters: usize) -> Vec<BinaryMask> {
    plan.rooms
        .iter()
        .map(|r| {
            let fill = fill_polygon(r.outline.corners(), plan.width, plan.height);
            erode(&fill, erosion_iters, Connectivity::Eight)
        })
        .collect()
}

/// Clean bundle with the default two erosions.
pub fn render_bundle(plan: &GroundTruthPlan) -> LikelihoodBundle {
    LikelihoodBundle {
        corner: render_corner_map(plan),
        edge: render_edge_map(plan),
        direction: render_direction_map(plan),
        segments: render_room_segments(plan, SEGMENT_EROSION),
    }
}

/// Degradations applied by [`perturb`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSpec {
    /// Uniform value noise amplitude for all likelihood maps.
    pub jitter: f32,
    /// Probability of deleting each connected blob of the corner map.
    pub p_drop: f64,
    /// Per-pixel probability of stamping a spurious corner block.
    pub p_spur: f64,
    /// Probability of flipping each segment boundary pixel.
    pub mask_flip: f64,
}

impl NoiseSpec {
    pub fn is_zero(&self) -> bool {
        self.jitter == 0.0 && self.p_drop == 0.0 && self.p_spur == 0.0 && self.mask_flip == 0.0
    }
}

/// What [`perturb_with_report`] changed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PerturbReport {
    pub blobs: usize,
    pub dropped: usize,
    pub spurious: Vec<PixelCoord>,
}

pub fn perturb(bundle: &LikelihoodBundle, noise: &NoiseSpec, seed: u64) -> LikelihoodBundle {
    perturb_with_report(bundle, noise, seed).0
}

/// Applies, in order: corner-blob dropout, spurious corners, value jitter and
/// segment boundary flips. Deterministic for a fixed seed.
pub fn perturb_with_report(
    bundle: &LikelihoodBundle,
    noise: &NoiseSpec,
    seed: u64,
) -> (LikelihoodBundle, PerturbReport) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = bundle.clone();
    let mut report = PerturbReport::default();

    if noise.p_drop > 0.0 {
        let blobs = corner_blobs(&out.corner);
        report.blobs = blobs.len();
        for blob in blobs {
            if rng.gen_bool(noise.p_drop.min(1.0)) {
                report.dropped += 1;
                for q in blob {
                    out.corner.set(q, 0.0);
                }
            }
        }
    }

    if noise.p_spur > 0.0 {
        let (w, h) = (out.corner.width(), out.corner.height());
        for y in 0..h as i32 {
            for x in 0..w as i32 {
                if rng.gen_bool(noise.p_spur.min(1.0)) {
                    report.spurious.push(PixelCoord::new(x, y));
                }
            }
        }
        for &c in &report.spurious {
            stamp_block(&mut out.corner, c, CORNER_RADIUS, 1.0);
        }
    }

    if noise.jitter > 0.0 {
        let j = noise.jitter;
        let grids = core::iter::once(&mut out.corner)
            .chain(core::iter::once(&mut out.edge))
            .chain(out.direction.bins.iter_mut());
        for g in grids {
            for v in g.values_mut() {
                *v = (*v + rng.gen_range(-j..=j)).clamp(0.0, 1.0);
            }
        }
    }

    if noise.mask_flip > 0.0 {
        for seg in out.segments.iter_mut() {
            let original = seg.clone();
            let (w, h) = (seg.width() as i32, seg.height() as i32);
            for y in 0..h {
                for x in 0..w {
                    let q = PixelCoord::new(x, y);
                    let v = original.get(q);
                    let boundary = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                        .iter()
                        .any(|&(dx, dy)| {
                            let n = q.offset(dx, dy);
                            original.contains(n) && original.get(n) != v
                        });
                    if boundary && rng.gen_bool(noise.mask_flip.min(1.0)) {
                        seg.set(q, !v);
                    }
                }
            }
        }
    }
    (out, report)
}

// 8-connected components of non-zero corner pixels, in scan order.
fn corner_blobs(g: &Grid2D) -> Vec<Vec<PixelCoord>> {
    let (w, h) = (g.width(), g.height());
    let mut seen = vec![false; w * h];
    let mut blobs = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if seen[start] || g.values()[start] <= 0.0 {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut blob = Vec::new();
        while let Some(i) = stack.pop() {
            let q = PixelCoord::new((i % w) as i32, (i / w) as i32);
            blob.push(q);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let n = q.offset(dx, dy);
                    if !g.contains(n) {
                        continue;
                    }
                    let j = n.y as usize * w + n.x as usize;
                    if !seen[j] && g.values()[j] > 0.0 {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        blobs.push(blob);
    }
    blobs
}
