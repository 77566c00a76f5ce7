//! One coordinate-descent step: the cheapest loop around a single room.
//!
//! Every pixel of the room's box is a graph node. From each node, edges run
//! along every alphabet direction to every reachable pixel `p + round(t·d)`.
//! An edge's weight charges half of each endpoint's corner cost and the full
//! cost of its trace minus the destination pixel, so summing weights around a
//! closed loop reproduces the loop-dependent part of the objective exactly.
//!
//! Containment is enforced by a start-edge, a confident wall next to the
//! room, and a start-line cutting perpendicularly through its midpoint from
//! inside the room segment to the box boundary. Removing every edge that
//! touches the start-line leaves only paths between the start-edge endpoints
//! that wrap around the segment.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};
use core::fmt;

use crate::energy::{DataMaps, LoopPolygon, Weights};
use crate::frames::DirectionAlphabet;
use crate::grid::{
    bounding_box, bresenham_into, bresenham_line, dilate, BinaryMask, BoundingBox, Connectivity,
    Grid2D, GridError, PixelCoord,
};
use crate::math;

pub const DEFAULT_NMS_RADIUS: i32 = 3;
pub const DEFAULT_NMS_THRESHOLD: f32 = 0.5;
pub const BBOX_DILATION: usize = 10;
pub const BBOX_MARGIN: usize = 5;
/// Margin of the fallback rectangle around the segment's tight box.
pub const FALLBACK_MARGIN: usize = 2;
/// Segments smaller than this go straight to the fallback rectangle.
pub const MIN_SEGMENT_PIXELS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub nms_radius: i32,
    pub nms_threshold: f32,
    pub dilation: usize,
    pub margin: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            nms_radius: DEFAULT_NMS_RADIUS,
            nms_threshold: DEFAULT_NMS_THRESHOLD,
            dilation: BBOX_DILATION,
            margin: BBOX_MARGIN,
        }
    }
}

/// Why a room ended up with its fallback rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    SmallSegment,
    NoStartEdge,
    NoPath,
}

impl fmt::Display for Fallback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fallback::SmallSegment => "segment too small",
            Fallback::NoStartEdge => "no start-edge",
            Fallback::NoPath => "no path around the segment",
        })
    }
}

/// Search box of a room: the segment dilated ten times, plus a margin.
pub fn room_bbox(segment: &BinaryMask, cfg: &SolverConfig) -> Result<BoundingBox, GridError> {
    bounding_box(&dilate(segment, cfg.dilation, Connectivity::Four), cfg.margin)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateCorner {
    pub position: PixelCoord,
    pub score: f32,
}

/// Peaks of the corner map inside `bbox`.
///
/// Each pixel is scored by the corner mass in its `(2r+1)²` window, which
/// puts a flat 7×7 block's peak at its centre. Pixels at or above `threshold`
/// whose score is a maximum within Chebyshev distance `r` are then
/// suppressed greedily, strongest first. The result is sorted by
/// likelihood, descending, then by position.
pub fn detect_corner_candidates(
    corner: &Grid2D,
    bbox: &BoundingBox,
    nms_radius: i32,
    threshold: f32,
) -> Vec<CandidateCorner> {
    let r = nms_radius.max(0);
    let (w, h) = (corner.width(), corner.height());
    let mut integral = vec![0.0f64; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += corner.values()[y * w + x] as f64;
            integral[(y + 1) * (w + 1) + x + 1] = integral[y * (w + 1) + x + 1] + row;
        }
    }
    let response = |p: PixelCoord| -> f64 {
        let x0 = (p.x - r).clamp(0, w as i32) as usize;
        let x1 = (p.x + r + 1).clamp(0, w as i32) as usize;
        let y0 = (p.y - r).clamp(0, h as i32) as usize;
        let y1 = (p.y + r + 1).clamp(0, h as i32) as usize;
        integral[y1 * (w + 1) + x1] - integral[y0 * (w + 1) + x1] - integral[y1 * (w + 1) + x0]
            + integral[y0 * (w + 1) + x0]
    };
    let mut ranked: Vec<(f64, PixelCoord)> = Vec::new();
    for y in bbox.min.y..=bbox.max.y {
        for x in bbox.min.x..=bbox.max.x {
            let p = PixelCoord::new(x, y);
            if !corner.contains(p) || corner.get(p) < threshold {
                continue;
            }
            let s = response(p);
            let peak = (-r..=r).all(|dy| {
                (-r..=r).all(|dx| {
                    let q = p.offset(dx, dy);
                    !corner.contains(q) || response(q) <= s + 1e-9
                })
            });
            if peak {
                ranked.push((s, p));
            }
        }
    }
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut kept: Vec<PixelCoord> = Vec::new();
    for (_, p) in ranked {
        if kept
            .iter()
            .all(|k| (k.x - p.x).abs() > r || (k.y - p.y).abs() > r)
        {
            kept.push(p);
        }
    }
    let mut out: Vec<_> = kept
        .into_iter()
        .map(|p| CandidateCorner {
            position: p,
            score: corner.get(p),
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.position.cmp(&b.position)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartEdge {
    pub a: PixelCoord,
    pub b: PixelCoord,
    /// Mean edge likelihood along the trace.
    pub score: f64,
}

/// Cut through the start-edge's midpoint, perpendicular to it, running from
/// `origin` (a point over the room segment) past the box boundary to `end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartLine {
    pub origin: (f64, f64),
    pub through: (f64, f64),
    pub end: (f64, f64),
}

const ORIENT_EPS: f64 = 1e-7;

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn within(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
    c.0 >= a.0.min(b.0) - ORIENT_EPS
        && c.0 <= a.0.max(b.0) + ORIENT_EPS
        && c.1 >= a.1.min(b.1) - ORIENT_EPS
        && c.1 <= a.1.max(b.1) + ORIENT_EPS
}

/// Closed segment intersection: touching counts.
pub fn segments_touch(p: (f64, f64), q: (f64, f64), r: (f64, f64), s: (f64, f64)) -> bool {
    let d1 = orient(r, s, p);
    let d2 = orient(r, s, q);
    let d3 = orient(p, q, r);
    let d4 = orient(p, q, s);
    let opposite = |u: f64, v: f64| (u > ORIENT_EPS && v < -ORIENT_EPS) || (u < -ORIENT_EPS && v > ORIENT_EPS);
    if opposite(d1, d2) && opposite(d3, d4) {
        return true;
    }
    (d1.abs() <= ORIENT_EPS && within(r, s, p))
        || (d2.abs() <= ORIENT_EPS && within(r, s, q))
        || (d3.abs() <= ORIENT_EPS && within(p, q, r))
        || (d4.abs() <= ORIENT_EPS && within(p, q, s))
}

fn fp(p: PixelCoord) -> (f64, f64) {
    (p.x as f64, p.y as f64)
}

impl StartLine {
    pub fn crosses(&self, p: PixelCoord, q: PixelCoord) -> bool {
        segments_touch(fp(p), fp(q), self.origin, self.end)
    }
}

/// Start-line for the start-edge `a`-`b`: marches from the midpoint along the
/// perpendicular, on the side facing the segment's centroid first, until it
/// meets a segment pixel. `None` when neither side reaches the segment inside
/// the box.
pub fn start_line(
    a: PixelCoord,
    b: PixelCoord,
    segment: &BinaryMask,
    bbox: &BoundingBox,
) -> Option<StartLine> {
    if a == b {
        return None;
    }
    let m = ((a.x + b.x) as f64 / 2.0, (a.y + b.y) as f64 / 2.0);
    let (dx, dy) = ((b.x - a.x) as f64, (b.y - a.y) as f64);
    let len = math::hypot(dx, dy);
    let n = (-dy / len, dx / len);
    let (cx, cy) = segment.centroid()?;
    let facing = (cx - m.0) * n.0 + (cy - m.1) * n.1;
    let sides = if facing >= 0.0 { [1.0, -1.0] } else { [-1.0, 1.0] };
    let reach = (bbox.width() + bbox.height()) as f64 + 2.0;
    for s in sides {
        let mut t = 0.0;
        loop {
            t += 0.25;
            let pt = (m.0 + s * t * n.0, m.1 + s * t * n.1);
            let q = PixelCoord::new(math::round(pt.0) as i32, math::round(pt.1) as i32);
            if !bbox.contains(q) {
                break;
            }
            if segment.get(q) {
                return Some(StartLine {
                    origin: pt,
                    through: m,
                    end: (m.0 - s * reach * n.0, m.1 - s * reach * n.1),
                });
            }
        }
    }
    None
}

/// Best start-edge among candidate pairs: direction in the alphabet, trace
/// clear of the segment, and a perpendicular through the midpoint that meets
/// the segment. Highest mean edge likelihood wins; exact ties go to the
/// shorter pair, then to the lexicographically smaller endpoints.
pub fn select_start_edge(
    candidates: &[CandidateCorner],
    edge: &Grid2D,
    segment: &BinaryMask,
    alphabet: &DirectionAlphabet,
    bbox: &BoundingBox,
) -> Option<StartEdge> {
    let mut best: Option<(StartEdge, i64)> = None;
    let mut trace = Vec::new();
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            let (p, q) = (candidates[i].position, candidates[j].position);
            let (a, b) = if p < q { (p, q) } else { (q, p) };
            if a == b || !alphabet.admits((b.x - a.x) as f64, (b.y - a.y) as f64) {
                continue;
            }
            trace.clear();
            bresenham_into(a, b, &mut trace);
            if trace.iter().any(|&t| segment.get(t)) {
                continue;
            }
            let mean = trace.iter().map(|&t| edge.get_or_zero(t) as f64).sum::<f64>() / trace.len() as f64;
            let len = a.dist_sq(b);
            let better = match &best {
                None => true,
                Some((e, l)) => match mean.total_cmp(&e.score) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => (len, a, b) < (*l, e.a, e.b),
                },
            };
            if better && start_line(a, b, segment, bbox).is_some() {
                best = Some((StartEdge { a, b, score: mean }, len));
            }
        }
    }
    best.map(|(e, _)| e)
}

/// Pixels already claimed by the other rooms' loops.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageMap {
    pub corner: BinaryMask,
    pub edge: BinaryMask,
}

impl UsageMap {
    pub fn new(width: usize, height: usize, loops: &[&LoopPolygon]) -> Self {
        let mut corner = BinaryMask::new(width, height);
        let mut edge = BinaryMask::new(width, height);
        for l in loops {
            for &c in l.corners() {
                corner.set(c, true);
            }
            for p in l.traversal_pixels() {
                edge.set(p, true);
            }
        }
        Self { corner, edge }
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self::new(width, height, &[])
    }
}

fn endpoint_cost(p: PixelCoord, maps: &DataMaps, usage: &UsageMap, w: &Weights) -> f64 {
    let free = if usage.corner.get(p) { 0.0 } else { 1.0 };
    0.5 * w.corner_data * maps.corner_penalty(p) + 0.5 * w.corner_consistency * free
}

fn pixel_cost(p: PixelCoord, maps: &DataMaps, usage: &UsageMap, w: &Weights) -> f64 {
    let free = if usage.edge.get(p) { 0.0 } else { 1.0 };
    let inside = if maps.is_occupied(p) { 1.0 } else { 0.0 };
    w.edge_data * maps.edge_penalty(p) + w.interior * inside + w.edge_consistency * free
}

/// Weight of the directed edge `p → q`, evaluated straight from the maps.
pub fn edge_weight(p: PixelCoord, q: PixelCoord, maps: &DataMaps, usage: &UsageMap, w: &Weights) -> f64 {
    let mut s = endpoint_cost(p, maps, usage, w) + endpoint_cost(q, maps, usage, w);
    let trace = bresenham_line(p, q);
    for &t in &trace[..trace.len() - 1] {
        s += pixel_cost(t, maps, usage, w);
    }
    s + w.model
}

#[derive(Debug, Clone)]
struct RayStep {
    dx: i32,
    dy: i32,
    // Index offsets of the trace minus its destination; empty for axis steps.
    deltas: Vec<isize>,
}

#[derive(Debug, Clone)]
struct Ray {
    steps: Vec<RayStep>,
}

/// Pixel graph of one room step.
#[derive(Debug, Clone)]
pub struct RoomGraph {
    bbox: BoundingBox,
    w: usize,
    h: usize,
    endpoint: Vec<f64>,
    pixel: Vec<f64>,
    // row_prefix[y * (w + 1) + x] = Σ pixel cost of row y, columns < x.
    row_prefix: Vec<f64>,
    col_prefix: Vec<f64>,
    model: f64,
    rays: Vec<Ray>,
    start_line: Option<StartLine>,
    start_edge: Option<(PixelCoord, PixelCoord)>,
}

/// Builds the graph over `bbox` for `alphabet`. Edges that touch the
/// start-line are dropped, as is the start-edge itself.
pub fn build_room_graph(
    bbox: BoundingBox,
    alphabet: &DirectionAlphabet,
    start_line: Option<StartLine>,
    start_edge: Option<(PixelCoord, PixelCoord)>,
    maps: &DataMaps,
    usage: &UsageMap,
    weights: &Weights,
) -> RoomGraph {
    let (w, h) = (bbox.width(), bbox.height());
    let mut endpoint = vec![0.0; w * h];
    let mut pixel = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = bbox.min.offset(x as i32, y as i32);
            endpoint[y * w + x] = endpoint_cost(p, maps, usage, weights);
            pixel[y * w + x] = pixel_cost(p, maps, usage, weights);
        }
    }
    let mut row_prefix = vec![0.0; (w + 1) * h];
    for y in 0..h {
        for x in 0..w {
            row_prefix[y * (w + 1) + x + 1] = row_prefix[y * (w + 1) + x] + pixel[y * w + x];
        }
    }
    let mut col_prefix = vec![0.0; (h + 1) * w];
    for x in 0..w {
        for y in 0..h {
            col_prefix[x * (h + 1) + y + 1] = col_prefix[x * (h + 1) + y] + pixel[y * w + x];
        }
    }

    let reach = (w + h) as i32;
    let mut rays = Vec::new();
    let mut buf = Vec::new();
    for (deg, (ux, uy)) in alphabet.directions_deg().into_iter().zip(alphabet.unit_vectors()) {
        let mut steps: Vec<RayStep> = Vec::new();
        for t in 1..=reach {
            let dx = math::round(t as f64 * ux) as i32;
            let dy = math::round(t as f64 * uy) as i32;
            if (dx, dy) == (0, 0) || steps.last().is_some_and(|s| (s.dx, s.dy) == (dx, dy)) {
                continue;
            }
            let actual = math::angle_deg(dx as f64, dy as f64);
            if math::angle_diff_deg(actual, deg) > alphabet.tolerance() + 1e-9 {
                continue;
            }
            let deltas = if dx == 0 || dy == 0 {
                Vec::new()
            } else {
                buf.clear();
                bresenham_into(PixelCoord::new(0, 0), PixelCoord::new(dx, dy), &mut buf);
                buf.pop();
                buf.iter()
                    .map(|o| o.y as isize * w as isize + o.x as isize)
                    .collect()
            };
            steps.push(RayStep { dx, dy, deltas });
        }
        rays.push(Ray { steps });
    }

    RoomGraph {
        bbox,
        w,
        h,
        endpoint,
        pixel,
        row_prefix,
        col_prefix,
        model: weights.model,
        rays,
        start_line,
        start_edge,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost(f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl RoomGraph {
    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn start_line(&self) -> Option<&StartLine> {
        self.start_line.as_ref()
    }

    fn local(&self, p: PixelCoord) -> Option<usize> {
        if !self.bbox.contains(p) {
            return None;
        }
        Some((p.y - self.bbox.min.y) as usize * self.w + (p.x - self.bbox.min.x) as usize)
    }

    fn global(&self, i: usize) -> PixelCoord {
        self.bbox.min.offset((i % self.w) as i32, (i / self.w) as i32)
    }

    fn blocked(&self, p: PixelCoord, q: PixelCoord) -> bool {
        if let Some((a, b)) = self.start_edge {
            if (p == a && q == b) || (p == b && q == a) {
                return true;
            }
        }
        self.start_line.is_some_and(|l| l.crosses(p, q))
    }

    fn step_weight(&self, i: usize, x: usize, y: usize, st: &RayStep) -> f64 {
        let j = (i as isize + st.dy as isize * self.w as isize + st.dx as isize) as usize;
        let trace = if st.dy == 0 {
            let row = y * (self.w + 1);
            if st.dx > 0 {
                self.row_prefix[row + x + st.dx as usize] - self.row_prefix[row + x]
            } else {
                self.row_prefix[row + x + 1] - self.row_prefix[(row as isize + x as isize + st.dx as isize + 1) as usize]
            }
        } else if st.dx == 0 {
            let col = x * (self.h + 1);
            if st.dy > 0 {
                self.col_prefix[col + y + st.dy as usize] - self.col_prefix[col + y]
            } else {
                self.col_prefix[col + y + 1] - self.col_prefix[(col as isize + y as isize + st.dy as isize + 1) as usize]
            }
        } else {
            st.deltas
                .iter()
                .map(|&d| self.pixel[(i as isize + d) as usize])
                .sum()
        };
        self.endpoint[i] + self.endpoint[j] + trace + self.model
    }

    fn for_each_edge(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        let (x, y) = (i % self.w, i / self.w);
        let p = self.global(i);
        for ray in &self.rays {
            for st in &ray.steps {
                let (qx, qy) = (x as i32 + st.dx, y as i32 + st.dy);
                if qx < 0 || qy < 0 || qx >= self.w as i32 || qy >= self.h as i32 {
                    break;
                }
                let q = p.offset(st.dx, st.dy);
                if self.blocked(p, q) {
                    continue;
                }
                f(qy as usize * self.w + qx as usize, self.step_weight(i, x, y, st));
            }
        }
    }

    /// Outgoing edges of `p` with their weights.
    pub fn edges_from(&self, p: PixelCoord) -> Vec<(PixelCoord, f64)> {
        let mut out = Vec::new();
        if let Some(i) = self.local(p) {
            self.for_each_edge(i, |j, wt| out.push((self.global(j), wt)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        let mut n = 0;
        for i in 0..self.w * self.h {
            self.for_each_edge(i, |_, _| n += 1);
        }
        n
    }

    /// Weight of `p → q` computed from the graph's cost tables, for any two
    /// pixels of the box (the edge need not exist).
    pub fn segment_weight(&self, p: PixelCoord, q: PixelCoord) -> Option<f64> {
        let i = self.local(p)?;
        let j = self.local(q)?;
        let trace = bresenham_line(p, q);
        let mut s = self.endpoint[i] + self.endpoint[j] + self.model;
        for &t in &trace[..trace.len() - 1] {
            s += self.pixel[self.local(t)?];
        }
        Some(s)
    }

    /// Dijkstra from `a` to `b`. Returns the node sequence `a, ..., b` and its
    /// total weight.
    pub fn shortest_path(&self, a: PixelCoord, b: PixelCoord) -> Option<(Vec<PixelCoord>, f64)> {
        let src = self.local(a)?;
        let dst = self.local(b)?;
        let n = self.w * self.h;
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Reverse((Cost(0.0), src)));
        while let Some(Reverse((Cost(d), i))) = heap.pop() {
            if done[i] {
                continue;
            }
            done[i] = true;
            if i == dst {
                break;
            }
            self.for_each_edge(i, |j, wt| {
                let nd = d + wt;
                if !done[j] && nd < dist[j] {
                    dist[j] = nd;
                    prev[j] = i;
                    heap.push(Reverse((Cost(nd), j)));
                }
            });
        }
        if !done[dst] || src == dst {
            return None;
        }
        let mut path = vec![self.global(dst)];
        let mut i = dst;
        while i != src {
            i = prev[i];
            path.push(self.global(i));
        }
        path.reverse();
        Some((path, dist[dst]))
    }
}

/// Drops corners where the loop continues straight on.
pub fn fuse_colinear(l: &LoopPolygon) -> LoopPolygon {
    let mut c = l.corners().to_vec();
    let mut changed = true;
    while changed && c.len() > 3 {
        changed = false;
        let n = c.len();
        for i in 0..n {
            let (p, q, r) = (c[(i + n - 1) % n], c[i], c[(i + 1) % n]);
            let (ux, uy) = ((q.x - p.x) as i64, (q.y - p.y) as i64);
            let (vx, vy) = ((r.x - q.x) as i64, (r.y - q.y) as i64);
            if ux * vy - uy * vx == 0 && ux * vx + uy * vy > 0 {
                c.remove(i);
                changed = true;
                break;
            }
        }
    }
    LoopPolygon::new(c).unwrap_or_else(|_| l.clone())
}

/// Inputs of one room step.
#[derive(Debug, Clone, Copy)]
pub struct RoomProblem<'a> {
    pub maps: &'a DataMaps,
    pub segment: &'a BinaryMask,
    pub alphabet: &'a DirectionAlphabet,
    pub others: &'a [&'a LoopPolygon],
    pub weights: &'a Weights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomSolution {
    /// Loop with colinear corners fused.
    pub outline: LoopPolygon,
    /// Start-edge endpoints followed by the path, as found.
    pub raw: LoopPolygon,
    pub start_edge: Option<StartEdge>,
    /// Path and start-edge weights; `None` for fallback loops.
    pub path_weight: Option<f64>,
    pub start_edge_weight: Option<f64>,
    pub fallback: Option<Fallback>,
}

/// Rectangle around the segment's tight box, used when no loop can be found.
pub fn fallback_loop(segment: &BinaryMask) -> Option<LoopPolygon> {
    let b = bounding_box(segment, FALLBACK_MARGIN).ok()?;
    if b.min.x == b.max.x || b.min.y == b.max.y {
        return None;
    }
    LoopPolygon::rectangle(b.min, b.max).ok()
}

fn fallback(segment: &BinaryMask, why: Fallback, start_edge: Option<StartEdge>) -> Option<RoomSolution> {
    let l = fallback_loop(segment)?;
    Some(RoomSolution {
        outline: l.clone(),
        raw: l,
        start_edge,
        path_weight: None,
        start_edge_weight: None,
        fallback: Some(why),
    })
}

/// Solves one room against the fixed loops of the others. `None` only for
/// an empty segment.
pub fn solve_room(problem: &RoomProblem<'_>, cfg: &SolverConfig) -> Option<RoomSolution> {
    let seg = problem.segment;
    if seg.is_empty() {
        return None;
    }
    if seg.count() < MIN_SEGMENT_PIXELS {
        return fallback(seg, Fallback::SmallSegment, None);
    }
    let bbox = room_bbox(seg, cfg).ok()?;
    let maps = problem.maps;
    let cands = detect_corner_candidates(&maps.corner, &bbox, cfg.nms_radius, cfg.nms_threshold);
    let Some(se) = select_start_edge(&cands, &maps.edge, seg, problem.alphabet, &bbox) else {
        return fallback(seg, Fallback::NoStartEdge, None);
    };
    let line = start_line(se.a, se.b, seg, &bbox)?;
    let usage = UsageMap::new(maps.width(), maps.height(), problem.others);
    let graph = build_room_graph(
        bbox,
        problem.alphabet,
        Some(line),
        Some((se.a, se.b)),
        maps,
        &usage,
        problem.weights,
    );
    let Some((path, weight)) = graph.shortest_path(se.a, se.b) else {
        return fallback(seg, Fallback::NoPath, Some(se));
    };
    let Ok(raw) = LoopPolygon::new(path) else {
        return fallback(seg, Fallback::NoPath, Some(se));
    };
    Some(RoomSolution {
        outline: fuse_colinear(&raw),
        raw,
        start_edge: Some(se),
        path_weight: Some(weight),
        start_edge_weight: graph.segment_weight(se.b, se.a),
        fallback: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{energy_of_loops, loop_edge_pixels};
    use crate::frames::ManhattanFrame;
    use crate::oracle::{render_bundle, stamp_block, GroundTruthPlan, PlanRoom};
    use alloc::collections::BTreeSet;

    fn p(x: i32, y: i32) -> PixelCoord {
        PixelCoord::new(x, y)
    }

    fn zero_maps(n: usize) -> DataMaps {
        DataMaps::new(Grid2D::zeros(n, n), Grid2D::zeros(n, n), &[])
    }

    #[test]
    fn single_disk_gives_its_centre() {
        let mut g = Grid2D::zeros(64, 64);
        stamp_block(&mut g, p(30, 20), 3, 1.0);
        let b = BoundingBox::new(p(0, 0), p(63, 63));
        let c = detect_corner_candidates(&g, &b, 3, 0.5);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].position, p(30, 20));
        assert!(detect_corner_candidates(&Grid2D::zeros(8, 8), &BoundingBox::new(p(0, 0), p(7, 7)), 3, 0.5).is_empty());
    }

    #[test]
    fn close_disks_collapse() {
        let mut g = Grid2D::zeros(64, 64);
        stamp_block(&mut g, p(20, 20), 3, 1.0);
        stamp_block(&mut g, p(22, 20), 3, 1.0);
        let b = BoundingBox::new(p(0, 0), p(63, 63));
        let c = detect_corner_candidates(&g, &b, 3, 0.5);
        assert_eq!(c.len(), 1);
        // Brute-force NMS: every pixel of the union within 3 of the survivor.
        let survivor = c[0].position;
        for y in 0..64 {
            for x in 0..64 {
                if g.get(p(x, y)) > 0.0 {
                    let far = (x - survivor.x).abs().max((y - survivor.y).abs());
                    assert!(far <= 5);
                }
            }
        }
    }

    fn rect_plan(x0: i32, y0: i32, x1: i32, y1: i32, n: usize) -> GroundTruthPlan {
        GroundTruthPlan {
            width: n,
            height: n,
            rooms: alloc::vec![PlanRoom {
                id: 0,
                outline: LoopPolygon::rectangle(p(x0, y0), p(x1, y1)).unwrap(),
            }],
        }
    }

    #[test]
    fn clean_room_start_edge_is_a_wall() {
        let plan = rect_plan(20, 24, 70, 60, 96);
        let b = render_bundle(&plan);
        let seg = &b.segments[0];
        let bbox = room_bbox(seg, &SolverConfig::default()).unwrap();
        let cands = detect_corner_candidates(&b.corner, &bbox, 3, 0.5);
        assert_eq!(cands.len(), 4);
        let se = select_start_edge(&cands, &b.edge, seg, &DirectionAlphabet::axis_aligned(), &bbox).unwrap();
        assert_eq!(se.score, 1.0);
        let walls: Vec<_> = plan.rooms[0].outline.edges().map(|(a, b)| (a.min(b), a.max(b))).collect();
        assert!(walls.contains(&(se.a, se.b)), "{se:?}");
        // Equal means and lengths: the lexicographically smaller pair wins.
        assert_eq!((se.a, se.b), (p(20, 24), p(20, 60)));
    }

    #[test]
    fn candidates_inside_segment_give_no_start_edge() {
        let mut seg = BinaryMask::new(32, 32);
        for y in 5..25 {
            for x in 5..25 {
                seg.set(p(x, y), true);
            }
        }
        let cands: Vec<_> = [p(10, 10), p(20, 10), p(20, 20)]
            .iter()
            .map(|&q| CandidateCorner { position: q, score: 1.0 })
            .collect();
        let bbox = BoundingBox::new(p(0, 0), p(31, 31));
        let e = Grid2D::filled(32, 32, 1.0);
        assert!(select_start_edge(&cands, &e, &seg, &DirectionAlphabet::axis_aligned(), &bbox).is_none());
    }

    #[test]
    fn weight_on_shared_clean_wall_is_model_only() {
        let n = 40;
        let other = LoopPolygon::rectangle(p(5, 5), p(30, 30)).unwrap();
        let mut corner = Grid2D::zeros(n, n);
        let mut edge = Grid2D::zeros(n, n);
        for &c in other.corners() {
            corner.set(c, 1.0);
        }
        for q in loop_edge_pixels(&other) {
            edge.set(q, 1.0);
        }
        let maps = DataMaps::new(corner, edge, &[]);
        let usage = UsageMap::new(n, n, &[&other]);
        let w = Weights::default();
        assert_eq!(edge_weight(p(5, 5), p(30, 5), &maps, &usage, &w), 1.0);
        assert_eq!(edge_weight(p(30, 5), p(30, 30), &maps, &usage, &w), 1.0);
    }

    #[test]
    fn weight_on_empty_maps() {
        let maps = zero_maps(32);
        let usage = UsageMap::empty(32, 32);
        let w = Weights::default();
        for (a, b) in [(p(2, 3), p(12, 3)), (p(4, 4), p(4, 20)), (p(1, 1), p(11, 7))] {
            let k = bresenham_line(a, b).len() as f64 - 1.0;
            let expect = 0.1 * 2.0 + 0.2 * k + 0.1 * 2.0 + 0.1 * k + 1.0;
            assert!((edge_weight(a, b, &maps, &usage, &w) - expect).abs() < 1e-12);
        }
        let mut seg = BinaryMask::new(32, 32);
        seg.set(p(7, 3), true);
        let with = DataMaps::new(Grid2D::zeros(32, 32), Grid2D::zeros(32, 32), &[seg]);
        let base = edge_weight(p(2, 3), p(12, 3), &maps, &usage, &w);
        assert!((edge_weight(p(2, 3), p(12, 3), &with, &usage, &w) - base - 100.0).abs() < 1e-9);
    }

    #[test]
    fn axis_ray_count() {
        let maps = zero_maps(16);
        let usage = UsageMap::empty(16, 16);
        let g = build_room_graph(
            BoundingBox::new(p(2, 2), p(9, 9)),
            &DirectionAlphabet::axis_aligned(),
            None,
            None,
            &maps,
            &usage,
            &Weights::default(),
        );
        // Each node reaches every other node of its row and column.
        assert_eq!(g.edge_count(), 64 * (7 + 7));
    }

    #[test]
    fn fast_weights_match_reference() {
        let n = 24;
        let mut corner = Grid2D::zeros(n, n);
        let mut edge = Grid2D::zeros(n, n);
        for (i, v) in corner.values_mut().iter_mut().enumerate() {
            *v = ((i * 37) % 11) as f32 / 10.0;
        }
        for (i, v) in edge.values_mut().iter_mut().enumerate() {
            *v = ((i * 13) % 7) as f32 / 6.0;
        }
        let mut seg = BinaryMask::new(n, n);
        seg.set(p(9, 9), true);
        seg.set(p(10, 12), true);
        let maps = DataMaps::new(corner, edge, &[seg]);
        let other = LoopPolygon::rectangle(p(3, 3), p(15, 18)).unwrap();
        let usage = UsageMap::new(n, n, &[&other]);
        let w = Weights::default();
        let alpha = DirectionAlphabet::new(
            alloc::vec![ManhattanFrame::new(0).unwrap(), ManhattanFrame::new(3).unwrap()],
            5.0,
        );
        let bbox = BoundingBox::new(p(1, 2), p(20, 21));
        let g = build_room_graph(bbox, &alpha, None, None, &maps, &usage, &w);
        for y in 2..=21 {
            for x in 1..=20 {
                for (q, wt) in g.edges_from(p(x, y)) {
                    let r = edge_weight(p(x, y), q, &maps, &usage, &w);
                    assert!((wt - r).abs() < 1e-9, "{x},{y} -> {q:?}");
                }
            }
        }
    }

    #[test]
    fn vertical_start_line_is_never_crossed() {
        let maps = zero_maps(16);
        let usage = UsageMap::empty(16, 16);
        let line = StartLine {
            origin: (7.5, 8.0),
            through: (7.5, 0.0),
            end: (7.5, -10.0),
        };
        let g = build_room_graph(
            BoundingBox::new(p(0, 0), p(15, 15)),
            &DirectionAlphabet::axis_aligned(),
            Some(line),
            None,
            &maps,
            &usage,
            &Weights::default(),
        );
        for y in 0..16 {
            for x in 0..16 {
                for (q, _) in g.edges_from(p(x, y)) {
                    let lo = x.min(q.x) as f64;
                    let hi = x.max(q.x) as f64;
                    let crossing = lo < 7.5 && hi > 7.5 && y.max(q.y) <= 8;
                    assert!(!crossing, "({x},{y}) -> {q:?}");
                }
            }
        }
    }

    #[test]
    fn fuse_drops_straight_corners() {
        let l = LoopPolygon::new(alloc::vec![p(0, 0), p(3, 0), p(6, 0), p(6, 4), p(0, 4), p(0, 2)]).unwrap();
        assert_eq!(fuse_colinear(&l).corners(), &[p(0, 0), p(6, 0), p(6, 4), p(0, 4)][..]);
    }

    // Clean single room: the start-edge wall is kept exactly, the other three
    // walls stay within the 5-pixel stroke and clear of the eroded segment.
    #[test]
    fn clean_room_loop_hugs_the_walls() {
        let plan = rect_plan(20, 24, 70, 60, 96);
        let b = render_bundle(&plan);
        let maps = DataMaps::new(b.corner.clone(), b.edge.clone(), &b.segments);
        let alpha = DirectionAlphabet::axis_aligned();
        let w = Weights::default();
        let problem = RoomProblem {
            maps: &maps,
            segment: &b.segments[0],
            alphabet: &alpha,
            others: &[],
            weights: &w,
        };
        let sol = solve_room(&problem, &SolverConfig::default()).unwrap();
        assert!(sol.fallback.is_none());
        let c = sol.outline.corners();
        assert_eq!(c.len(), 4);
        let xs: BTreeSet<i32> = c.iter().map(|q| q.x).collect();
        let ys: BTreeSet<i32> = c.iter().map(|q| q.y).collect();
        assert_eq!(xs.len(), 2);
        assert_eq!(ys.len(), 2);
        let (x0, x1) = (*xs.first().unwrap(), *xs.last().unwrap());
        let (y0, y1) = (*ys.first().unwrap(), *ys.last().unwrap());
        assert_eq!(x0, 20);
        assert!((20..=22).contains(&x0) && (68..=70).contains(&x1));
        assert!((24..=26).contains(&y0) && (58..=60).contains(&y1));
        let e = energy_of_loops([&sol.outline], &maps, &w);
        assert_eq!(e.data(), 0.0);
        let total = sol.path_weight.unwrap() + sol.start_edge_weight.unwrap();
        assert!((total - e.total()).abs() < 1e-9);
    }

    // Everything except a one-pixel ring around the segment is occupied, so
    // the only affordable loop threads the ring.
    #[test]
    fn path_threads_a_one_pixel_corridor() {
        let n = 24;
        let mut seg = BinaryMask::new(n, n);
        for y in 8..=14 {
            for x in 8..=14 {
                seg.set(p(x, y), true);
            }
        }
        let ring = LoopPolygon::rectangle(p(4, 4), p(19, 18)).unwrap();
        let free = loop_edge_pixels(&ring);
        let mut blocked = BinaryMask::new(n, n);
        for y in 0..n as i32 {
            for x in 0..n as i32 {
                blocked.set(p(x, y), !free.contains(&p(x, y)));
            }
        }
        let maps = DataMaps::new(Grid2D::zeros(n, n), Grid2D::zeros(n, n), &[seg.clone(), blocked]);
        let usage = UsageMap::empty(n, n);
        let (a, b) = (p(4, 4), p(4, 18));
        let bbox = BoundingBox::new(p(0, 0), p(23, 23));
        let line = start_line(a, b, &seg, &bbox).unwrap();
        let alpha = DirectionAlphabet::axis_aligned();
        let g = build_room_graph(bbox, &alpha, Some(line), Some((a, b)), &maps, &usage, &Weights::default());
        let (path, weight) = g.shortest_path(a, b).unwrap();
        assert!(weight < 100.0, "weight {weight}");
        assert_eq!(path, [p(4, 4), p(19, 4), p(19, 18), p(4, 18)]);
    }

    #[test]
    fn small_segment_falls_back() {
        let mut seg = BinaryMask::new(32, 32);
        seg.set(p(10, 10), true);
        seg.set(p(11, 10), true);
        let maps = zero_maps(32);
        let alpha = DirectionAlphabet::axis_aligned();
        let w = Weights::default();
        let sol = solve_room(
            &RoomProblem {
                maps: &maps,
                segment: &seg,
                alphabet: &alpha,
                others: &[],
                weights: &w,
            },
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(sol.fallback, Some(Fallback::SmallSegment));
        assert_eq!(sol.outline, LoopPolygon::rectangle(p(8, 8), p(13, 12)).unwrap());
    }
}
