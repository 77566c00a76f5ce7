//! Loop merging: parallel walls of different rooms that run within a few
//! pixels of each other are snapped onto their midline, nearby corners are
//! fused, and the loops become one planar graph.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::energy::LoopPolygon;
use crate::grid::PixelCoord;
use crate::math;

pub const SNAP_DISTANCE: f64 = 5.0;
pub const CORNER_MERGE_DISTANCE: f64 = 3.0;
pub const COLINEAR_ANGLE_DEG: f64 = 5.0;
pub const COLINEAR_OFFSET: f64 = 1.5;
pub const CONTIGUOUS_GAP: f64 = 3.0;
/// Vertices this close to an edge's interior split it.
pub const SPLIT_DISTANCE: f64 = 1.0;
/// Parallel groups must overlap by at least this much along the line to
/// snap; walls meeting end to end only touch.
pub const MIN_SNAP_OVERLAP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct EdgeRef {
    pub room: usize,
    pub edge: usize,
}

/// Contiguous colinear loop edges treated as one wall.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentGroup {
    pub members: Vec<EdgeRef>,
    /// Length-weighted mean of member midpoints.
    pub point: (f64, f64),
    /// Unit direction, sign-normalized to point right (or down when vertical).
    pub direction: (f64, f64),
    pub length: f64,
    /// Extent along `direction`, relative to `point`.
    pub extent: (f64, f64),
    /// All member endpoints.
    pub endpoints: Vec<(f64, f64)>,
}

impl SegmentGroup {
    pub fn rooms(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.members.iter().map(|m| m.room).collect();
        r.dedup();
        r.sort();
        r.dedup();
        r
    }

    fn normal(&self) -> (f64, f64) {
        (-self.direction.1, self.direction.0)
    }

    fn distance_to_line(&self, q: (f64, f64)) -> f64 {
        let n = self.normal();
        math::abs((q.0 - self.point.0) * n.0 + (q.1 - self.point.1) * n.1)
    }

    fn along(&self, q: (f64, f64)) -> f64 {
        (q.0 - self.point.0) * self.direction.0 + (q.1 - self.point.1) * self.direction.1
    }
}

fn unit(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l = math::hypot(dx, dy);
    let (ux, uy) = (dx / l, dy / l);
    if ux < -1e-12 || (math::abs(ux) <= 1e-12 && uy < 0.0) {
        (-ux, -uy)
    } else {
        (ux, uy)
    }
}

fn line_angle_diff(u: (f64, f64), v: (f64, f64)) -> f64 {
    let d = math::angle_diff_deg(math::angle_deg(u.0, u.1), math::angle_deg(v.0, v.1));
    d.min(180.0 - d)
}

fn fpt(p: PixelCoord) -> (f64, f64) {
    (p.x as f64, p.y as f64)
}

fn point_line_distance(q: (f64, f64), a: (f64, f64), d: (f64, f64)) -> f64 {
    math::abs((q.0 - a.0) * -d.1 + (q.1 - a.1) * d.0)
}

struct Edge {
    r: EdgeRef,
    a: (f64, f64),
    b: (f64, f64),
}

fn colinear_contiguous(e: &Edge, f: &Edge) -> bool {
    let d = unit(e.a, e.b);
    if line_angle_diff(d, unit(f.a, f.b)) >= COLINEAR_ANGLE_DEG {
        return false;
    }
    let off = point_line_distance(f.a, e.a, d)
        .max(point_line_distance(f.b, e.a, d))
        .max(point_line_distance(e.a, f.a, unit(f.a, f.b)))
        .max(point_line_distance(e.b, f.a, unit(f.a, f.b)));
    if off >= COLINEAR_OFFSET {
        return false;
    }
    let proj = |q: (f64, f64)| (q.0 - e.a.0) * d.0 + (q.1 - e.a.1) * d.1;
    let (e0, e1) = (proj(e.a).min(proj(e.b)), proj(e.a).max(proj(e.b)));
    let (f0, f1) = (proj(f.a).min(proj(f.b)), proj(f.a).max(proj(f.b)));
    (f0 - e1).max(e0 - f1) <= CONTIGUOUS_GAP
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut j = i;
    while parent[j] != r {
        let n = parent[j];
        parent[j] = r;
        j = n;
    }
    r
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

/// Partitions all loop edges into maximal groups of colinear, contiguous
/// edges (angle below 5°, offset below 1.5 px, gaps of at most 3 px).
pub fn find_segment_groups(loops: &[LoopPolygon]) -> Vec<SegmentGroup> {
    let mut edges = Vec::new();
    for (room, l) in loops.iter().enumerate() {
        for (k, (a, b)) in l.edges().enumerate() {
            edges.push(Edge {
                r: EdgeRef { room, edge: k },
                a: fpt(a),
                b: fpt(b),
            });
        }
    }
    let mut parent: Vec<usize> = (0..edges.len()).collect();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            if colinear_contiguous(&edges[i], &edges[j]) {
                union(&mut parent, i, j);
            }
        }
    }
    let mut buckets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..edges.len() {
        let r = find(&mut parent, i);
        buckets.entry(r).or_default().push(i);
    }
    buckets
        .into_values()
        .map(|ids| {
            let longest = ids
                .iter()
                .copied()
                .max_by(|&x, &y| {
                    let lx = math::hypot(edges[x].b.0 - edges[x].a.0, edges[x].b.1 - edges[x].a.1);
                    let ly = math::hypot(edges[y].b.0 - edges[y].a.0, edges[y].b.1 - edges[y].a.1);
                    lx.total_cmp(&ly).then(y.cmp(&x))
                })
                .unwrap();
            let d0 = unit(edges[longest].a, edges[longest].b);
            let (mut sx, mut sy, mut len, mut px, mut py) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for &i in &ids {
                let e = &edges[i];
                let l = math::hypot(e.b.0 - e.a.0, e.b.1 - e.a.1);
                let mut u = unit(e.a, e.b);
                if u.0 * d0.0 + u.1 * d0.1 < 0.0 {
                    u = (-u.0, -u.1);
                }
                sx += u.0 * l;
                sy += u.1 * l;
                len += l;
                px += (e.a.0 + e.b.0) / 2.0 * l;
                py += (e.a.1 + e.b.1) / 2.0 * l;
            }
            let direction = unit((0.0, 0.0), (sx, sy));
            let point = (px / len, py / len);
            let endpoints: Vec<_> = ids.iter().flat_map(|&i| [edges[i].a, edges[i].b]).collect();
            let mut g = SegmentGroup {
                members: ids.iter().map(|&i| edges[i].r).collect(),
                point,
                direction,
                length: len,
                extent: (0.0, 0.0),
                endpoints,
            };
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &q in &g.endpoints {
                let t = g.along(q);
                lo = lo.min(t);
                hi = hi.max(t);
            }
            g.extent = (lo, hi);
            g
        })
        .collect()
}

// Max perpendicular offset between two parallel groups that overlap along
// their common direction; `None` if they are not parallel or do not overlap.
fn pair_offset(g: &SegmentGroup, h: &SegmentGroup) -> Option<f64> {
    if line_angle_diff(g.direction, h.direction) >= COLINEAR_ANGLE_DEG {
        return None;
    }
    let (h0, h1) = h
        .endpoints
        .iter()
        .map(|&q| g.along(q))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(t), b.max(t)));
    if h1.min(g.extent.1) - h0.max(g.extent.0) < MIN_SNAP_OVERLAP {
        return None;
    }
    let a = h.endpoints.iter().map(|&q| g.distance_to_line(q)).fold(0.0, f64::max);
    let b = g.endpoints.iter().map(|&q| h.distance_to_line(q)).fold(0.0, f64::max);
    Some(a.max(b))
}

fn clean_cycle(c: &[PixelCoord]) -> Vec<PixelCoord> {
    let mut out: Vec<PixelCoord> = Vec::with_capacity(c.len());
    for &p in c {
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

/// Corner moves that put every member edge of `groups` on the line through
/// `point` with unit normal `n`, rounded to pixels.
fn project_members(
    cur: &[LoopPolygon],
    groups: &[&SegmentGroup],
    point: (f64, f64),
    n: (f64, f64),
) -> BTreeMap<(usize, usize), PixelCoord> {
    let c0 = point.0 * n.0 + point.1 * n.1;
    let mut moves = BTreeMap::new();
    for m in groups.iter().flat_map(|g| &g.members) {
        let l = &cur[m.room];
        for k in [m.edge, (m.edge + 1) % l.len()] {
            let c = l.corners()[k];
            let s = c0 - (c.x as f64 * n.0 + c.y as f64 * n.1);
            let q = PixelCoord::new(
                math::round(c.x as f64 + s * n.0) as i32,
                math::round(c.y as f64 + s * n.1) as i32,
            );
            moves.insert((m.room, k), q);
        }
    }
    moves
}

fn apply_moves(cur: &mut [LoopPolygon], moves: &BTreeMap<(usize, usize), PixelCoord>) -> bool {
    let mut changed = false;
    for (room, l) in cur.iter_mut().enumerate() {
        let mut c = l.corners().to_vec();
        for (k, v) in c.iter_mut().enumerate() {
            if let Some(&q) = moves.get(&(room, k)) {
                *v = q;
            }
        }
        if let Ok(nl) = LoopPolygon::new(clean_cycle(&c)) {
            if nl != *l {
                *l = nl;
                changed = true;
            }
        }
    }
    changed
}

/// Midline of two nearly parallel groups: direction is their
/// length-weighted mean, offset halfway between them.
fn midline(g: &SegmentGroup, h: &SegmentGroup) -> ((f64, f64), (f64, f64)) {
    let hd = if g.direction.0 * h.direction.0 + g.direction.1 * h.direction.1 < 0.0 {
        (-h.direction.0, -h.direction.1)
    } else {
        h.direction
    };
    let d = unit(
        (0.0, 0.0),
        (
            g.direction.0 * g.length + hd.0 * h.length,
            g.direction.1 * g.length + hd.1 * h.length,
        ),
    );
    let n = (-d.1, d.0);
    let cg = g.point.0 * n.0 + g.point.1 * n.1;
    let ch = h.point.0 * n.0 + h.point.1 * n.1;
    let mid = (cg + ch) / 2.0;
    ((mid * n.0, mid * n.1), n)
}

/// Snaps pairs of parallel groups from different rooms whose maximum offset
/// is at most `threshold` onto their midline, largest pairs first, until no
/// pair qualifies. Member corners are projected onto the midline and rounded.
/// A group that already holds walls of several rooms is first straightened
/// onto its own supporting line.
pub fn snap_parallel_groups(loops: &[LoopPolygon], threshold: f64) -> Vec<LoopPolygon> {
    let mut cur: Vec<LoopPolygon> = loops.to_vec();
    let cap = 4 * loops.iter().map(|l| l.len()).sum::<usize>() + 8;
    for _ in 0..cap {
        let groups = find_segment_groups(&cur);
        let mut order: Vec<usize> = (0..groups.len()).filter(|&i| groups[i].rooms().len() > 1).collect();
        order.sort_by(|&a, &b| groups[b].length.total_cmp(&groups[a].length).then(a.cmp(&b)));
        let straightened = order.into_iter().any(|i| {
            let moves = project_members(&cur, &[&groups[i]], groups[i].point, groups[i].normal());
            apply_moves(&mut cur, &moves)
        });
        if straightened {
            continue;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..groups.len() {
            let ri = groups[i].rooms();
            for j in i + 1..groups.len() {
                if groups[j].rooms().iter().any(|r| ri.contains(r)) {
                    continue;
                }
                let Some(off) = pair_offset(&groups[i], &groups[j]) else {
                    continue;
                };
                if off <= 1e-9 || off > threshold + 1e-9 {
                    continue;
                }
                let total = groups[i].length + groups[j].length;
                if best.is_none_or(|(t, _, _)| total > t) {
                    best = Some((total, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else {
            break;
        };
        let (point, n) = midline(&groups[i], &groups[j]);
        let moves = project_members(&cur, &[&groups[i], &groups[j]], point, n);
        if !apply_moves(&mut cur, &moves) {
            break;
        }
    }
    cur
}

/// Merged floorplan: vertices, undirected edges with the rooms using them,
/// and one vertex cycle per room.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FloorplanGraph {
    pub vertices: Vec<PixelCoord>,
    pub edges: Vec<(usize, usize)>,
    pub edge_rooms: Vec<Vec<usize>>,
    pub rooms: Vec<Vec<usize>>,
}

impl FloorplanGraph {
    /// Graph of the loops as given: identical corners share a vertex, and a
    /// vertex lying on another edge's interior splits that edge.
    pub fn from_loops(loops: &[LoopPolygon]) -> Self {
        let cycles: Vec<Vec<PixelCoord>> = loops.iter().map(|l| l.corners().to_vec()).collect();
        Self::from_cycles(&cycles)
    }

    fn from_cycles(cycles: &[Vec<PixelCoord>]) -> Self {
        let mut index: BTreeMap<PixelCoord, usize> = BTreeMap::new();
        let mut vertices = Vec::new();
        for c in cycles {
            for &p in c {
                index.entry(p).or_insert_with(|| {
                    vertices.push(p);
                    vertices.len() - 1
                });
            }
        }
        let mut rooms = Vec::with_capacity(cycles.len());
        for c in cycles {
            let mut cyc: Vec<usize> = clean_cycle(c).iter().map(|p| index[p]).collect();
            // Splitting creates shorter edges that may pass within reach of
            // further vertices, so repeat until no edge changes.
            let mut k = 0;
            while cyc.len() >= 2 && k < cyc.len() {
                let (a, b) = (vertices[cyc[k]], vertices[cyc[(k + 1) % cyc.len()]]);
                let inner = split_points(&vertices, &cyc, a, b);
                if inner.is_empty() {
                    k += 1;
                } else {
                    cyc.splice(k + 1..k + 1, inner);
                }
            }
            rooms.push(cyc);
        }
        let mut edge_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut edge_rooms: Vec<Vec<usize>> = Vec::new();
        for (r, cyc) in rooms.iter().enumerate() {
            let n = cyc.len();
            if n < 2 {
                continue;
            }
            for k in 0..n {
                let (u, v) = (cyc[k], cyc[(k + 1) % n]);
                if u == v {
                    continue;
                }
                let key = (u.min(v), u.max(v));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_rooms.push(Vec::new());
                    edges.len() - 1
                });
                if !edge_rooms[e].contains(&r) {
                    edge_rooms[e].push(r);
                }
            }
        }
        Self {
            vertices,
            edges,
            edge_rooms,
            rooms,
        }
    }

    /// Each room's cycle as a loop; `None` for rooms that collapsed.
    pub fn room_loops(&self) -> Vec<Option<LoopPolygon>> {
        self.rooms
            .iter()
            .map(|c| LoopPolygon::new(c.iter().map(|&i| self.vertices[i]).collect()).ok())
            .collect()
    }

    /// Pairs of rooms that share at least one edge.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.rooms.len()];
        for rs in &self.edge_rooms {
            for &a in rs {
                for &b in rs {
                    if a != b && !adj[a].contains(&b) {
                        adj[a].push(b);
                    }
                }
            }
        }
        for a in adj.iter_mut() {
            a.sort();
        }
        adj
    }
}

/// Vertices outside `cyc` lying within the split distance of the open
/// segment `a → b`, ordered along it.
fn split_points(vertices: &[PixelCoord], cyc: &[usize], a: PixelCoord, b: PixelCoord) -> Vec<usize> {
    let (fa, fb) = (fpt(a), fpt(b));
    let len = math::hypot(fb.0 - fa.0, fb.1 - fa.1);
    let d = ((fb.0 - fa.0) / len, (fb.1 - fa.1) / len);
    let mut inner: Vec<(f64, usize)> = Vec::new();
    for (vi, &v) in vertices.iter().enumerate() {
        if cyc.contains(&vi) {
            continue;
        }
        let q = fpt(v);
        let t = (q.0 - fa.0) * d.0 + (q.1 - fa.1) * d.1;
        if t > 1e-9 && t < len - 1e-9 && point_line_distance(q, fa, d) <= SPLIT_DISTANCE {
            inner.push((t, vi));
        }
    }
    inner.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    inner.into_iter().map(|(_, vi)| vi).collect()
}

/// Single-linkage clustering of corners within `threshold`; every cluster
/// becomes one vertex at the rounded centroid of its distinct positions.
pub fn merge_corners(loops: &[LoopPolygon], threshold: f64) -> FloorplanGraph {
    let mut points: Vec<PixelCoord> = loops.iter().flat_map(|l| l.corners().iter().copied()).collect();
    points.sort();
    points.dedup();
    let mut parent: Vec<usize> = (0..points.len()).collect();
    let t2 = threshold * threshold + 1e-9;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i].dist_sq(points[j]) as f64) <= t2 {
                union(&mut parent, i, j);
            }
        }
    }
    let mut sums: BTreeMap<usize, (i64, i64, i64)> = BTreeMap::new();
    for (i, q) in points.iter().enumerate() {
        let r = find(&mut parent, i);
        let s = sums.entry(r).or_insert((0, 0, 0));
        s.0 += q.x as i64;
        s.1 += q.y as i64;
        s.2 += 1;
    }
    let mut target: BTreeMap<PixelCoord, PixelCoord> = BTreeMap::new();
    for (i, &q) in points.iter().enumerate() {
        let r = find(&mut parent, i);
        let (sx, sy, n) = sums[&r];
        let c = PixelCoord::new(
            math::round(sx as f64 / n as f64) as i32,
            math::round(sy as f64 / n as f64) as i32,
        );
        target.insert(q, c);
    }
    let cycles: Vec<Vec<PixelCoord>> = loops
        .iter()
        .map(|l| l.corners().iter().map(|c| target[c]).collect())
        .collect();
    FloorplanGraph::from_cycles(&cycles)
}

pub const MAX_MERGE_PASSES: usize = 8;

/// Snap parallel walls within 5 px, then merge corners within 3 px. Rounding
/// can leave walls a pixel apart after one pass, so passes repeat until the
/// room loops stop changing.
pub fn merge(loops: &[LoopPolygon]) -> FloorplanGraph {
    let mut current = loops.to_vec();
    let mut g = merge_once(&current);
    for _ in 1..MAX_MERGE_PASSES {
        let Some(next) = g.room_loops().into_iter().collect::<Option<Vec<_>>>() else { break };
        if next == current {
            break;
        }
        g = merge_once(&next);
        current = next;
    }
    g
}

fn merge_once(loops: &[LoopPolygon]) -> FloorplanGraph {
    merge_corners(&snap_parallel_groups(loops, SNAP_DISTANCE), CORNER_MERGE_DISTANCE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i32, y: i32) -> PixelCoord {
        PixelCoord::new(x, y)
    }

    fn rect(x0: i32, y0: i32, x1: i32, y1: i32) -> LoopPolygon {
        LoopPolygon::rectangle(p(x0, y0), p(x1, y1)).unwrap()
    }

    #[test]
    fn split_reaches_vertices_near_split_edges() {
        // (161,81) is 1.3 px from the slanted bottom edge but exactly 1 px
        // from the piece left after splitting at (76,80).
        let a = LoopPolygon::new(vec![p(30, 20), p(220, 20), p(220, 80), p(30, 79)]).unwrap();
        let b = LoopPolygon::new(vec![p(76, 80), p(161, 81), p(161, 150), p(76, 150)]).unwrap();
        let g = FloorplanGraph::from_loops(&[a, b]);
        let bottom: Vec<PixelCoord> = g.rooms[0].iter().map(|&i| g.vertices[i]).collect();
        assert_eq!(bottom, [p(30, 20), p(220, 20), p(220, 80), p(161, 81), p(76, 80), p(30, 79)]);
        assert_eq!(g.adjacency(), [vec![1], vec![0]]);
    }

    #[test]
    fn rectangle_has_four_groups() {
        assert_eq!(find_segment_groups(&[rect(0, 0, 10, 8)]).len(), 4);
    }

    #[test]
    fn split_wall_is_one_group() {
        let l = LoopPolygon::new(vec![p(0, 0), p(5, 0), p(10, 0), p(10, 8), p(0, 8)]).unwrap();
        let g = find_segment_groups(&[l]);
        assert_eq!(g.len(), 4);
        let top = g.iter().find(|g| g.members.len() == 2).unwrap();
        assert_eq!(top.members, [EdgeRef { room: 0, edge: 0 }, EdgeRef { room: 0, edge: 1 }]);
        assert_eq!(top.direction, (1.0, 0.0));
    }

    #[test]
    fn shared_wall_across_rooms_is_one_group() {
        let g = find_segment_groups(&[rect(0, 0, 10, 10), rect(10, 0, 20, 10)]);
        assert!(g.iter().any(|g| g.rooms() == [0, 1]));
        // Top walls of both rooms touch end to end along y = 0.
        assert_eq!(g.len(), 5);
    }

    fn snapped_x(offset: i32) -> (Vec<LoopPolygon>, i32, i32) {
        let a = rect(10, 10, 40, 40);
        let b = rect(40 + offset, 10, 70, 40);
        let out = snap_parallel_groups(&[a, b], SNAP_DISTANCE);
        (out.clone(), out[0].corners()[1].x, out[1].corners()[0].x)
    }

    #[test]
    fn snap_thresholds() {
        let (_, a, b) = snapped_x(4);
        assert_eq!((a, b), (42, 42));
        let (_, a, b) = snapped_x(5);
        assert_eq!(a, b);
        let (_, a, b) = snapped_x(2);
        assert_eq!((a, b), (41, 41));
        for off in [6, 8] {
            let (out, a, b) = snapped_x(off);
            assert_eq!((a, b), (40, 40 + off));
            assert_eq!(out, [rect(10, 10, 40, 40), rect(40 + off, 10, 70, 40)]);
        }
        let same = [rect(10, 10, 40, 40), rect(40, 10, 70, 40)];
        assert_eq!(snap_parallel_groups(&same, SNAP_DISTANCE), same);
    }

    #[test]
    fn same_room_walls_do_not_snap() {
        let thin = rect(10, 10, 13, 60);
        assert_eq!(snap_parallel_groups(core::slice::from_ref(&thin), SNAP_DISTANCE), [thin]);
    }

    #[test]
    fn corner_thresholds() {
        let g = merge_corners(&[rect(0, 0, 20, 20), rect(22, 0, 40, 20)], 3.0);
        // Corners 2 apart fuse at their rounded centroid.
        assert!(g.vertices.contains(&p(21, 0)));
        assert!(g.vertices.contains(&p(21, 20)));
        assert_eq!(g.vertices.len(), 6);
        let g = merge_corners(&[rect(0, 0, 20, 20), rect(24, 0, 40, 20)], 3.0);
        assert_eq!(g.vertices.len(), 8);
    }

    #[test]
    fn single_linkage_chains() {
        let a = LoopPolygon::new(vec![p(0, 0), p(30, 0), p(30, 30)]).unwrap();
        let b = LoopPolygon::new(vec![p(2, 0), p(2, 40), p(-20, 40)]).unwrap();
        let c = LoopPolygon::new(vec![p(4, 0), p(40, -30), p(60, -30)]).unwrap();
        let g = merge_corners(&[a, b, c], 3.0);
        let near: Vec<_> = g.vertices.iter().filter(|v| v.x.abs() <= 4 && v.y == 0).collect();
        assert_eq!(near, [&p(2, 0)]);
    }

    #[test]
    fn t_junctions_split_edges() {
        let big = rect(0, 0, 40, 20);
        let small = rect(10, 20, 30, 40);
        let g = FloorplanGraph::from_loops(&[big, small]);
        assert_eq!(g.rooms[0].len(), 6);
        let shared: Vec<_> = g.edge_rooms.iter().filter(|r| r.len() == 2).collect();
        assert_eq!(shared.len(), 1);
        assert_eq!(g.adjacency(), [vec![1], vec![0]]);
    }

    #[test]
    fn merge_is_idempotent_and_keeps_rooms() {
        let loops = [rect(10, 10, 40, 40), rect(43, 10, 70, 41), rect(10, 42, 70, 70)];
        let g = merge(&loops);
        assert_eq!(g.rooms.len(), 3);
        let again: Vec<_> = g.room_loops().into_iter().map(Option::unwrap).collect();
        assert_eq!(merge(&again), g);
        for (l, cyc) in loops.iter().zip(&g.rooms) {
            for &c in l.corners() {
                let d = cyc
                    .iter()
                    .map(|&i| g.vertices[i].dist(c))
                    .fold(f64::INFINITY, f64::min);
                assert!(d <= 5.5, "{c:?} moved {d}");
            }
        }
    }
}
