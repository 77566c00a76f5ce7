//! Precision and recall at the corner, edge, room and room++ levels.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::energy::LoopPolygon;
use crate::grid::{fill_polygon, BinaryMask, PixelCoord};
use crate::merge::FloorplanGraph;
use crate::oracle::GroundTruthPlan;

pub const CORNER_RADIUS: f64 = 10.0;
pub const ROOM_IOU: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PRResult {
    pub precision: f64,
    pub recall: f64,
    pub matched_pred: usize,
    pub total_pred: usize,
    pub matched_gt: usize,
    pub total_gt: usize,
}

impl PRResult {
    /// Empty denominators count as perfect.
    pub fn new(matched_pred: usize, total_pred: usize, matched_gt: usize, total_gt: usize) -> Self {
        let ratio = |m: usize, t: usize| if t == 0 { 1.0 } else { m as f64 / t as f64 };
        Self {
            precision: ratio(matched_pred, total_pred),
            recall: ratio(matched_gt, total_gt),
            matched_pred,
            total_pred,
            matched_gt,
            total_gt,
        }
    }
}

/// For every ground-truth corner, in index order, the closest still unused
/// prediction within `radius` (ties to the lower index).
pub fn match_corners(pred: &[PixelCoord], gt: &[PixelCoord], radius: f64) -> Vec<Option<usize>> {
    let mut used = vec![false; pred.len()];
    let r2 = radius * radius + 1e-9;
    gt.iter()
        .map(|&g| {
            let mut best: Option<(i64, usize)> = None;
            for (i, &p) in pred.iter().enumerate() {
                let d = p.dist_sq(g);
                if used[i] || d as f64 > r2 {
                    continue;
                }
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, i));
                }
            }
            best.map(|(_, i)| {
                used[i] = true;
                i
            })
        })
        .collect()
}

pub fn corner_pr(pred: &[PixelCoord], gt: &[PixelCoord], radius: f64) -> PRResult {
    let m = match_corners(pred, gt, radius).iter().flatten().count();
    PRResult::new(m, pred.len(), m, gt.len())
}

/// A predicted edge is correct when both endpoints matched ground-truth
/// corners and the ground truth has an edge between those two corners.
pub fn edge_pr(pred: &FloorplanGraph, gt: &FloorplanGraph, radius: f64) -> PRResult {
    let gt_to_pred = match_corners(&pred.vertices, &gt.vertices, radius);
    let mut pred_to_gt = vec![None; pred.vertices.len()];
    for (g, p) in gt_to_pred.iter().enumerate() {
        if let Some(p) = p {
            pred_to_gt[*p] = Some(g);
        }
    }
    let gt_edges: BTreeSet<(usize, usize)> = gt.edges.iter().copied().collect();
    let mut hit = BTreeSet::new();
    let mut matched = 0;
    for &(u, v) in &pred.edges {
        if let (Some(a), Some(b)) = (pred_to_gt[u], pred_to_gt[v]) {
            let key = (a.min(b), a.max(b));
            if gt_edges.contains(&key) {
                matched += 1;
                hit.insert(key);
            }
        }
    }
    PRResult::new(matched, pred.edges.len(), hit.len(), gt.edges.len())
}

fn raster(l: &LoopPolygon, w: usize, h: usize) -> BinaryMask {
    fill_polygon(l.corners(), w, h)
}

pub fn iou(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let i = a.intersection_count(b);
    let u = a.count() + b.count() - i;
    if u == 0 {
        0.0
    } else {
        i as f64 / u as f64
    }
}

/// Ground-truth room assigned to each prediction. A prediction qualifies
/// when its interior is disjoint from every other prediction's and its IoU
/// with a ground-truth room exceeds `threshold`; pairs are assigned best IoU
/// first, each side at most once.
pub fn match_rooms(
    pred: &[Option<LoopPolygon>],
    gt: &[LoopPolygon],
    width: usize,
    height: usize,
    threshold: f64,
) -> Vec<Option<usize>> {
    let pm: Vec<Option<BinaryMask>> = pred.iter().map(|l| l.as_ref().map(|l| raster(l, width, height))).collect();
    let gm: Vec<BinaryMask> = gt.iter().map(|l| raster(l, width, height)).collect();
    let mut clear = vec![true; pred.len()];
    for i in 0..pm.len() {
        for j in i + 1..pm.len() {
            if let (Some(a), Some(b)) = (&pm[i], &pm[j]) {
                if a.intersection_count(b) > 0 {
                    clear[i] = false;
                    clear[j] = false;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, m) in pm.iter().enumerate() {
        let Some(m) = m else { continue };
        if !clear[i] {
            continue;
        }
        for (g, gmask) in gm.iter().enumerate() {
            let v = iou(m, gmask);
            if v > threshold {
                pairs.push((v, i, g));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![None; pred.len()];
    let mut taken = vec![false; gt.len()];
    for (_, i, g) in pairs {
        if out[i].is_none() && !taken[g] {
            out[i] = Some(g);
            taken[g] = true;
        }
    }
    out
}

pub fn room_pr(pred: &[Option<LoopPolygon>], gt: &[LoopPolygon], width: usize, height: usize) -> PRResult {
    let m = match_rooms(pred, gt, width, height, ROOM_IOU).iter().flatten().count();
    PRResult::new(m, pred.len(), m, gt.len())
}

/// Room++: a correct room must also be adjacent (sharing a graph edge) to
/// exactly the correct rooms matching its ground-truth neighbours.
pub fn room_plus_plus_pr(
    pred: &FloorplanGraph,
    gt: &FloorplanGraph,
    room_match: &[Option<usize>],
) -> PRResult {
    let pa = pred.adjacency();
    let ga = gt.adjacency();
    let mut ok = 0;
    for (r, m) in room_match.iter().enumerate() {
        let Some(g) = m else { continue };
        let mapped: BTreeSet<usize> = pa
            .get(r)
            .into_iter()
            .flatten()
            .filter_map(|&n| room_match.get(n).copied().flatten())
            .collect();
        let expect: BTreeSet<usize> = ga.get(*g).into_iter().flatten().copied().collect();
        if mapped == expect {
            ok += 1;
        }
    }
    PRResult::new(ok, pred.rooms.len(), ok, gt.rooms.len())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub corner: PRResult,
    pub edge: PRResult,
    pub room: PRResult,
    pub room_plus_plus: PRResult,
}

impl Evaluation {
    pub fn rows(&self) -> [(&'static str, &PRResult); 4] {
        [
            ("corner", &self.corner),
            ("edge", &self.edge),
            ("room", &self.room),
            ("room++", &self.room_plus_plus),
        ]
    }

    pub fn is_perfect(&self) -> bool {
        self.rows().iter().all(|(_, r)| r.precision == 1.0 && r.recall == 1.0)
    }

    /// One header line and one row per metric.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,precision,recall,matched_pred,total_pred,matched_gt,total_gt\n");
        for (name, r) in self.rows() {
            let _ = writeln!(
                s,
                "{name},{:.4},{:.4},{},{},{},{}",
                r.precision, r.recall, r.matched_pred, r.total_pred, r.matched_gt, r.total_gt
            );
        }
        s
    }
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:>9} {:>9}", "", "Prec.", "Recall")?;
        for (name, r) in self.rows() {
            writeln!(f, "{:<8} {:>9.3} {:>9.3}", name, r.precision, r.recall)?;
        }
        Ok(())
    }
}

/// Scores a merged reconstruction against a ground-truth plan.
pub fn evaluate(pred: &FloorplanGraph, gt: &GroundTruthPlan) -> Evaluation {
    let gt_loops = gt.loops();
    let gt_graph = FloorplanGraph::from_loops(&gt_loops);
    let pred_loops = pred.room_loops();
    let rooms = match_rooms(&pred_loops, &gt_loops, gt.width, gt.height, ROOM_IOU);
    let m = rooms.iter().flatten().count();
    Evaluation {
        corner: corner_pr(&pred.vertices, &gt_graph.vertices, CORNER_RADIUS),
        edge: edge_pr(pred, &gt_graph, CORNER_RADIUS),
        room: PRResult::new(m, pred_loops.len(), m, gt_loops.len()),
        room_plus_plus: room_plus_plus_pr(pred, &gt_graph, &rooms),
    }
}
