//! Floorplan JSON: rooms as corner lists plus the merged graph.
//!
//! ```json
//! {"rooms":[{"id":0,"corners":[[x,y],...]}],
//!  "graph":{"vertices":[[x,y],...],"edges":[[i,j],...]}}
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use roomloop_core::grid::PixelCoord;
use roomloop_core::merge::FloorplanGraph;
use roomloop_core::oracle::{GroundTruthPlan, PlanRoom};
use roomloop_core::LoopPolygon;
use serde::{Deserialize, Serialize};

use crate::error::FormatError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoomEntry {
    pub id: usize,
    pub corners: Vec<[i32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GraphEntry {
    pub vertices: Vec<[i32; 2]>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFile {
    pub rooms: Vec<RoomEntry>,
    pub graph: GraphEntry,
}

fn xy(p: PixelCoord) -> [i32; 2] {
    [p.x, p.y]
}

fn pixel(c: [i32; 2]) -> PixelCoord {
    PixelCoord::new(c[0], c[1])
}

impl PlanFile {
    /// `ids[k]` is the id written for the graph's `k`-th room.
    pub fn from_graph(g: &FloorplanGraph, ids: &[usize]) -> Self {
        assert_eq!(ids.len(), g.rooms.len());
        Self {
            rooms: g
                .rooms
                .iter()
                .zip(ids)
                .map(|(cyc, &id)| RoomEntry {
                    id,
                    corners: cyc.iter().map(|&v| xy(g.vertices[v])).collect(),
                })
                .collect(),
            graph: GraphEntry {
                vertices: g.vertices.iter().map(|&p| xy(p)).collect(),
                edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(),
            },
        }
    }

    /// Rooms are written as graph cycles, so a wall carrying another room's
    /// corner lists that corner too.
    pub fn from_ground_truth(plan: &GroundTruthPlan) -> Self {
        let g = FloorplanGraph::from_loops(&plan.loops());
        let ids: Vec<usize> = plan.rooms.iter().map(|r| r.id).collect();
        Self::from_graph(&g, &ids)
    }

    /// Rebuilds the graph. Every room corner must be a vertex and every pair
    /// of consecutive corners an edge.
    pub fn to_graph(&self) -> Result<FloorplanGraph, FormatError> {
        let vertices: Vec<PixelCoord> = self.graph.vertices.iter().map(|&c| pixel(c)).collect();
        let mut index = BTreeMap::new();
        for (i, &v) in vertices.iter().enumerate() {
            if index.insert(v, i).is_some() {
                return Err(FormatError::Plan(format!("duplicate vertex ({}, {})", v.x, v.y)));
            }
        }
        let mut edge_index = BTreeMap::new();
        let mut edges = Vec::with_capacity(self.graph.edges.len());
        for &[a, b] in &self.graph.edges {
            if a >= vertices.len() || b >= vertices.len() || a == b {
                return Err(FormatError::Plan(format!("bad edge [{a}, {b}]")));
            }
            let key = (a.min(b), a.max(b));
            if edge_index.insert(key, edges.len()).is_some() {
                return Err(FormatError::Plan(format!("duplicate edge [{a}, {b}]")));
            }
            edges.push(key);
        }
        let mut rooms = Vec::with_capacity(self.rooms.len());
        let mut edge_rooms = vec![Vec::new(); edges.len()];
        for (r, room) in self.rooms.iter().enumerate() {
            let cyc = room
                .corners
                .iter()
                .map(|&c| {
                    index
                        .get(&pixel(c))
                        .copied()
                        .ok_or_else(|| FormatError::Plan(format!("room {}: corner {c:?} is not a vertex", room.id)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let n = cyc.len();
            for k in 0..n {
                let (u, v) = (cyc[k], cyc[(k + 1) % n]);
                if u == v {
                    continue;
                }
                let e = *edge_index
                    .get(&(u.min(v), u.max(v)))
                    .ok_or_else(|| FormatError::Plan(format!("room {}: edge [{u}, {v}] is not in the graph", room.id)))?;
                if !edge_rooms[e].contains(&r) {
                    edge_rooms[e].push(r);
                }
            }
            rooms.push(cyc);
        }
        Ok(FloorplanGraph {
            vertices,
            edges,
            edge_rooms,
            rooms,
        })
    }

    /// Rooms as loops; `None` for rooms with fewer than three corners.
    pub fn room_loops(&self) -> Vec<Option<LoopPolygon>> {
        self.rooms
            .iter()
            .map(|r| LoopPolygon::new(r.corners.iter().map(|&c| pixel(c)).collect()).ok())
            .collect()
    }

    /// Smallest non-negative canvas holding every coordinate, plus a border.
    pub fn extent(&self) -> (usize, usize) {
        let coords = self.rooms.iter().flat_map(|r| r.corners.iter()).chain(&self.graph.vertices);
        let (mut w, mut h) = (0i32, 0i32);
        for c in coords {
            w = w.max(c[0]);
            h = h.max(c[1]);
        }
        ((w + 2) as usize, (h + 2) as usize)
    }

    pub fn to_ground_truth(&self, width: usize, height: usize) -> Result<GroundTruthPlan, FormatError> {
        let rooms = self
            .rooms
            .iter()
            .zip(self.room_loops())
            .map(|(r, l)| {
                l.map(|outline| PlanRoom { id: r.id, outline })
                    .ok_or_else(|| FormatError::Plan(format!("room {} is not a valid loop", r.id)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GroundTruthPlan { width, height, rooms })
    }

    fn check_coords(&self) -> Result<(), FormatError> {
        let coords = self.rooms.iter().flat_map(|r| r.corners.iter()).chain(&self.graph.vertices);
        for c in coords {
            if c[0] < 0 || c[1] < 0 {
                return Err(FormatError::Plan(format!("negative coordinate {c:?}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let f: PlanFile = serde_json::from_str(text)?;
        f.check_coords()?;
        Ok(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FormatError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
        Self::from_json(&text).map_err(|e| e.at(path))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FormatError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| FormatError::io(path, e))
    }
}
