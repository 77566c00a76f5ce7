//! Room-wise floorplan reconstruction.
//!
//! A floorplan is reconstructed as one closed polygonal loop per room. Each
//! loop is found by a shortest-path search over the pixels around a rough room
//! segment, and rooms are optimized one at a time (coordinate descent) so that
//! neighbouring rooms are encouraged to share corners and walls. The loops are
//! finally merged into a single planar graph.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and SVG output live in the companion `roomloop` crate.
//!
//! Module map:
//! - [`grid`]: pixel coordinates, rasters, Bresenham lines, morphology, polygon fill
//! - [`ingest`]: point cloud to top-down density/normal map
//! - [`oracle`]: synthetic plans and their likelihood maps and room segments
//! - [`energy`]: the data, consistency and model-complexity objective
//! - [`frames`]: dominant Manhattan frames and per-room direction alphabets
//! - [`solver`]: one coordinate-descent step (start-edge, start-line, shortest path)
//! - [`descent`]: room ordering, rounds and the energy trace
//! - [`merge`]: snapping loops into a floorplan graph
//! - [`metrics`]: corner, edge, room and room++ precision/recall
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod math;

pub mod descent;
pub mod energy;
pub mod frames;
pub mod grid;
pub mod ingest;
pub mod merge;
pub mod metrics;
pub mod oracle;
pub mod solver;

pub use descent::{order_rooms, run, DescentConfig, DescentOutcome, EnergyTrace, TraceEntry};
pub use energy::{
    total_energy, DataMaps, EnergyBreakdown, FloorplanState, LoopError, LoopPolygon, Weights,
};
pub use frames::{DirectionAlphabet, ManhattanFrame};
pub use grid::{BinaryMask, BoundingBox, Connectivity, Grid2D, GridError, PixelCoord};
pub use merge::{merge, FloorplanGraph};
pub use metrics::{evaluate, Evaluation, PRResult};
pub use oracle::{DirectionMap, GroundTruthPlan, LikelihoodBundle, NoiseSpec};
