//! Room-wise coordinate descent: rooms are solved one at a time, smallest
//! first, each against the current loops of the others, for a fixed number
//! of rounds.

use alloc::vec::Vec;

use crate::energy::{total_energy, DataMaps, EnergyBreakdown, FloorplanState, LoopPolygon, Weights};
use crate::frames::{assign_room_frames, extract_global_frames, ManhattanFrame, DEFAULT_TOLERANCE_DEG};
use crate::grid::BinaryMask;
use crate::oracle::LikelihoodBundle;
use crate::solver::{room_bbox, solve_room, Fallback, RoomProblem, SolverConfig};

pub const DEFAULT_ROUNDS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentConfig {
    pub rounds: usize,
    pub weights: Weights,
    pub solver: SolverConfig,
    pub tolerance_deg: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            rounds: DEFAULT_ROUNDS,
            weights: Weights::default(),
            solver: SolverConfig::default(),
            tolerance_deg: DEFAULT_TOLERANCE_DEG,
        }
    }
}

/// Energy after one room step (`room` set) or after a whole round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub round: usize,
    pub room: Option<usize>,
    pub energy: EnergyBreakdown,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyTrace {
    pub steps: Vec<TraceEntry>,
    pub rounds: Vec<TraceEntry>,
}

impl EnergyTrace {
    /// Total energy at the end of round `r` (0-based).
    pub fn after_round(&self, r: usize) -> Option<f64> {
        self.rounds.get(r).map(|e| e.energy.total())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomDiagnostic {
    pub round: usize,
    pub room: usize,
    pub fallback: Option<Fallback>,
    pub path_weight: Option<f64>,
    pub frames: Vec<ManhattanFrame>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub state: FloorplanState,
    pub trace: EnergyTrace,
    pub diagnostics: Vec<RoomDiagnostic>,
    pub global_frames: Vec<ManhattanFrame>,
}

/// Room indices by ascending segment area, ties by index.
pub fn order_rooms(segments: &[BinaryMask]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..segments.len()).collect();
    idx.sort_by_key(|&i| (segments[i].count(), i));
    idx
}

/// Runs the descent from an empty state.
pub fn run(bundle: &LikelihoodBundle, config: &DescentConfig) -> DescentOutcome {
    let state = FloorplanState::new(bundle.segments.len(), config.weights);
    run_from(state, bundle, config)
}

/// Runs `config.rounds` rounds starting from `state`, with `state.weights`.
/// Energies in the trace are recomputed from scratch after every step.
pub fn run_from(mut state: FloorplanState, bundle: &LikelihoodBundle, config: &DescentConfig) -> DescentOutcome {
    let maps = DataMaps::new(bundle.corner.clone(), bundle.edge.clone(), &bundle.segments);
    let global = extract_global_frames(&bundle.direction);
    let order = order_rooms(&bundle.segments);
    let weights = state.weights;
    let mut trace = EnergyTrace::default();
    let mut diagnostics = Vec::new();

    for round in 0..config.rounds {
        for &room in &order {
            let segment = &bundle.segments[room];
            let Ok(bbox) = room_bbox(segment, &config.solver) else {
                continue;
            };
            let others: Vec<&LoopPolygon> = state
                .loops
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != room)
                .filter_map(|(_, l)| l.as_ref())
                .collect();
            let alphabet = assign_room_frames(&global, &bundle.direction, &bbox, &others, config.tolerance_deg);
            let problem = RoomProblem {
                maps: &maps,
                segment,
                alphabet: &alphabet,
                others: &others,
                weights: &weights,
            };
            let Some(sol) = solve_room(&problem, &config.solver) else {
                continue;
            };
            diagnostics.push(RoomDiagnostic {
                round,
                room,
                fallback: sol.fallback,
                path_weight: sol.path_weight,
                frames: alphabet.frames().to_vec(),
            });
            state.loops[room] = Some(sol.outline);
            state.frames[room] = alphabet.frames().to_vec();
            trace.steps.push(TraceEntry {
                round,
                room: Some(room),
                energy: total_energy(&state, &maps),
            });
        }
        trace.rounds.push(TraceEntry {
            round,
            room: None,
            energy: total_energy(&state, &maps),
        });
    }
    DescentOutcome {
        state,
        trace,
        diagnostics,
        global_frames: global,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::loop_edge_pixels;
    use crate::grid::PixelCoord;
    use crate::oracle::{render_bundle, GroundTruthPlan, PlanRoom};
    use alloc::collections::BTreeSet;
    use alloc::vec;

    fn p(x: i32, y: i32) -> PixelCoord {
        PixelCoord::new(x, y)
    }

    fn mask_with(n: usize, count: usize) -> BinaryMask {
        let mut m = BinaryMask::new(n, n);
        for i in 0..count {
            m.set(p((i % n) as i32, (i / n) as i32), true);
        }
        m
    }

    #[test]
    fn ordering() {
        let segs = [mask_with(10, 30), mask_with(10, 10), mask_with(10, 20)];
        assert_eq!(order_rooms(&segs), [1, 2, 0]);
        let same = [mask_with(10, 5), mask_with(10, 5)];
        assert_eq!(order_rooms(&same), [0, 1]);
        assert_eq!(order_rooms(&segs[..1]), [0]);
    }

    fn plan(rooms: Vec<LoopPolygon>, n: usize) -> GroundTruthPlan {
        GroundTruthPlan {
            width: n,
            height: n,
            rooms: rooms
                .into_iter()
                .enumerate()
                .map(|(id, outline)| PlanRoom { id, outline })
                .collect(),
        }
    }

    #[test]
    fn zero_rounds_is_identity() {
        let pl = plan(vec![LoopPolygon::rectangle(p(10, 10), p(50, 40)).unwrap()], 64);
        let b = render_bundle(&pl);
        let cfg = DescentConfig {
            rounds: 0,
            ..DescentConfig::default()
        };
        let out = run(&b, &cfg);
        assert_eq!(out.state, FloorplanState::new(1, Weights::default()));
        assert!(out.trace.steps.is_empty() && out.trace.rounds.is_empty());
    }

    #[test]
    fn single_room_is_a_fixed_point() {
        let pl = plan(vec![LoopPolygon::rectangle(p(10, 12), p(52, 44)).unwrap()], 64);
        let b = render_bundle(&pl);
        let out = run(&b, &DescentConfig::default());
        assert_eq!(out.trace.steps.len(), 2);
        assert_eq!(out.trace.rounds.len(), 2);
        assert_eq!(out.trace.steps[0].energy, out.trace.steps[1].energy);
        let one = run(
            &b,
            &DescentConfig {
                rounds: 1,
                ..DescentConfig::default()
            },
        );
        assert_eq!(one.state, out.state);
    }

    #[test]
    fn adjacent_rooms_share_their_wall() {
        let a = LoopPolygon::rectangle(p(12, 12), p(50, 60)).unwrap();
        let b = LoopPolygon::rectangle(p(50, 12), p(84, 60)).unwrap();
        let pl = plan(vec![a, b], 96);
        let bundle = render_bundle(&pl);
        let out = run(&bundle, &DescentConfig::default());
        assert_eq!(out.trace.steps.len(), 4);
        let la = out.state.loops[0].as_ref().unwrap();
        let lb = out.state.loops[1].as_ref().unwrap();
        let shared: BTreeSet<_> = loop_edge_pixels(la)
            .intersection(&loop_edge_pixels(lb))
            .copied()
            .collect();
        // The common wall is one vertical run of pixels, near x = 50.
        let xs: BTreeSet<i32> = shared.iter().map(|q| q.x).collect();
        assert_eq!(xs.len(), 1, "{xs:?}");
        assert!((48..=52).contains(xs.first().unwrap()));
        assert!(shared.len() >= 40);
        assert!(out.trace.after_round(1).unwrap() <= out.trace.after_round(0).unwrap());
    }

    #[test]
    fn deterministic() {
        let pl = crate::oracle::synth_plan(4, 3, 128, 0.0).unwrap();
        let b = render_bundle(&pl);
        assert_eq!(run(&b, &DescentConfig::default()), run(&b, &DescentConfig::default()));
    }
}
