use std::collections::BTreeSet;

use proptest::prelude::*;
use roomloop_core::energy::data_term;
use roomloop_core::grid::{bresenham_line, BinaryMask, Grid2D, PixelCoord};
use roomloop_core::metrics::room_pr;
use roomloop_core::oracle::{perturb, render_bundle, synth_plan, NoiseSpec, PlanRoom};
use roomloop_core::solver::{room_bbox, solve_room, start_line, RoomProblem, SolverConfig};
use roomloop_core::{
    evaluate, merge, run, DataMaps, DescentConfig, DirectionAlphabet, FloorplanGraph, GroundTruthPlan, LoopPolygon,
    Weights,
};

fn p(x: i32, y: i32) -> PixelCoord {
    PixelCoord::new(x, y)
}

fn shifted(l: &LoopPolygon, dx: i32, dy: i32) -> LoopPolygon {
    LoopPolygon::new(l.corners().iter().map(|c| c.offset(dx, dy)).collect()).unwrap()
}

fn dist(a: PixelCoord, b: PixelCoord) -> f64 {
    (((a.x - b.x).pow(2) + (a.y - b.y).pow(2)) as f64).sqrt()
}

fn edge_set(g: &FloorplanGraph) -> BTreeSet<(PixelCoord, PixelCoord)> {
    g.edges
        .iter()
        .map(|&(a, b)| {
            let (u, v) = (g.vertices[a], g.vertices[b]);
            (u.min(v), u.max(v))
        })
        .collect()
}

#[test]
fn bresenham_is_symmetric_as_a_set() {
    for ay in 0..16 {
        for ax in 0..16 {
            for by in 0..16 {
                for bx in 0..16 {
                    let f: BTreeSet<_> = bresenham_line(p(ax, ay), p(bx, by)).into_iter().collect();
                    let r: BTreeSet<_> = bresenham_line(p(bx, by), p(ax, ay)).into_iter().collect();
                    assert_eq!(f, r, "({ax},{ay}) ({bx},{by})");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn merge_is_idempotent_bounded_and_keeps_rooms(
        seed in 0u64..500,
        rooms in 2usize..7,
        shifts in proptest::collection::vec((-2i32..=2, -2i32..=2), 7),
    ) {
        let plan = synth_plan(seed, rooms, 256, 0.0).unwrap();
        let loops: Vec<LoopPolygon> = plan
            .rooms
            .iter()
            .zip(&shifts)
            .map(|(r, &(dx, dy))| shifted(&r.outline, dx, dy))
            .collect();
        let g = merge(&loops);
        prop_assert_eq!(g.rooms.len(), loops.len());
        let out = g.room_loops();
        for (l, o) in loops.iter().zip(&out) {
            let o = o.as_ref().expect("every room stays a closed face");
            prop_assert!(o.len() >= 3);
            for &c in l.corners() {
                let nearest = o.corners().iter().map(|&v| dist(c, v)).fold(f64::INFINITY, f64::min);
                prop_assert!(nearest <= 5.5, "corner {:?} moved {}", c, nearest);
            }
        }
        let again = merge(&out.into_iter().flatten().collect::<Vec<_>>());
        prop_assert_eq!(edge_set(&again), edge_set(&g));
        prop_assert_eq!(again.rooms.len(), g.rooms.len());
    }

    #[test]
    fn metrics_are_translation_symmetric(
        seed in 0u64..500,
        rooms in 2usize..6,
        shifts in proptest::collection::vec((-3i32..=3, -3i32..=3), 6),
        tx in 0i32..40,
        ty in 0i32..40,
    ) {
        let plan = synth_plan(seed, rooms, 128, 0.25).unwrap();
        let pred: Vec<LoopPolygon> = plan
            .rooms
            .iter()
            .zip(&shifts)
            .map(|(r, &(dx, dy))| shifted(&r.outline, dx, dy))
            .collect();
        let g = merge(&pred);
        let moved_plan = GroundTruthPlan {
            width: plan.width + 40,
            height: plan.height + 40,
            rooms: plan
                .rooms
                .iter()
                .map(|r| PlanRoom { id: r.id, outline: shifted(&r.outline, tx, ty) })
                .collect(),
        };
        let mut moved = g.clone();
        for v in &mut moved.vertices {
            *v = v.offset(tx, ty);
        }
        let wide_plan = GroundTruthPlan { width: plan.width + 40, height: plan.height + 40, ..plan.clone() };
        prop_assert_eq!(evaluate(&moved, &moved_plan), evaluate(&g, &wide_plan));
    }

    #[test]
    fn removing_a_correct_room_never_raises_recall(seed in 0u64..500, rooms in 2usize..7, drop in 0usize..7) {
        let plan = synth_plan(seed, rooms, 128, 0.25).unwrap();
        let gt = plan.loops();
        let pred: Vec<Option<LoopPolygon>> = gt.iter().cloned().map(Some).collect();
        let full = room_pr(&pred, &gt, 128, 128);
        let mut fewer = pred.clone();
        fewer.remove(drop % rooms);
        let less = room_pr(&fewer, &gt, 128, 128);
        prop_assert!(less.recall <= full.recall);
        prop_assert!(less.recall < 1.0);
    }

    #[test]
    fn clean_maps_give_zero_data_term(seed in 0u64..1000, rooms in 2usize..8, frac in 0.0f64..0.5) {
        let plan = synth_plan(seed, rooms, 256, frac).unwrap();
        let b = render_bundle(&plan);
        let maps = DataMaps::new(b.corner.clone(), b.edge.clone(), &b.segments);
        let w = Weights { interior: 0.0, ..Weights::default() };
        for r in &plan.rooms {
            let d = data_term(&r.outline, &maps, &w);
            prop_assert_eq!((d.corner, d.edge), (0.0, 0.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn returned_loop_crosses_start_line_only_on_start_edge(
        seed in any::<u64>(),
        sx in 4i32..14,
        sy in 4i32..14,
        sw in 3i32..8,
        sh in 3i32..8,
    ) {
        let n = 24usize;
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 40) as f32 / (1u64 << 24) as f32
        };
        let corner = Grid2D::from_values(n, n, (0..n * n).map(|_| next()).collect()).unwrap();
        let edge = Grid2D::from_values(n, n, (0..n * n).map(|_| next()).collect()).unwrap();
        let mut segment = BinaryMask::new(n, n);
        for y in sy..sy + sh {
            for x in sx..sx + sw {
                segment.set(p(x, y), true);
            }
        }
        let maps = DataMaps::new(corner, edge, std::slice::from_ref(&segment));
        let cfg = SolverConfig { nms_radius: 1, nms_threshold: 0.3, dilation: 2, margin: 1 };
        let alphabet = DirectionAlphabet::axis_aligned();
        let w = Weights::default();
        let problem = RoomProblem { maps: &maps, segment: &segment, alphabet: &alphabet, others: &[], weights: &w };
        let sol = solve_room(&problem, &cfg).unwrap();
        if let (Some(se), None) = (sol.start_edge, sol.fallback) {
            let bbox = room_bbox(&segment, &cfg).unwrap();
            let line = start_line(se.a, se.b, &segment, &bbox).unwrap();
            let mut crossings = 0;
            for (u, v) in sol.raw.edges() {
                let start = (u, v) == (se.a, se.b) || (u, v) == (se.b, se.a);
                if start {
                    crossings += 1;
                } else {
                    prop_assert!(!line.crosses(u, v), "{:?}->{:?} crosses", u, v);
                }
            }
            prop_assert_eq!(crossings, 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn descent_is_deterministic_on_noisy_input(seed in 0u64..200, rooms in 2usize..5) {
        let plan = synth_plan(seed, rooms, 128, 0.25).unwrap();
        let noise = NoiseSpec { jitter: 0.1, p_drop: 0.1, p_spur: 0.0005, mask_flip: 0.05 };
        let b = perturb(&render_bundle(&plan), &noise, seed);
        let cfg = DescentConfig::default();
        prop_assert_eq!(run(&b, &cfg), run(&b.clone(), &cfg));
    }
}
