//! Static SVG 1.1 drawings of floorplans.

use std::fmt::Write;

use roomloop_core::grid::{Grid2D, PixelCoord};

use crate::plan::PlanFile;

const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
    "#86bcb6", "#d37295",
];

const UNDERLAY_LEVELS: f32 = 16.0;

pub fn room_color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Grey runs for every row of `g`; values are quantized to 16 levels and
/// zero runs are skipped.
fn write_underlay(out: &mut String, g: &Grid2D) {
    out.push_str("  <g id=\"underlay\">\n");
    for y in 0..g.height() {
        let mut x = 0;
        while x < g.width() {
            let level = |x: usize| {
                let v = g.get(PixelCoord::new(x as i32, y as i32)).clamp(0.0, 1.0);
                (v * (UNDERLAY_LEVELS - 1.0)).round() as u32
            };
            let l = level(x);
            let start = x;
            while x < g.width() && level(x) == l {
                x += 1;
            }
            if l == 0 {
                continue;
            }
            let grey = 255 - (l * 255 / (UNDERLAY_LEVELS as u32 - 1));
            let _ = writeln!(
                out,
                "    <rect x=\"{start}\" y=\"{y}\" width=\"{}\" height=\"1\" fill=\"rgb({grey},{grey},{grey})\"/>",
                x - start
            );
        }
    }
    out.push_str("  </g>\n");
}

/// Draws rooms as filled polygons, then the graph's edges and vertices on
/// top. The canvas is the underlay's size when given, else the plan extent.
pub fn render_svg(plan: &PlanFile, underlay: Option<&Grid2D>) -> String {
    let (w, h) = match underlay {
        Some(g) => (g.width(), g.height()),
        None => plan.extent(),
    };
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    out.push_str(
        "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n",
    );
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(out, "  <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    if let Some(g) = underlay {
        write_underlay(&mut out, g);
    }
    out.push_str("  <g id=\"rooms\" fill-opacity=\"0.35\" stroke-width=\"1\">\n");
    for (i, room) in plan.rooms.iter().enumerate() {
        let pts: Vec<String> = room.corners.iter().map(|c| format!("{},{}", c[0], c[1])).collect();
        let c = room_color(i);
        let _ = writeln!(
            out,
            "    <polygon id=\"room-{}\" points=\"{}\" fill=\"{c}\" stroke=\"{c}\"/>",
            room.id,
            pts.join(" ")
        );
    }
    out.push_str("  </g>\n");
    out.push_str("  <g id=\"graph\" stroke=\"black\" stroke-width=\"1.5\" stroke-linecap=\"round\">\n");
    let v = &plan.graph.vertices;
    for &[a, b] in &plan.graph.edges {
        if let (Some(p), Some(q)) = (v.get(a), v.get(b)) {
            let _ = writeln!(
                out,
                "    <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                p[0], p[1], q[0], q[1]
            );
        }
    }
    out.push_str("  </g>\n");
    out.push_str("  <g id=\"corners\" fill=\"black\">\n");
    for p in v {
        let _ = writeln!(out, "    <circle cx=\"{}\" cy=\"{}\" r=\"2\"/>", p[0], p[1]);
    }
    out.push_str("  </g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use roomloop_core::oracle::synth_plan;

    #[test]
    fn structure() {
        let plan = PlanFile::from_ground_truth(&synth_plan(2, 3, 128, 0.0).unwrap());
        let s = render_svg(&plan, None);
        assert!(s.starts_with("<?xml"));
        assert!(s.contains("version=\"1.1\""));
        assert_eq!(s.matches("<polygon").count(), 3);
        assert_eq!(s.matches("<line").count(), plan.graph.edges.len());
        assert_eq!(s.matches("<circle").count(), plan.graph.vertices.len());
        assert_eq!(s.matches("<g").count(), s.matches("</g>").count());
        assert!(s.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn underlay_runs() {
        let g = Grid2D::from_values(4, 2, vec![0.0, 1.0, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let plan = PlanFile::from_json(r#"{"rooms":[],"graph":{"vertices":[],"edges":[]}}"#).unwrap();
        let s = render_svg(&plan, Some(&g));
        assert!(s.contains("width=\"4\" height=\"2\" viewBox=\"0 0 4 2\""));
        assert!(s.contains("<rect x=\"1\" y=\"0\" width=\"2\" height=\"1\" fill=\"rgb(0,0,0)\"/>"));
        assert_eq!(s.matches("height=\"1\"").count(), 2);
    }
}
