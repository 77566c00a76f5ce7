//! Command line: argument definitions and the commands behind them.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use roomloop_core::descent::{self, DescentConfig, DescentOutcome};
use roomloop_core::ingest::{project_point_cloud, DEFAULT_RESOLUTION};
use roomloop_core::oracle::{perturb_with_report, render_bundle, synth_plan, NoiseSpec};
use roomloop_core::solver::SolverConfig;
use roomloop_core::{evaluate, merge, EnergyBreakdown, Weights};

use crate::bundle::{load_bundle, save_bundle};
use crate::error::FormatError;
use crate::formats::{load_grids, load_points, save_grids};
use crate::plan::PlanFile;
use crate::svg::render_svg;

pub const PLAN_FILE: &str = "plan.json";
pub const FLOORPLAN_FILE: &str = "floorplan.json";
pub const TRACE_FILE: &str = "energy_trace.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const DENSITY_FILE: &str = "density_normal.grd";

#[derive(Debug, Parser)]
#[command(name = "roomloop", version, about = "Floorplan reconstruction from room segments and likelihood maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a ground-truth plan and its rendered likelihood maps.
    Synth(SynthArgs),
    /// Reconstruct a floorplan from a bundle directory.
    Reconstruct(ReconstructArgs),
    /// Score a predicted floorplan against ground truth.
    Eval(EvalArgs),
    /// Draw a floorplan as SVG.
    Render(RenderArgs),
    /// Project a point cloud into a density/normal map.
    Ingest(IngestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    /// Uniform value noise amplitude on all likelihood maps.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f32,
    /// Probability of dropping each corner blob.
    #[arg(long, default_value_t = 0.0)]
    pub p_drop: f64,
    /// Per-pixel rate of spurious corner blobs.
    #[arg(long, default_value_t = 0.0)]
    pub p_spur: f64,
    /// Probability of flipping each segment boundary pixel.
    #[arg(long, default_value_t = 0.0)]
    pub mask_flip: f64,
}

impl NoiseArgs {
    pub fn spec(&self) -> NoiseSpec {
        NoiseSpec {
            jitter: self.jitter,
            p_drop: self.p_drop,
            p_spur: self.p_spur,
            mask_flip: self.mask_flip,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub rooms: usize,
    /// Side of the square canvas in pixels.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// Fraction of rooms given a cut corner at a non-axis angle.
    #[arg(long, default_value_t = 0.25)]
    pub non_manhattan: f64,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct WeightArgs {
    #[arg(long, default_value_t = 0.2)]
    pub lambda1: f64,
    #[arg(long, default_value_t = 0.2)]
    pub lambda2: f64,
    #[arg(long, default_value_t = 100.0)]
    pub lambda3: f64,
    #[arg(long, default_value_t = 0.2)]
    pub lambda4: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda5: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda6: f64,
}

impl WeightArgs {
    pub fn weights(&self) -> Weights {
        Weights {
            corner_data: self.lambda1,
            edge_data: self.lambda2,
            interior: self.lambda3,
            corner_consistency: self.lambda4,
            edge_consistency: self.lambda5,
            model: self.lambda6,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    /// Bundle directory, as written by `synth`.
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = descent::DEFAULT_ROUNDS)]
    pub rounds: usize,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Minimum smoothed corner likelihood for a corner candidate.
    #[arg(long, default_value_t = roomloop_core::solver::DEFAULT_NMS_THRESHOLD)]
    pub nms_threshold: f32,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    pub pred: PathBuf,
    pub gt: PathBuf,
    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    pub plan: PathBuf,
    pub out: PathBuf,
    /// Grid file drawn in grey under the plan (first channel).
    #[arg(long)]
    pub underlay: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// Point cloud text file.
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| FormatError::io(dir, e))?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| FormatError::io(path, e))?;
    Ok(())
}

pub fn synth(args: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let plan = synth_plan(args.seed, args.rooms, args.resolution, args.non_manhattan)
        .with_context(|| format!("cannot generate a {}-room plan at {} px", args.rooms, args.resolution))?;
    let noise = args.noise.spec();
    let (bundle, report) = perturb_with_report(&render_bundle(&plan), &noise, args.seed);
    create_dir(&args.out)?;
    PlanFile::from_ground_truth(&plan).save(args.out.join(PLAN_FILE))?;
    let files = save_bundle(&bundle, &args.out)?;
    writeln!(
        out,
        "{} rooms ({} non-Manhattan), {} files written to {}",
        plan.rooms.len(),
        plan.non_manhattan_rooms(),
        files.len() + 1,
        args.out.display()
    )?;
    if !noise.is_zero() {
        writeln!(
            out,
            "noise: {} of {} corner blobs dropped, {} spurious",
            report.dropped,
            report.blobs,
            report.spurious.len()
        )?;
    }
    Ok(())
}

fn energy_row(s: &mut String, round: usize, room: &str, e: &EnergyBreakdown) {
    let _ = writeln!(
        s,
        "{round},{room},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
        e.corner_data,
        e.edge_data,
        e.interior,
        e.corner_consistency,
        e.edge_consistency,
        e.model,
        e.total()
    );
}

/// Energy after every room step and every round; round totals use `all` in
/// the room column.
pub fn trace_csv(outcome: &DescentOutcome) -> String {
    let mut s =
        String::from("round,room,corner_data,edge_data,interior,corner_consistency,edge_consistency,model,total\n");
    let mut rounds = outcome.trace.rounds.iter().peekable();
    for step in &outcome.trace.steps {
        while let Some(r) = rounds.next_if(|r| r.round < step.round) {
            energy_row(&mut s, r.round, "all", &r.energy);
        }
        energy_row(&mut s, step.round, &step.room.unwrap_or(0).to_string(), &step.energy);
    }
    for r in rounds {
        energy_row(&mut s, r.round, "all", &r.energy);
    }
    s
}

pub fn diagnostics_csv(outcome: &DescentOutcome) -> String {
    let frames = |fs: &[roomloop_core::ManhattanFrame]| {
        fs.iter().map(|f| f.bin().to_string()).collect::<Vec<_>>().join(" ")
    };
    let mut s = String::from("round,room,fallback,path_weight,frames\n");
    for d in &outcome.diagnostics {
        let fallback = d.fallback.map(|f| f.to_string()).unwrap_or_default();
        let weight = d.path_weight.map(|w| format!("{w:.6}")).unwrap_or_default();
        let _ = writeln!(s, "{},{},{fallback},{weight},{}", d.round, d.room, frames(&d.frames));
    }
    s
}

pub fn reconstruct(args: &ReconstructArgs, out: &mut dyn Write) -> Result<()> {
    let weights = args.weights.weights();
    if !weights.is_valid() {
        bail!("weights must be finite and non-negative");
    }
    let bundle = load_bundle(&args.input)?;
    let cfg = DescentConfig {
        rounds: args.rounds,
        weights,
        solver: SolverConfig {
            nms_threshold: args.nms_threshold,
            ..SolverConfig::default()
        },
        ..DescentConfig::default()
    };
    let outcome = descent::run(&bundle, &cfg);
    let (ids, loops): (Vec<usize>, Vec<_>) = outcome
        .state
        .loops
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.clone().map(|l| (i, l)))
        .unzip();
    let graph = merge(&loops);
    create_dir(&args.out)?;
    PlanFile::from_graph(&graph, &ids).save(args.out.join(FLOORPLAN_FILE))?;
    write_text(&args.out.join(TRACE_FILE), &trace_csv(&outcome))?;
    write_text(&args.out.join(DIAGNOSTICS_FILE), &diagnostics_csv(&outcome))?;
    let fallbacks = outcome.diagnostics.iter().filter(|d| d.fallback.is_some()).count();
    writeln!(
        out,
        "{} of {} rooms solved, {} fallbacks, energy {:.3}",
        loops.len(),
        bundle.segments.len(),
        fallbacks,
        outcome.trace.rounds.last().map(|r| r.energy.total()).unwrap_or(0.0)
    )?;
    Ok(())
}

pub fn eval(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let pred = PlanFile::load(&args.pred)?;
    let gt = PlanFile::load(&args.gt)?;
    let (pw, ph) = pred.extent();
    let (gw, gh) = gt.extent();
    let gt_plan = gt.to_ground_truth(pw.max(gw), ph.max(gh)).map_err(|e| e.at(&args.gt))?;
    let graph = pred.to_graph().map_err(|e| e.at(&args.pred))?;
    let result = evaluate(&graph, &gt_plan);
    write!(out, "{result}")?;
    if let Some(p) = &args.csv {
        write_text(p, &result.to_csv())?;
    }
    Ok(())
}

pub fn render(args: &RenderArgs, out: &mut dyn Write) -> Result<()> {
    let plan = PlanFile::load(&args.plan)?;
    let underlay = match &args.underlay {
        Some(p) => Some(load_grids(p)?.swap_remove(0)),
        None => None,
    };
    write_text(&args.out, &render_svg(&plan, underlay.as_ref()))?;
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(())
}

pub fn ingest(args: &IngestArgs, out: &mut dyn Write) -> Result<()> {
    let points = load_points(&args.input)?;
    let map = project_point_cloud(&points, args.resolution)
        .map_err(|e| anyhow::anyhow!("{}: {e}", args.input.display()))?;
    create_dir(&args.out)?;
    let path = args.out.join(DENSITY_FILE);
    save_grids(&map.channels(), &path)?;
    writeln!(out, "{} points projected to {}", points.len(), path.display())?;
    Ok(())
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => synth(a, out),
        Command::Reconstruct(a) => reconstruct(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Render(a) => render(a, out),
        Command::Ingest(a) => ingest(a, out),
    }
}
