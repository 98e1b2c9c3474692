//! `quaddec`: quad-preserving mesh decimation from the command line.
//!
//! Exit codes: 0 on success, 1 on any error, 2 when `decimate` ran out of
//! valid collapses before reaching its target (the partial result is still
//! written).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use quaddec::attributes::SkeletonPose;
use quaddec::decimate::{decimate, DecimationConfig, DecimationStats, Target, DEFAULT_EPS_ABS};
use quaddec::edge_weight::EdgeWeightMode;
use quaddec::io::{obj, read_obj, read_skin_sidecar, synth, write_obj, write_skin_sidecar, SkinSidecar};
use quaddec::mesh::Mesh;
use quaddec::metrics::{self, MetricReport, DEFAULT_SAMPLES};
use quaddec::quadric::CostMode;
use quaddec::symmetry::{all_symmetry_weights, default_delta};

const EXIT_UNREACHABLE: u8 = 2;

#[derive(Parser)]
#[command(name = "quaddec", version, about = "Quad-preserving decimation of triangle/quad meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decimate an OBJ mesh.
    ///
    /// Sizes are counted in total triangles, 2·quads + triangles, so a quad
    /// counts as the two triangles it would split into.
    Decimate(DecimateArgs),
    /// Compare two meshes by sampled Chamfer and Hausdorff distance.
    ///
    /// Distances are normalized by the bounding-box diagonal of MESH_A. With
    /// --skin both meshes are posed and one report is produced per frame.
    Metrics(MetricsArgs),
    /// Dump per-edge symmetry weights as CSV (lo,hi,weight).
    Symmetry(SymmetryArgs),
    /// Generate a synthetic mesh.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightMode {
    None,
    Uniform,
    Dihedral,
}

impl From<WeightMode> for EdgeWeightMode {
    fn from(m: WeightMode) -> Self {
        match m {
            WeightMode::None => EdgeWeightMode::None,
            WeightMode::Uniform => EdgeWeightMode::Uniform,
            WeightMode::Dihedral => EdgeWeightMode::Dihedral,
        }
    }
}

#[derive(Args)]
struct DecimateArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Target as a fraction of the input's total triangles, in (0, 1].
    #[arg(long, conflicts_with = "target_tris", required_unless_present = "target_tris")]
    ratio: Option<f64>,
    /// Target total triangles (2·quads + triangles).
    #[arg(long)]
    target_tris: Option<usize>,
    /// Costs closer than this to a class's opening cost are treated as equal.
    #[arg(long, default_value_t = DEFAULT_EPS_ABS)]
    eps_abs: f64,
    /// Scale of the symmetry term in edge weights.
    #[arg(long, default_value_t = 0.0)]
    lambda_sym: f64,
    /// Scale of the joint-influence distance term in edge weights.
    #[arg(long, default_value_t = 1.0)]
    lambda_joint: f64,
    /// Symmetry matching distance (default: 1e-3 of the bbox diagonal).
    #[arg(long)]
    sym_delta: Option<f64>,
    /// Order collapses by cost alone.
    #[arg(long)]
    no_recency: bool,
    /// Rank collapses by accumulated quadric error instead of added error.
    #[arg(long)]
    original_qem: bool,
    #[arg(long, value_enum, default_value = "dihedral")]
    edge_weight_mode: WeightMode,
    /// Skin sidecar (JSON) for the input mesh.
    #[arg(long)]
    skin: Option<PathBuf>,
    /// Where to write the decimated skin sidecar (default: OUTPUT with
    /// extension .skin.json).
    #[arg(long, requires = "skin")]
    skin_out: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Include wall-clock timings in the report (makes it non-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct MetricsArgs {
    mesh_a: PathBuf,
    mesh_b: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skin sidecar for MESH_A; enables the animated series.
    #[arg(long)]
    skin: Option<PathBuf>,
    /// Skin sidecar for MESH_B. May be omitted when both meshes have the
    /// same vertex count, in which case MESH_A's influences are reused.
    #[arg(long, requires = "skin")]
    skin_b: Option<PathBuf>,
    /// Use only the first N poses.
    #[arg(long, requires = "skin")]
    frames: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Emit CSV instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct SymmetryArgs {
    input: PathBuf,
    /// Matching distance (default: 1e-3 of the bbox diagonal).
    #[arg(long)]
    delta: Option<f64>,
    /// Write the CSV here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(subcommand)]
    kind: SynthKind,
    /// Write the OBJ here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SynthKind {
    /// Unit cube with N × N quads per side. Sides are separate grids with
    /// split seam vertices unless --welded is given.
    SubdividedCube {
        n: usize,
        #[arg(long)]
        welded: bool,
    },
    /// W × H unit quads in the z = 0 plane.
    Grid { w: usize, h: usize },
    /// Open tube skinned to a chain of bones, with bend poses.
    SkinnedCylinder {
        segments: usize,
        rings: usize,
        bones: usize,
        /// Where to write the skin sidecar.
        #[arg(long)]
        skin_out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Decimate(a) => run_decimate(a),
        Command::Metrics(a) => run_metrics(a).map(|()| ExitCode::SUCCESS),
        Command::Symmetry(a) => run_symmetry(a).map(|()| ExitCode::SUCCESS),
        Command::Synth(a) => run_synth(a).map(|()| ExitCode::SUCCESS),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}

/// Write `text` to `path`, or to stdout when `path` is `None`.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct DecimateReport {
    input: PathBuf,
    output: PathBuf,
    eps_abs: f64,
    lambda_sym: f64,
    lambda_joint: f64,
    recency: bool,
    cost_mode: &'static str,
    edge_weight_mode: &'static str,
    #[serde(flatten)]
    stats: serde_json::Value,
}

fn run_decimate(a: DecimateArgs) -> Result<ExitCode> {
    let mut mesh = read_obj(&a.input)?;
    let skin = a.skin.as_deref().map(read_skin_sidecar).transpose()?;
    if let Some(skin) = &skin {
        skin.attach(&mut mesh)?;
    }
    let target = match (a.ratio, a.target_tris) {
        (Some(r), _) => Target::Ratio(r),
        (None, Some(n)) => Target::TotalTriangles(n),
        (None, None) => bail!("one of --ratio or --target-tris is required"),
    };
    let config = DecimationConfig {
        target,
        eps_abs: a.eps_abs,
        lambda_sym: a.lambda_sym,
        lambda_joint: a.lambda_joint,
        sym_delta: a.sym_delta,
        recency_enabled: !a.no_recency,
        cost_mode: if a.original_qem { CostMode::Original } else { CostMode::New },
        edge_weight_mode: a.edge_weight_mode.into(),
        ..Default::default()
    };
    let result = decimate(&mesh, &config)?;
    write_obj(&result.mesh, &a.output)?;
    if let Some(skin) = &skin {
        let path = a.skin_out.clone().unwrap_or_else(|| a.output.with_extension("skin.json"));
        write_skin_sidecar(&skin.with_influences_of(&result.mesh)?, &path)?;
    }
    log::info!(
        "{} collapses in {:.3}s (init {:.3}s)",
        result.stats.collapses,
        result.stats.collapse_time.as_secs_f64(),
        result.stats.init_time.as_secs_f64()
    );
    let report = DecimateReport {
        input: a.input,
        output: a.output,
        eps_abs: config.eps_abs,
        lambda_sym: config.lambda_sym,
        lambda_joint: config.lambda_joint,
        recency: config.recency_enabled,
        cost_mode: if a.original_qem { "original" } else { "new" },
        edge_weight_mode: match a.edge_weight_mode {
            WeightMode::None => "none",
            WeightMode::Uniform => "uniform",
            WeightMode::Dihedral => "dihedral",
        },
        stats: stats_json(&result.stats, a.timings)?,
    };
    emit(a.report.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    if result.stats.reached_target {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "warning: target of {} total triangles not reached; stopped at {}",
            result.stats.target_total_triangles, result.stats.total_triangles
        );
        Ok(ExitCode::from(EXIT_UNREACHABLE))
    }
}

fn stats_json(stats: &DecimationStats, timings: bool) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(stats)?;
    if !timings {
        if let Some(m) = v.as_object_mut() {
            m.remove("init_time");
            m.remove("collapse_time");
        }
    }
    Ok(v)
}

fn skinned(path: &Path, skin: &SkinSidecar) -> Result<Mesh> {
    let mut mesh = read_obj(path)?;
    skin.attach(&mut mesh)
        .with_context(|| format!("attaching skin to {}", path.display()))?;
    Ok(mesh)
}

fn run_metrics(a: MetricsArgs) -> Result<()> {
    let reports: Vec<MetricReport> = match &a.skin {
        None => vec![metrics::compare(&read_obj(&a.mesh_a)?, &read_obj(&a.mesh_b)?, a.samples, a.seed)?],
        Some(skin_a) => {
            let skin_a = read_skin_sidecar(skin_a)?;
            let skin_b = match &a.skin_b {
                Some(p) => read_skin_sidecar(p)?,
                None => skin_a.clone(),
            };
            if skin_a.skeleton != skin_b.skeleton {
                bail!("mismatched skeletons between the two sidecars");
            }
            let mesh_a = skinned(&a.mesh_a, &skin_a)?;
            let mesh_b = skinned(&a.mesh_b, &skin_b)?;
            let frames = a.frames.unwrap_or(skin_a.poses.len());
            if frames > skin_a.poses.len() {
                bail!("--frames {frames} exceeds the {} poses in the sidecar", skin_a.poses.len());
            }
            let poses: Vec<SkeletonPose> = skin_a.skinning_poses()?.into_iter().take(frames).collect();
            let mut rows = metrics::animated_metrics(&mesh_a, &mesh_b, &poses, a.samples, a.seed)?;
            for (row, pose) in rows.iter_mut().zip(&skin_a.poses) {
                row.frame = Some(pose.name.clone());
            }
            rows
        }
    };
    let text = if a.csv {
        csv_report(&reports)
    } else if a.skin.is_none() {
        serde_json::to_string_pretty(&reports[0])? + "\n"
    } else {
        serde_json::to_string_pretty(&reports)? + "\n"
    };
    emit(a.report.as_deref(), &text)
}

fn csv_report(rows: &[MetricReport]) -> String {
    let mut out = String::from("frame,chamfer,hausdorff,quads,tris,total_triangles,quad_ratio_preservation,sample_count,seed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:?},{:?},{},{},{},{},{},{}\n",
            r.frame.as_deref().unwrap_or(""),
            r.chamfer,
            r.hausdorff,
            r.quads,
            r.tris,
            r.total_triangles,
            r.quad_ratio_preservation.map_or(String::new(), |x| format!("{x:?}")),
            r.sample_count,
            r.seed
        ));
    }
    out
}

fn run_symmetry(a: SymmetryArgs) -> Result<()> {
    let mesh = read_obj(&a.input)?;
    let delta = a.delta.unwrap_or_else(|| default_delta(&mesh));
    if !(delta > 0.0 && delta.is_finite()) {
        bail!("--delta must be positive (got {delta})");
    }
    let weights = all_symmetry_weights(&mesh, delta);
    let mut edges: Vec<_> = weights.into_iter().collect();
    edges.sort_by_key(|(e, _)| *e);
    let mut out = String::from("lo,hi,weight\n");
    for (e, w) in edges {
        out.push_str(&format!("{},{},{:?}\n", e.lo(), e.hi(), w));
    }
    emit(a.output.as_deref(), &out)
}

fn run_synth(a: SynthArgs) -> Result<()> {
    let mesh = match a.kind {
        SynthKind::SubdividedCube { n, welded } => {
            if n == 0 {
                bail!("subdivided-cube needs N ≥ 1");
            }
            if welded {
                synth::subdivided_cube(n)
            } else {
                synth::subdivided_cube_unwelded(n, 1.0)
            }
        }
        SynthKind::Grid { w, h } => {
            if w == 0 || h == 0 {
                bail!("grid needs W ≥ 1 and H ≥ 1");
            }
            synth::grid(w, h)
        }
        SynthKind::SkinnedCylinder {
            segments,
            rings,
            bones,
            skin_out,
        } => {
            let (mesh, skin) = synth::skinned_cylinder(segments, rings, bones)?;
            write_skin_sidecar(&skin, &skin_out)?;
            mesh
        }
    };
    match &a.output {
        Some(p) => write_obj(&mesh, p)?,
        None => emit(None, &obj::format_obj(&mesh))?,
    }
    Ok(())
}
