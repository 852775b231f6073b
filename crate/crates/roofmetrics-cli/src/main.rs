//! Batch front-end over the roofmetrics library: survey planning, scene
//! synthesis, cloud preparation, registration, comparison, and reporting.
//!
//! Every run is driven by a JSON pipeline config (all fields defaulted) and
//! writes an effective-config sidecar next to its outputs so results can be
//! reproduced exactly.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use roofmetrics::flight::{estimate_flight, generate_double_grid, CameraModel, MissionParams};
use roofmetrics::geom::{subsample_min_distance, BoundingRegion, SpatialIndex};
use roofmetrics::io::{
    read_cloud, read_fscore_matrix_csv, read_mesh, read_metric_curve_csv, read_pairs_csv,
    write_cloud, write_fscore_table_csv, write_metric_curve_csv, write_plan_csv, write_ply_mesh,
    write_svg_curves, CloudFileFormat, PlyEncoding,
};
use roofmetrics::metrics::{
    compare_clouds, fscore, metric_curve, precision, rank_table, recall, LocalModelOptions,
};
use roofmetrics::register::{
    apply_transform, icp_refine, rigid_from_point_pairs, IcpOptions, RigidTransform,
};
use roofmetrics::synth::{degrade, generate_scene, DegradeSpec, SceneSpec};

#[derive(Parser)]
#[command(name = "roofmetrics", version, about = "UAV survey planning and 3D model accuracy reports")]
struct Cli {
    /// Pipeline config JSON; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit errors as JSON on stderr.
    #[arg(long, global = true)]
    json: bool,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,
    /// Worker thread count (falls back to ROOFMETRICS_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a double-grid survey from camera and mission files.
    Plan(PlanArgs),
    /// Sample a mesh into a uniform surface point cloud.
    Sample(SampleArgs),
    /// Enforce a minimum pairwise distance on a cloud.
    Subsample(SubsampleArgs),
    /// Degrade a cloud with noise, dropout, occlusion, and a perturbation.
    Degrade(DegradeArgs),
    /// Register a source cloud onto a target (coarse pairs, then ICP).
    Align(AlignArgs),
    /// Score a reconstruction against a reference cloud.
    Compare(CompareArgs),
    /// Rank flights from an F-score matrix and plot metric curves.
    Report(ReportArgs),
    /// Generate a synthetic rooftop mesh and ground-truth cloud.
    Synth(SynthArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// Camera model JSON.
    #[arg(long)]
    camera: PathBuf,
    /// Mission parameters JSON.
    #[arg(long)]
    mission: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Seconds charged per pass-to-pass turn in the estimate.
    #[arg(long, default_value_t = 5.0)]
    turn_overhead: f64,
}

#[derive(Args)]
struct SampleArgs {
    /// Input mesh (PLY or OBJ).
    #[arg(long)]
    mesh: PathBuf,
    /// Output cloud (.ply or .xyz).
    #[arg(long)]
    output: PathBuf,
    /// Write PLY as ASCII instead of binary.
    #[arg(long)]
    ascii: bool,
}

#[derive(Args)]
struct SubsampleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    ascii: bool,
}

#[derive(Args)]
struct DegradeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Degradation spec JSON (noise sigma, dropout, perturbation, occlusions).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    ascii: bool,
}

#[derive(Args)]
struct AlignArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Coarse correspondence CSV (sx,sy,sz,tx,ty,tz); identity init if omitted.
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    ascii: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Reconstruction cloud.
    #[arg(long)]
    compared: PathBuf,
    /// Ground-truth cloud.
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Crop both clouds to this section from the config before scoring.
    #[arg(long)]
    section: Option<String>,
    /// Skip the min-distance subsampling step.
    #[arg(long)]
    no_subsample: bool,
    #[arg(long)]
    ascii: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Long-format F-score matrix CSV (flight,section,fscore).
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Metric-curve CSVs to render as SVG plots.
    #[arg(long)]
    curves: Vec<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Scene spec JSON.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    ascii: bool,
}

/// All pipeline constants in one reproducible, serializable place.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct PipelineConfig {
    /// Mesh sampling density (points per square meter).
    density: f64,
    /// Minimum pairwise distance enforced before comparison (meters).
    subsample_min_distance: f64,
    /// Also subsample the reference cloud before comparison.
    subsample_reference: bool,
    icp: IcpOptions,
    local_model: LocalModelOptions,
    /// Metric sweep thresholds (meters, ascending).
    thresholds: Vec<f64>,
    /// Threshold quoted in summary output (meters).
    headline_threshold: f64,
    /// Named roof sections for cropped comparisons.
    sections: Vec<SectionDef>,
    seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SectionDef {
    name: String,
    region: BoundingRegion,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            density: 40_000.0,
            subsample_min_distance: 0.005,
            subsample_reference: true,
            icp: IcpOptions::default(),
            local_model: LocalModelOptions::default(),
            thresholds: (0..=12).map(|i| i as f64 * 0.005).collect(),
            headline_threshold: 0.04,
            sections: vec![],
            seed: 0,
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let json_errors = cli.json;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json_errors {
                let payload = serde_json::json!({
                    "error": format!("{e:#}"),
                });
                eprintln!("{payload}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads.or_else(|| {
        std::env::var("ROOFMETRICS_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }

    let mut config = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let ctx = RunContext {
        config,
        force: cli.force,
    };

    match cli.command {
        Command::Plan(args) => cmd_plan(&ctx, &args),
        Command::Sample(args) => cmd_sample(&ctx, &args),
        Command::Subsample(args) => cmd_subsample(&ctx, &args),
        Command::Degrade(args) => cmd_degrade(&ctx, &args),
        Command::Align(args) => cmd_align(&ctx, &args),
        Command::Compare(args) => cmd_compare(&ctx, &args),
        Command::Report(args) => cmd_report(&ctx, &args),
        Command::Synth(args) => cmd_synth(&ctx, &args),
    }
}

struct RunContext {
    config: PipelineConfig,
    force: bool,
}

impl RunContext {
    /// Refuses to clobber an existing output unless --force was given.
    fn claim(&self, path: &Path) -> Result<()> {
        if path.exists() && !self.force {
            bail!("output '{}' already exists (pass --force to overwrite)", path.display());
        }
        Ok(())
    }

    fn cloud_format(&self, path: &Path, ascii: bool) -> CloudFileFormat {
        let xyz = path
            .extension()
            .map_or(false, |e| e.eq_ignore_ascii_case("xyz") || e.eq_ignore_ascii_case("txt"));
        if xyz {
            CloudFileFormat::XyzText
        } else if ascii {
            CloudFileFormat::PlyAscii
        } else {
            CloudFileFormat::PlyBinaryLittleEndian
        }
    }

    /// Writes the effective config next to the command's outputs.
    fn write_effective_config(&self, dir: &Path) -> Result<()> {
        let path = dir.join("effective_config.json");
        let body = serde_json::to_string_pretty(&self.config)?;
        fs::write(&path, body + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    let config: PipelineConfig = match path {
        Some(p) => {
            let body = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&body).with_context(|| format!("parsing {}", p.display()))?
        }
        None => PipelineConfig::default(),
    };
    if config.thresholds.is_empty() || config.thresholds.windows(2).any(|w| w[1] <= w[0]) {
        bail!("config thresholds must be non-empty and strictly ascending");
    }
    if !(config.headline_threshold > 0.0) {
        bail!("config headline_threshold must be positive");
    }
    if !(config.density > 0.0) || !(config.subsample_min_distance > 0.0) {
        bail!("config density and subsample_min_distance must be positive");
    }
    Ok(config)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let body = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&body).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let body = serde_json::to_string_pretty(value)?;
    fs::write(path, body + "\n").with_context(|| format!("writing {}", path.display()))
}

fn make_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cmd_plan(ctx: &RunContext, args: &PlanArgs) -> Result<()> {
    let camera: CameraModel = read_json(&args.camera)?;
    let mission: MissionParams = read_json(&args.mission)?;

    let plan = generate_double_grid(&mission, &camera).context("flight planning")?;
    let estimate = estimate_flight(&plan, args.turn_overhead);

    make_out_dir(&args.out_dir)?;
    let csv = args.out_dir.join("plan.csv");
    let plan_json = args.out_dir.join("plan.json");
    let estimate_json = args.out_dir.join("estimate.json");
    for p in [&csv, &plan_json, &estimate_json] {
        ctx.claim(p)?;
    }
    write_plan_csv(&plan, &csv)?;
    write_json(&plan, &plan_json)?;
    write_json(&estimate, &estimate_json)?;
    ctx.write_effective_config(&args.out_dir)?;

    println!(
        "planned {} waypoints, {} captures, {:.1} min, {:.0} m path",
        plan.waypoints.len(),
        estimate.capture_count,
        estimate.duration_min,
        estimate.path_length_m
    );
    Ok(())
}

fn cmd_sample(ctx: &RunContext, args: &SampleArgs) -> Result<()> {
    let mesh = read_mesh(&args.mesh).context("reading mesh")?;
    let cloud = roofmetrics::geom::sample_mesh(&mesh, ctx.config.density, ctx.config.seed)
        .context("sampling mesh")?;
    ctx.claim(&args.output)?;
    write_cloud(&cloud, &args.output, ctx.cloud_format(&args.output, args.ascii))?;
    sidecar_config(ctx, &args.output)?;
    println!("sampled {} points", cloud.len());
    Ok(())
}

fn cmd_subsample(ctx: &RunContext, args: &SubsampleArgs) -> Result<()> {
    let cloud = read_cloud(&args.input).context("reading cloud")?;
    let out = subsample_min_distance(
        &cloud,
        ctx.config.subsample_min_distance,
        Some(ctx.config.seed),
    )
    .context("subsampling")?;
    ctx.claim(&args.output)?;
    write_cloud(&out, &args.output, ctx.cloud_format(&args.output, args.ascii))?;
    sidecar_config(ctx, &args.output)?;
    println!("kept {} of {} points", out.len(), cloud.len());
    Ok(())
}

fn cmd_degrade(ctx: &RunContext, args: &DegradeArgs) -> Result<()> {
    let cloud = read_cloud(&args.input).context("reading cloud")?;
    let spec: DegradeSpec = read_json(&args.spec)?;
    let (out, applied) = degrade(&cloud, &spec, ctx.config.seed).context("degrading")?;
    ctx.claim(&args.output)?;
    write_cloud(&out, &args.output, ctx.cloud_format(&args.output, args.ascii))?;
    let transform_path = args.output.with_extension("transform.json");
    ctx.claim(&transform_path)?;
    write_json(&applied, &transform_path)?;
    sidecar_config(ctx, &args.output)?;
    println!("degraded to {} points", out.len());
    Ok(())
}

fn cmd_align(ctx: &RunContext, args: &AlignArgs) -> Result<()> {
    let source = read_cloud(&args.source).context("reading source cloud")?;
    let target = read_cloud(&args.target).context("reading target cloud")?;
    let index = SpatialIndex::build(&target).context("indexing target")?;

    let init = match &args.pairs {
        Some(p) => {
            let pairs = read_pairs_csv(p).context("reading pairs")?;
            rigid_from_point_pairs(&pairs).context("coarse alignment")?
        }
        None => RigidTransform::identity(),
    };
    let result = icp_refine(&source, &index, &init, &ctx.config.icp).context("ICP refinement")?;
    let aligned = apply_transform(&source, &result.transform);

    make_out_dir(&args.out_dir)?;
    let transform_json = args.out_dir.join("transform.json");
    let aligned_path = args.out_dir.join("aligned.ply");
    for p in [&transform_json, &aligned_path] {
        ctx.claim(p)?;
    }
    write_json(&result, &transform_json)?;
    write_cloud(&aligned, &aligned_path, ctx.cloud_format(&aligned_path, args.ascii))?;
    ctx.write_effective_config(&args.out_dir)?;

    println!(
        "aligned in {} iterations (converged: {}), final RMSE {:.6} m",
        result.iterations_used, result.converged, result.final_rmse
    );
    Ok(())
}

#[derive(Serialize)]
struct CompareSummary {
    headline_threshold_m: f64,
    precision_pct: f64,
    recall_pct: f64,
    fscore_pct: f64,
    compared_points: usize,
    reference_points: usize,
    compared_fallback_fraction: f64,
    reference_fallback_fraction: f64,
}

fn cmd_compare(ctx: &RunContext, args: &CompareArgs) -> Result<()> {
    let mut compared = read_cloud(&args.compared).context("reading compared cloud")?;
    let mut reference = read_cloud(&args.reference).context("reading reference cloud")?;

    if let Some(name) = &args.section {
        let section = ctx
            .config
            .sections
            .iter()
            .find(|s| &s.name == name)
            .with_context(|| format!("section '{name}' not found in config"))?;
        compared = compared.crop(&section.region);
        reference = reference.crop(&section.region);
    }
    if !args.no_subsample {
        compared =
            subsample_min_distance(&compared, ctx.config.subsample_min_distance, Some(ctx.config.seed))?;
        if ctx.config.subsample_reference {
            reference = subsample_min_distance(
                &reference,
                ctx.config.subsample_min_distance,
                Some(ctx.config.seed),
            )?;
        }
    }

    let result = compare_clouds(&compared, &reference, &ctx.config.local_model)
        .context("cloud-to-cloud comparison")?;
    let curve = metric_curve(&result, &ctx.config.thresholds)?;
    let d = ctx.config.headline_threshold;
    let p = precision(&result.recon_to_gt.distances, d)?;
    let r = recall(&result.gt_to_recon.distances, d)?;

    make_out_dir(&args.out_dir)?;
    let c2c_path = args.out_dir.join("c2c.ply");
    let curve_path = args.out_dir.join("curve.csv");
    let summary_path = args.out_dir.join("summary.json");
    for path in [&c2c_path, &curve_path, &summary_path] {
        ctx.claim(path)?;
    }

    let scored = compared.clone().with_scalars(result.recon_to_gt.distances.clone())?;
    write_cloud(&scored, &c2c_path, ctx.cloud_format(&c2c_path, args.ascii))?;
    write_metric_curve_csv(&curve, &curve_path)?;
    let summary = CompareSummary {
        headline_threshold_m: d,
        precision_pct: p,
        recall_pct: r,
        fscore_pct: fscore(p, r),
        compared_points: compared.len(),
        reference_points: reference.len(),
        compared_fallback_fraction: result.recon_to_gt.fallback_fraction(),
        reference_fallback_fraction: result.gt_to_recon.fallback_fraction(),
    };
    write_json(&summary, &summary_path)?;
    ctx.write_effective_config(&args.out_dir)?;

    println!(
        "P {:.2}% / R {:.2}% / F {:.2}% at {:.1} cm",
        p,
        r,
        fscore(p, r),
        d * 100.0
    );
    Ok(())
}

fn cmd_report(ctx: &RunContext, args: &ReportArgs) -> Result<()> {
    let (flights, sections, scores) =
        read_fscore_matrix_csv(&args.scores).context("reading F-score matrix")?;
    let table = rank_table(flights, sections, scores).context("ranking")?;

    make_out_dir(&args.out_dir)?;
    let ranked_path = args.out_dir.join("ranked.csv");
    ctx.claim(&ranked_path)?;
    write_fscore_table_csv(&table, &ranked_path)?;

    for curve_path in &args.curves {
        let curve = read_metric_curve_csv(curve_path)
            .with_context(|| format!("reading {}", curve_path.display()))?;
        let stem = curve_path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("curve");
        let svg_path = args.out_dir.join(format!("{stem}.svg"));
        ctx.claim(&svg_path)?;
        write_svg_curves(&curve, stem, &svg_path)?;
    }
    ctx.write_effective_config(&args.out_dir)?;

    for (f, flight) in table.flights.iter().enumerate() {
        println!("{flight}: mean F {:.2}%, mean rank {:.1}", table.mean_fscore[f], table.mean_rank[f]);
    }
    Ok(())
}

fn cmd_synth(ctx: &RunContext, args: &SynthArgs) -> Result<()> {
    let spec: SceneSpec = read_json(&args.spec)?;
    let scene = generate_scene(&spec).context("generating scene")?;

    make_out_dir(&args.out_dir)?;
    let mesh_path = args.out_dir.join("mesh.ply");
    let cloud_path = args.out_dir.join("gt_cloud.ply");
    for p in [&mesh_path, &cloud_path] {
        ctx.claim(p)?;
    }
    let encoding = if args.ascii {
        PlyEncoding::Ascii
    } else {
        PlyEncoding::BinaryLittleEndian
    };
    write_ply_mesh(&scene.mesh, &mesh_path, encoding)?;
    write_cloud(&scene.gt_cloud, &cloud_path, ctx.cloud_format(&cloud_path, args.ascii))?;
    ctx.write_effective_config(&args.out_dir)?;

    println!(
        "scene: {} triangles, {} ground-truth points",
        scene.mesh.triangles().len(),
        scene.gt_cloud.len()
    );
    Ok(())
}

/// For single-file outputs the effective config sits alongside the file.
fn sidecar_config(ctx: &RunContext, output: &Path) -> Result<()> {
    let dir = output.parent().unwrap_or(Path::new("."));
    ctx.write_effective_config(dir)
}
