use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thz_envsense::config::{parse_counts, ConfigFile};
use thz_envsense::dataset::{generate_dataset, Dataset};
use thz_envsense::evaluate::{evaluate_predictions, run_baseline, Method, ReportFile};
use thz_envsense::formats::write_json;
use thz_envsense::render::render_scene;
use thz_envsense::{DatasetConfig, Error, Result, Split};
use thz_envsense_core::metrics::DEFAULT_IOU_THRESHOLD;

/// Simulated THz radio environments: dataset generation, interpolation
/// baselines, evaluation of predicted maps and rendering.
#[derive(Parser, Debug)]
#[command(name = "thz-envsense", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a corpus of scenes, radio maps, priors and encodings.
    Generate(GenerateArgs),
    /// Complete every prior with an interpolation baseline and score it.
    Baseline(BaselineArgs),
    /// Score a directory of gen_{id}.f32 predictions against a corpus.
    Evaluate(EvaluateArgs),
    /// Write PNG renderings of one scene.
    Render(RenderArgs),
}

#[derive(Clone, Debug)]
struct Counts(Vec<usize>);

fn counts_arg(s: &str) -> std::result::Result<Counts, String> {
    parse_counts(s).map(Counts).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Number of scenes.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    /// Obstacle counts per scene, `A-B` or `N`.
    #[arg(long, value_parser = counts_arg)]
    counts: Option<Counts>,
    /// Fraction of obstacle-free cells carrying a sensor, in (0, 1].
    #[arg(long)]
    rate: Option<f64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Corpus preset: train (4500 scenes, 1-5 obstacles) or test (900, 6).
    #[arg(long)]
    split: Option<Split>,
    /// Segmentation threshold of the encoding, in (0, 1).
    #[arg(long)]
    psi_smax: Option<f64>,
    /// Fixed beam boresight, degrees.
    #[arg(long)]
    boresight_deg: Option<f64>,
    /// Draw the boresight uniformly per scene.
    #[arg(long)]
    random_boresight: bool,
    /// JSON settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write PNGs of every scene to OUT/render.
    #[arg(long)]
    render: bool,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    /// Corpus directory.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "nn")]
    method: Method,
    /// IDW distance exponent.
    #[arg(long, default_value_t = 2.0)]
    power: f64,
    /// IoU threshold for matching detections.
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    iou: f64,
    /// Directory for predictions and report.json [default: DATA/baseline_METHOD].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write PNGs of every scene to OUT/render.
    #[arg(long)]
    render: bool,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Corpus directory.
    #[arg(long)]
    data: PathBuf,
    /// Directory holding gen_{id}.f32 for every scene.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    iou: f64,
    /// Report file; the report is always printed to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Corpus directory.
    #[arg(long)]
    data: PathBuf,
    /// Scene id; every scene when omitted.
    #[arg(long)]
    scene: Option<u64>,
    /// Prediction directory for aware-map and error renderings.
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Pixels per cell edge.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=64))]
    scale: u32,
}

fn check_iou(iou: f64) -> Result<()> {
    if iou > 0.0 && iou < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "--iou must lie in (0, 1), got {iou}"
        )))
    }
}

fn print_report(report: &ReportFile, path: Option<&Path>) -> Result<()> {
    if let Some(p) = path {
        write_json(p, report)?;
    }
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    println!("{text}");
    Ok(())
}

fn render_all(
    data: &Dataset,
    pred: Option<&Path>,
    out: &Path,
    ids: Vec<u64>,
    scale: u32,
) -> Result<()> {
    for id in ids {
        render_scene(data, id, pred, out, scale)?;
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let split = args.split.or(file.split).unwrap_or(Split::Train);
    let mut cfg = DatasetConfig::for_split(split);
    cfg.apply(&file);
    if let Some(n) = args.n {
        cfg.n_scenes = n as usize;
    }
    if let Some(Counts(c)) = args.counts {
        cfg.obstacle_count_choices = c;
    }
    if let Some(r) = args.rate {
        cfg.sampling_rate = r;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(s) = args.psi_smax {
        cfg.psi_smax = s;
    }
    if let Some(b) = args.boresight_deg {
        cfg.channel.beam_boresight_deg = b;
    }
    if args.random_boresight {
        cfg.random_boresight = true;
    }
    let manifest = generate_dataset(cfg, &args.out)?;
    if args.render {
        let data = Dataset::open(&args.out)?;
        let ids = data.scene_ids().collect();
        render_all(&data, None, &args.out.join("render"), ids, 8)?;
    }
    println!(
        "wrote {} (n_scenes={}, rate={}, seed={})",
        args.out
            .join(thz_envsense::dataset::MANIFEST_FILE)
            .display(),
        manifest.n_scenes,
        manifest.sampling_rate,
        manifest.master_seed
    );
    Ok(())
}

fn baseline(args: BaselineArgs) -> Result<()> {
    check_iou(args.iou)?;
    let data = Dataset::open(&args.data)?;
    let out = args
        .out
        .unwrap_or_else(|| args.data.join(format!("baseline_{}", args.method.name())));
    let report = run_baseline(&data, args.method, args.power, &out, args.iou)?;
    if args.render {
        let ids = data.scene_ids().collect();
        render_all(&data, Some(&out), &out.join("render"), ids, 8)?;
    }
    print_report(&ReportFile::from(&report), Some(&out.join("report.json")))
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    check_iou(args.iou)?;
    let data = Dataset::open(&args.data)?;
    let report = evaluate_predictions(&data, &args.pred, args.iou)?;
    print_report(&ReportFile::from(&report), args.out.as_deref())
}

fn render(args: RenderArgs) -> Result<()> {
    let data = Dataset::open(&args.data)?;
    let ids = match args.scene {
        Some(id) => {
            data.entry(id)?;
            vec![id]
        }
        None => data.scene_ids().collect(),
    };
    render_all(&data, args.pred.as_deref(), &args.out, ids, args.scale)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Baseline(a) => baseline(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Render(a) => render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
