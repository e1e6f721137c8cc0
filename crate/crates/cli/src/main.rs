use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use detkit::darknet::{load_config, load_weights_file};
use detkit::dataset::{
    load_detections, load_ground_truth, load_image, render_annotated, save_detections, save_png, tensor_to_rgb,
    DatasetManifest, ManifestEntry,
};
use detkit::engine::{CompileOptions, CompiledNetwork};
use detkit::eval::report;
use detkit::postprocess::{Detector, DetectorOptions, DEFAULT_NMS_THRESHOLD, DEFAULT_SCORE_THRESHOLD};
use detkit::{evaluate, ApMode, ClassMap, Detection, ErrorKind, EvalOptions, EvalReport};
use rayon::prelude::*;

/// Overrides the worker-pool size for per-image work.
const WORKERS_VAR: &str = "DETKIT_WORKERS";

#[derive(Parser)]
#[command(name = "detkit", version, about = "YOLOv3 CPU inference and AP/mAP evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Darknet model over an image or a directory of images.
    Detect(DetectArgs),
    /// Score one detection file against ground truth.
    Eval(EvalArgs),
    /// Score several detection files side by side.
    Compare(CompareArgs),
    /// Draw detections onto their images.
    Render(RenderArgs),
}

#[derive(clap::Args)]
struct DetectArgs {
    #[arg(long)]
    cfg: PathBuf,
    #[arg(long)]
    weights: PathBuf,
    /// Image file or directory of .png/.jpg images.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SCORE_THRESHOLD, value_parser = unit_closed)]
    conf: f64,
    #[arg(long, default_value_t = DEFAULT_NMS_THRESHOLD, value_parser = unit_half_open)]
    nms: f64,
    /// Detection file to write; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for annotated PNGs.
    #[arg(long)]
    render: Option<PathBuf>,
    /// Class names file, one per line.
    #[arg(long)]
    names: Option<PathBuf>,
    /// Use the direct convolution and unfolded batch norm.
    #[arg(long)]
    naive: bool,
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Image directory or listing file.
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    dets: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5, 0.7], value_parser = unit_half_open)]
    iou: Vec<f64>,
    #[arg(long, default_value = "all-points", value_parser = ap_mode)]
    mode: ApMode,
    /// `.json` for JSON, `-` for stdout, anything else gets the text table.
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    names: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CompareArgs {
    #[arg(long)]
    gt: PathBuf,
    /// Repeat once per detector; rows are labelled with the file stem.
    #[arg(long, required = true)]
    dets: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5, 0.7], value_parser = unit_half_open)]
    iou: Vec<f64>,
    #[arg(long, default_value = "all-points", value_parser = ap_mode)]
    mode: ApMode,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    names: Option<PathBuf>,
}

#[derive(clap::Args)]
struct RenderArgs {
    /// Image file or directory of images.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    dets: PathBuf,
    /// Output directory; one `<image id>.png` per image.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    names: Option<PathBuf>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

fn unit_closed(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn unit_half_open(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1]"))
    }
}

fn ap_mode(s: &str) -> Result<ApMode, String> {
    s.parse().map_err(|e: detkit::Error| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(detkit::Error),
}

impl From<detkit::Error> for Failure {
    fn from(e: detkit::Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn class_map(names: Option<&Path>, model_classes: Option<usize>) -> CliResult<ClassMap> {
    let map = match names {
        Some(path) => ClassMap::load(path)?,
        None => match model_classes {
            Some(n) if n != ClassMap::default().len() => ClassMap::numbered(n)?,
            _ => ClassMap::default(),
        },
    };
    if let Some(n) = model_classes {
        if n != map.len() {
            return Err(Failure::Usage(format!("--names lists {} classes but the model predicts {n}", map.len())));
        }
    }
    Ok(map)
}

/// A single image becomes a one-entry manifest keyed by its stem.
fn image_entries(input: &Path) -> CliResult<Vec<ManifestEntry>> {
    if input.is_dir() {
        return Ok(DatasetManifest::from_dir(input)?.entries);
    }
    let image_id = input
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Failure::Usage(format!("--input {} has no usable file name", input.display())))?
        .to_string();
    Ok(vec![ManifestEntry { image_id, image: input.to_path_buf(), annotation: None }])
}

fn render_to(dir: &Path, entry: &ManifestEntry, dets: &[Detection], classes: &ClassMap) -> CliResult {
    let image = tensor_to_rgb(&load_image(&entry.image)?)?;
    let mine: Vec<Detection> = dets.iter().filter(|d| d.image_id == entry.image_id).cloned().collect();
    save_png(&dir.join(format!("{}.png", entry.image_id)), &render_annotated(&image, &mine, classes))?;
    Ok(())
}

fn io_failure(path: &Path, source: std::io::Error) -> Failure {
    Failure::Lib(detkit::Error::Io { path: path.to_path_buf(), source })
}

fn create_dir(dir: &Path) -> CliResult {
    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

fn detect(args: DetectArgs) -> CliResult {
    let config = load_config(&args.cfg)?;
    config.validate_detector()?;
    let classes = class_map(args.names.as_deref(), config.classes())?;
    let weights = load_weights_file(&args.weights, &config)?;
    let options = if args.naive { CompileOptions::naive() } else { CompileOptions::default() };
    let network = CompiledNetwork::compile(&config, &weights, options)?;
    let detector = Detector::new(network, DetectorOptions { score_threshold: args.conf, nms_threshold: args.nms })?;

    let entries = image_entries(&args.input)?;
    let per_image: Vec<Vec<Detection>> = entries
        .par_iter()
        .map(|e| detector.detect(&load_image(&e.image)?, &e.image_id))
        .collect::<detkit::Result<_>>()?;
    let detections: Vec<Detection> = per_image.into_iter().flatten().collect();

    match &args.out {
        Some(path) => save_detections(path, &detections)?,
        None => print!("{}", detkit::dataset::format_detections(&detections)),
    }
    if let Some(dir) = &args.render {
        create_dir(dir)?;
        entries.par_iter().try_for_each(|e| render_to(dir, e, &detections, &classes))?;
    }
    Ok(())
}

fn write_report(path: &Path, json: impl FnOnce() -> String, table: impl FnOnce() -> String) -> CliResult {
    if path == Path::new("-") {
        print!("{}", table());
        return Ok(());
    }
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let text = if is_json { json() } else { table() };
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn score(gt: &Path, dets: &Path, classes: &ClassMap, options: &EvalOptions) -> CliResult<EvalReport> {
    let manifest = DatasetManifest::load(gt)?;
    let ground_truth = load_ground_truth(&manifest, classes)?;
    let detections = load_detections(dets)?;
    Ok(evaluate(&detections, &ground_truth, classes, options)?)
}

fn eval(args: EvalArgs) -> CliResult {
    let classes = class_map(args.names.as_deref(), None)?;
    let options = EvalOptions { iou_thresholds: args.iou, mode: args.mode };
    let report = score(&args.gt, &args.dets, &classes, &options)?;
    write_report(&args.report, || report::to_json(&report), || report::to_table(&report))
}

fn compare(args: CompareArgs) -> CliResult {
    let classes = class_map(args.names.as_deref(), None)?;
    let options = EvalOptions { iou_thresholds: args.iou, mode: args.mode };
    let manifest = DatasetManifest::load(&args.gt)?;
    let ground_truth = load_ground_truth(&manifest, &classes)?;
    let mut reports = Vec::new();
    for path in &args.dets {
        let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        if reports.iter().any(|(name, _)| *name == label) {
            return Err(Failure::Usage(format!("two --dets files are both labelled `{label}`")));
        }
        let report = evaluate(&load_detections(path)?, &ground_truth, &classes, &options)?;
        reports.push((label, report));
    }
    write_report(&args.report, || report::compare_to_json(&reports), || report::compare_to_table(&reports))
}

fn render(args: RenderArgs) -> CliResult {
    let classes = class_map(args.names.as_deref(), None)?;
    let detections = load_detections(&args.dets)?;
    let entries = image_entries(&args.input)?;
    create_dir(&args.out)?;
    entries.par_iter().try_for_each(|e| render_to(&args.out, e, &detections, &classes))
}

fn configure_workers() -> CliResult {
    let Some(raw) = std::env::var_os(WORKERS_VAR) else {
        return Ok(());
    };
    let count = raw
        .to_str()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{WORKERS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(count)
        .build_global()
        .map_err(|e| Failure::Usage(format!("{WORKERS_VAR}: {e}")))
}

fn run(cli: Cli) -> CliResult {
    configure_workers()?;
    match cli.command {
        Command::Detect(a) => detect(a),
        Command::Eval(a) => eval(a),
        Command::Compare(a) => compare(a),
        Command::Render(a) => render(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("detkit: error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("detkit: error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Model => 3,
            })
        }
    }
}
