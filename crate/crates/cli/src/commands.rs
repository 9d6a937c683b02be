use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use lcdvf_core::pipeline::{build_force, initial_circle, segment_with_force};
use lcdvf_core::{
    circumscribed_circle, evaluate, fit_parameters, interior_distance, io, mask_to_dt, rasterize, BinaryMask, Circle,
    InitSpec, ScalarField, Segmentation,
};
use log::info;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::output::{contour_json, frame_json, json_line, metrics_json, render_frame, write_mask, write_pfm, write_text};
use crate::settings::{parse_field, parse_init, Settings, SolverArgs};

fn load_mask(path: &Path) -> CliResult<BinaryMask> {
    io::load_mask(path).map_err(|e| CliError::from(e).at(path))
}

fn load_image(path: &Path) -> CliResult<ScalarField> {
    io::load_image(path).map_err(|e| CliError::from(e).at(path))
}

/// Driving mask, optional image and ground truth, loaded and checked together.
struct Inputs {
    mask: BinaryMask,
    gt: BinaryMask,
}

/// Inputs of different sizes are a usage error, not a computation failure.
fn mismatch(e: lcdvf_core::Error, path: &Path) -> CliError {
    CliError::usage(e.to_string()).at(path)
}

fn load_inputs(mask: &Path, image: Option<&Path>, gt: Option<&Path>) -> CliResult<Inputs> {
    let m = load_mask(mask)?;
    if let Some(p) = image {
        let img = load_image(p)?;
        m.ensure_dims(img.dims()).map_err(|e| mismatch(e, p))?;
    }
    let g = match gt {
        Some(p) => {
            let g = load_mask(p)?;
            m.ensure_dims(g.dims()).map_err(|e| mismatch(e, p))?;
            g
        }
        None => m.clone(),
    };
    Ok(Inputs { mask: m, gt: g })
}

fn run_settings(settings: &Settings, mask: &BinaryMask, gt: &BinaryMask) -> CliResult<Segmentation> {
    let (w, h) = mask.dims();
    let params = settings.params(mask)?;
    let force = build_force(mask, &settings.field, settings.snake.clip_norm)?;
    let initial = initial_circle(mask, &settings.init)?.to_contour(settings.snake.node_count, w, h)?;
    Ok(segment_with_force(&force, initial, &params, &settings.snake, Some(gt))?)
}

fn result_json(seg: &Segmentation) -> Value {
    json!({
        "metrics": metrics_json(seg.metrics.as_ref().expect("ground truth is always supplied")),
        "nodes": seg.contour.len(),
        "iterations": seg.trace.len() - 1,
        "contour": contour_json(&seg.contour),
        "energies": seg.trace.energies(),
        "displacements": seg.trace.displacements(),
    })
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Binary mask (PGM, foreground >= 128) driving the distance transform and initialization
    #[arg(long)]
    pub mask: PathBuf,
    /// Ground-truth mask; defaults to --mask
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Intensity image (PGM/PPM); only checked for matching dimensions
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Directory for result.json, contour.json and prediction.pgm
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for frame_%04d.pgm / frame_%04d.json, one per iteration
    #[arg(long)]
    pub dump_frames: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

pub fn run(args: &RunArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let settings = Settings::resolve(&args.solver)?;
    let inputs = load_inputs(&args.mask, args.image.as_deref(), args.gt.as_deref())?;
    let start = Instant::now();
    let seg = run_settings(&settings, &inputs.mask, &inputs.gt)?;
    info!("run finished in {} ms", start.elapsed().as_millis());

    let result = json_line(&result_json(&seg));
    if let Some(dir) = &args.out {
        write_text(&dir.join("result.json"), &format!("{result}\n"))?;
        write_text(&dir.join("contour.json"), &format!("{}\n", json_line(&contour_json(&seg.contour))))?;
        write_mask(&dir.join("prediction.pgm"), &seg.prediction)?;
    }
    if let Some(dir) = &args.dump_frames {
        let (w, h) = inputs.mask.dims();
        for (i, entry) in seg.trace.entries.iter().enumerate() {
            let raster = rasterize(&entry.contour, w, h)?.mask;
            let frame = render_frame(&inputs.mask, &raster);
            let pgm = dir.join(format!("frame_{i:04}.pgm"));
            crate::output::write_atomic(&pgm, |wr| Ok(io::write_pgm(wr, &frame)?))?;
            write_text(
                &dir.join(format!("frame_{i:04}.json")),
                &format!("{}\n", json_line(&frame_json(i, entry))),
            )?;
        }
    }
    writeln!(stdout, "{result}")?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Print a single JSON object
    #[arg(long)]
    pub json: bool,
}

pub fn metrics(args: &MetricsArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let pred = load_mask(&args.pred)?;
    let gt = load_mask(&args.gt)?;
    let m = evaluate(&pred, &gt)?;
    if args.json {
        writeln!(stdout, "{}", json_line(&metrics_json(&m)))?;
    } else {
        writeln!(stdout, "iou     {:.6}", m.iou)?;
        writeln!(stdout, "dice    {:.6}", m.dice)?;
        writeln!(stdout, "boundf  {:.6}", m.boundf)?;
        for (t, f) in lcdvf_core::BOUNDF_THRESHOLDS.iter().zip(m.boundf_per_threshold) {
            writeln!(stdout, "  @{t:.0}px  {f:.6}")?;
        }
    }
    Ok(())
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtKind {
    /// Distance to the mask's inner boundary, everywhere
    Boundary,
    /// Distance to the nearest background pixel, zero off the mask
    Interior,
}

#[derive(Args, Debug)]
pub struct DtArgs {
    #[arg(long)]
    pub mask: PathBuf,
    /// Output PFM
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = DtKind::Boundary)]
    pub kind: DtKind,
}

pub fn dt(args: &DtArgs) -> CliResult<()> {
    let mask = load_mask(&args.mask)?;
    let field = match args.kind {
        DtKind::Boundary => mask_to_dt(&mask)?,
        DtKind::Interior => interior_distance(&mask)?,
    };
    write_pfm(&args.out, field.field())
}

#[derive(Args, Debug)]
pub struct LearnArgs {
    /// Mask (or mask-like image, thresholded at 128) driving the force field and initialization
    #[arg(long, alias = "mask")]
    pub image: PathBuf,
    /// Ground-truth mask
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Subgradient step size
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// Directory for alpha.json, beta.pfm and kappa.pfm
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

pub fn learn(args: &LearnArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if !(args.lr.is_finite() && args.lr >= 0.0) {
        return Err(CliError::usage(format!("invalid learning rate {}", args.lr)));
    }
    let settings = Settings::resolve(&args.solver)?;
    let inputs = load_inputs(&args.image, None, Some(&args.gt))?;
    let (w, h) = inputs.mask.dims();
    let params = settings.params(&inputs.mask)?;
    let force = build_force(&inputs.mask, &settings.field, settings.snake.clip_norm)?;
    let init = initial_circle(&inputs.mask, &settings.init)?.to_contour(settings.snake.node_count, w, h)?;
    let start = Instant::now();
    let fit = fit_parameters(&inputs.gt, &init, &force, params, &settings.snake, args.lr, args.epochs)?;
    info!("learning finished in {} ms", start.elapsed().as_millis());

    let summary = json!({
        "alpha": fit.params.alpha(),
        "initial_iou": fit.initial_iou,
        "best_iou": fit.best_iou,
        "best_epoch": fit.best_epoch,
        "history": fit.history,
    });
    let line = json_line(&summary);
    write_text(&args.out.join("alpha.json"), &format!("{line}\n"))?;
    write_pfm(&args.out.join("beta.pfm"), fit.params.beta())?;
    write_pfm(&args.out.join("kappa.pfm"), fit.params.kappa())?;
    writeln!(stdout, "{line}")?;
    Ok(())
}

/// One manifest entry: optional image, driving mask, optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestItem {
    pub image: Option<PathBuf>,
    pub mask: PathBuf,
    pub gt: Option<PathBuf>,
}

/// Lines of `[image|-] mask [gt]`, or a lone `mask`; `#` starts a comment.
/// Relative paths resolve against the manifest's directory.
pub fn parse_manifest(path: &Path) -> CliResult<Vec<ManifestItem>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::from(e).at(path))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |s: &str| -> PathBuf {
        let p = Path::new(s);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let mut items = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let item = match tok.as_slice() {
            [mask] => ManifestItem {
                image: None,
                mask: resolve(mask),
                gt: None,
            },
            [image, mask] | [image, mask, _] => ManifestItem {
                image: (*image != "-").then(|| resolve(image)),
                mask: resolve(mask),
                gt: tok.get(2).map(|g| resolve(g)),
            },
            _ => {
                return Err(CliError::usage(format!(
                    "{}:{}: expected `[image] mask [gt]`",
                    path.display(),
                    n + 1
                )))
            }
        };
        items.push(item);
    }
    if items.is_empty() {
        return Err(CliError::usage(format!("{}: manifest lists no items", path.display())));
    }
    Ok(items)
}

#[derive(Args, Debug)]
pub struct BatchArgs {
    /// Manifest file, one `[image|-] mask [gt]` entry per line
    #[arg(long)]
    pub manifest: PathBuf,
    /// Maximum items processed concurrently
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Also write the report lines to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn batch_item(settings: &Settings, item: &ManifestItem) -> CliResult<lcdvf_core::MetricsReport> {
    let inputs = load_inputs(&item.mask, item.image.as_deref(), item.gt.as_deref())?;
    let seg = run_settings(settings, &inputs.mask, &inputs.gt)?;
    Ok(seg.metrics.expect("ground truth is always supplied"))
}

/// Returns the exit code: 0 when every item succeeded, 1 otherwise.
pub fn batch(args: &BatchArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    if args.jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    let settings = Settings::resolve(&args.solver)?;
    let items = parse_manifest(&args.manifest)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let results: Vec<CliResult<lcdvf_core::MetricsReport>> =
        pool.install(|| items.par_iter().map(|item| batch_item(&settings, item)).collect());

    let mut lines = Vec::with_capacity(items.len() + 1);
    let mut ok = Vec::new();
    for (i, (item, res)) in items.iter().zip(&results).enumerate() {
        let mut v = json!({ "index": i, "mask": item.mask.display().to_string() });
        match res {
            Ok(m) => {
                v["iou"] = json!(m.iou);
                v["dice"] = json!(m.dice);
                v["boundf"] = json!(m.boundf);
                ok.push(*m);
            }
            Err(e) => {
                v["error"] = json!(e.message());
                v["error_kind"] = json!(e.kind());
            }
        }
        lines.push(json_line(&v));
    }
    let mean = |f: fn(&lcdvf_core::MetricsReport) -> f64| -> Value {
        if ok.is_empty() {
            Value::Null
        } else {
            json!(ok.iter().map(f).sum::<f64>() / ok.len() as f64)
        }
    };
    let failed = items.len() - ok.len();
    lines.push(json_line(&json!({
        "aggregate": {
            "items": items.len(),
            "succeeded": ok.len(),
            "failed": failed,
            "miou": mean(|m| m.iou),
            "dice": mean(|m| m.dice),
            "boundf": mean(|m| m.boundf),
        }
    })));
    let text: String = lines.iter().map(|l| format!("{l}\n")).collect();
    if let Some(out) = &args.out {
        write_text(out, &text)?;
    }
    stdout.write_all(text.as_bytes())?;
    Ok(if failed > 0 { 1 } else { 0 })
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Initialization radius as a multiple of the circumscribed radius
    Radius,
    Iterations,
    /// Field spec per value: lcdvf, dvf, energy:<map.pfm>
    Field,
    /// Init spec per value
    Init,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub axis: SweepAxis,
    /// Comma-separated axis values
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<String>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Returns the exit code: 0 when every row succeeded, 1 otherwise.
pub fn sweep(args: &SweepArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let base = Settings::resolve(&args.solver)?;
    let inputs = load_inputs(&args.mask, None, args.gt.as_deref())?;
    let cwd = Path::new(".");

    // every value is validated (and any file loaded) before the first run
    let mut variants = Vec::with_capacity(args.values.len());
    for raw in &args.values {
        let raw = raw.trim();
        let mut s = base.clone();
        match args.axis {
            SweepAxis::Radius => {
                let factor: f64 = raw
                    .parse()
                    .ok()
                    .filter(|f: &f64| f.is_finite() && *f > 0.0)
                    .ok_or_else(|| CliError::usage(format!("invalid radius factor {raw:?}")))?;
                let c = circumscribed_circle(&inputs.mask)?;
                s.init = InitSpec::Circle(Circle::new(c.center, c.radius * factor)?);
            }
            SweepAxis::Iterations => {
                s.snake.iterations = raw
                    .parse()
                    .map_err(|_| CliError::usage(format!("invalid iteration count {raw:?}")))?;
            }
            SweepAxis::Field => {
                s.field = parse_field(raw, cwd)?;
                s.field_name = raw.to_string();
            }
            SweepAxis::Init => s.init = parse_init(raw)?,
        }
        variants.push((raw.to_string(), s));
    }

    let mut csv = String::from("axis_value,iou,dice,boundf,error\n");
    let mut failed = false;
    for (value, s) in &variants {
        match run_settings(s, &inputs.mask, &inputs.gt) {
            Ok(seg) => {
                let m = seg.metrics.expect("ground truth is always supplied");
                csv += &format!("{},{:.6},{:.6},{:.6},\n", csv_field(value), m.iou, m.dice, m.boundf);
            }
            Err(e) => {
                failed = true;
                csv += &format!("{},,,,{}\n", csv_field(value), csv_field(e.message()));
            }
        }
    }
    match &args.out {
        Some(p) => write_text(p, &csv)?,
        None => stdout.write_all(csv.as_bytes())?,
    }
    Ok(if failed { 1 } else { 0 })
}
