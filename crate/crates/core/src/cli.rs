//! The `spine-rectify` command line: batch synthesis, inference, evaluation,
//! rectification dumps and signal plots over a directory-per-case layout.
//!
//! ```text
//! data/case_000/stack/{stack.json, channel_01.vgf, ..}
//! data/case_000/truth.json
//! data/case_000/spec.json
//! preds/case_000.json
//! preds/status/case_000.json
//! ```

use crate::config::RunConfig;
use crate::heatmap::{read_annotations, write_annotations, AnnotationRecord, VertebraAnnotation};
use crate::labels;
use crate::metrics::{identify_matches, report, VertebraPrediction};
use crate::optimize::{init_state, Mode, Problem};
use crate::pipeline::{Inference, Pipeline};
use crate::plot::{render_svg, PlotSpec};
use crate::rectify::{rectified_signals, rectify_grid, SignalSet};
use crate::synth::{generate, PhantomSpec, RandomRun};
use crate::volume::{read_stack, write_stack, write_volume, Vec3};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CASE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "spine-rectify", version, about = "Spine rectification and constrained vertebra labeling")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    /// Worker threads for per-case parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate phantom cases.
    Synth(SynthArgs),
    /// Label every case of a dataset.
    Infer(InferArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Dump centerline, rectified volumes and 1-D signals.
    Rectify(RectifyArgs),
    /// Draw a signals CSV as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub cases: usize,
    /// PhantomSpec as JSON; flags below override its fields.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// First label of the run, e.g. T1.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Draw run, curvature and phase per case.
    #[arg(long)]
    pub random: bool,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub label_shift: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long)]
    pub background: Option<f64>,
    /// Keep `lo,hi` fractions of the z extent.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub crop: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// A case directory or a directory of cases.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predictions (`<case>.json`) or a dataset to self-evaluate.
    #[arg(long)]
    pub pred: PathBuf,
    /// Dataset with `<case>/truth.json`, or flat `<case>.json` files.
    #[arg(long)]
    pub truth: PathBuf,
    /// Where to write report.json and report.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RectifyArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write centerline.csv.
    #[arg(long)]
    pub dump_centerline: bool,
    /// Skip the rectified volumes, write signals only.
    #[arg(long)]
    pub signals_only: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub signals: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Channels to draw, e.g. `T1,T2`; default all non-zero.
    #[arg(long, value_delimiter = ',')]
    pub channels: Vec<String>,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Case(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Case(_) => EXIT_CASE,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Predictions file of one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionFile {
    pub case: String,
    pub mode: String,
    pub energy: Option<f64>,
    pub anatomically_plausible: bool,
    pub vertebrae: Vec<PredictedVertebra>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedVertebra {
    pub label: usize,
    pub name: String,
    pub x_mm: f64,
    pub y_mm: f64,
    pub z_mm: f64,
    pub activation: f64,
}

impl PredictionFile {
    pub fn from_inference(case: &str, inf: &Inference) -> Self {
        PredictionFile {
            case: case.to_string(),
            mode: inf.mode.as_str().to_string(),
            energy: inf.energy,
            anatomically_plausible: inf.anatomically_plausible,
            vertebrae: inf
                .predictions
                .iter()
                .map(|p| PredictedVertebra {
                    label: p.label,
                    name: labels::label_name(p.label).map_or_else(|| format!("V{}", p.label), str::to_string),
                    x_mm: p.center.x,
                    y_mm: p.center.y,
                    z_mm: p.center.z,
                    activation: p.activation,
                })
                .collect(),
        }
    }

    pub fn predictions(&self) -> Vec<VertebraPrediction> {
        self.vertebrae
            .iter()
            .map(|v| VertebraPrediction {
                label: v.label,
                center: Vec3::new(v.x_mm, v.y_mm, v.z_mm),
                activation: v.activation,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
struct CaseStatus<'a> {
    case: &'a str,
    status: &'a str,
    message: Option<String>,
}

/// Rounds `x` to 6 significant digits.
pub fn round6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round6(x))) {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 6 significant digits.
pub fn to_json6<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("output serializes");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::Case(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Case(format!("{}: {e}", path.display())))
}

/// Parses arguments, runs, and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(usage)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = cli.mode {
        cfg.mode = mode;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    if cfg.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(usage)?;
    pool.install(|| match &cli.command {
        Command::Synth(a) => cmd_synth(&cfg, a),
        Command::Infer(a) => cmd_infer(&cfg, a),
        Command::Eval(a) => cmd_eval(a),
        Command::Rectify(a) => cmd_rectify(&cfg, a),
        Command::Plot(a) => cmd_plot(&cfg, a),
    })
}

fn synth_spec(a: &SynthArgs) -> Result<PhantomSpec, CliError> {
    let mut spec = match &a.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => PhantomSpec::default(),
    };
    if let Some(name) = &a.start {
        spec.start_label = labels::parse_label(name).ok_or_else(|| usage(format!("unknown label '{name}'")))?;
    }
    if let Some(count) = a.count {
        spec.count = count;
    }
    if spec.count == 0 {
        return Err(usage("count must be at least 1"));
    }
    if let Some(v) = a.amplitude {
        spec.curve.amplitude_mm = v;
    }
    if let Some(v) = a.label_shift {
        spec.noise.label_shift_prob = v;
    }
    if let Some(v) = a.dropout {
        spec.noise.dropout_prob = v;
    }
    if let Some(v) = a.jitter {
        spec.noise.jitter_sigma_mm = v;
    }
    if let Some(v) = a.background {
        spec.noise.background_noise = v;
    }
    if let Some(c) = &a.crop {
        spec.noise.crop = Some([c[0], c[1]]);
    }
    spec.validate().map_err(usage)?;
    Ok(spec)
}

pub fn case_name(i: usize) -> String {
    format!("case_{i:03}")
}

fn cmd_synth(cfg: &RunConfig, a: &SynthArgs) -> Result<(), CliError> {
    if a.cases == 0 {
        return Err(usage("--cases must be at least 1"));
    }
    let base = synth_spec(a)?;
    let opts = RandomRun {
        max_amplitude_mm: a.amplitude.unwrap_or(RandomRun::default().max_amplitude_mm),
        ..RandomRun::default()
    };
    let results: Vec<Result<(), CliError>> = (0..a.cases)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i as u64);
            let spec = if a.random {
                base.random(seed, &opts)
            } else {
                PhantomSpec { seed, ..base.clone() }
            };
            let phantom = generate(&spec).map_err(|e| CliError::Case(format!("{}: {e}", case_name(i))))?;
            let dir = a.out.join(case_name(i));
            write_stack(&phantom.stack, dir.join("stack")).map_err(|e| CliError::Case(e.to_string()))?;
            write_annotations(&phantom.truth, dir.join("truth.json")).map_err(|e| CliError::Case(e.to_string()))?;
            write_text(&dir.join("spec.json"), &to_json6(&phantom.spec))
        })
        .collect();
    first_error(results)?;
    println!("wrote {} case(s) to {}", a.cases, a.out.display());
    Ok(())
}

fn first_error(results: Vec<Result<(), CliError>>) -> Result<(), CliError> {
    results.into_iter().find(|r| r.is_err()).unwrap_or(Ok(()))
}

/// Cases under `dir`: the directory itself if it holds a stack, else its
/// subdirectories that do, sorted by name.
pub fn discover_cases(dir: &Path) -> Result<Vec<(String, PathBuf)>, CliError> {
    let name_of = |p: &Path| p.file_name().map_or_else(|| "case".to_string(), |n| n.to_string_lossy().into_owned());
    if dir.join("stack").join("stack.json").is_file() || dir.join("stack.json").is_file() {
        return Ok(vec![(name_of(dir), dir.to_path_buf())]);
    }
    let entries = fs::read_dir(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let mut cases: Vec<(String, PathBuf)> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("stack").join("stack.json").is_file())
        .map(|p| (name_of(&p), p))
        .collect();
    cases.sort();
    if cases.is_empty() {
        return Err(usage(format!("no cases found under {}", dir.display())));
    }
    Ok(cases)
}

fn stack_dir(case_dir: &Path) -> PathBuf {
    let nested = case_dir.join("stack");
    if nested.join("stack.json").is_file() {
        nested
    } else {
        case_dir.to_path_buf()
    }
}

fn cmd_infer(cfg: &RunConfig, a: &InferArgs) -> Result<(), CliError> {
    let cases = discover_cases(&a.data)?;
    let pipeline = Pipeline::new(cfg.clone());
    let results: Vec<Result<(), CliError>> = cases
        .par_iter()
        .map(|(name, dir)| {
            let outcome = read_stack(stack_dir(dir))
                .map_err(|e| e.to_string())
                .and_then(|stack| pipeline.run(&stack, cfg.mode).map_err(|e| (e.is_no_vertebra(), e.to_string())).map_err(|(nv, m)| {
                    if nv {
                        format!("no vertebra detected: {m}")
                    } else {
                        m
                    }
                }));
            let status_path = a.out.join("status").join(format!("{name}.json"));
            match outcome {
                Ok(inf) => {
                    let file = PredictionFile::from_inference(name, &inf);
                    write_text(&a.out.join(format!("{name}.json")), &to_json6(&file))?;
                    let empty = inf.predictions.is_empty();
                    let status = CaseStatus {
                        case: name,
                        status: if empty { "no_vertebra" } else { "ok" },
                        message: None,
                    };
                    write_text(&status_path, &to_json6(&status))?;
                    if empty {
                        return Err(CliError::Case(format!("{name}: no vertebra detected")));
                    }
                    Ok(())
                }
                Err(message) => {
                    let status = CaseStatus {
                        case: name,
                        status: if message.starts_with("no vertebra") { "no_vertebra" } else { "failed" },
                        message: Some(message.clone()),
                    };
                    write_text(&status_path, &to_json6(&status))?;
                    Err(CliError::Case(format!("{name}: {message}")))
                }
            }
        })
        .collect();
    let failures: Vec<String> = results.iter().filter_map(|r| r.as_ref().err().map(|e| e.to_string())).collect();
    println!(
        "{}: {} of {} case(s) labeled, predictions in {}",
        cfg.mode.long_name(),
        cases.len() - failures.len(),
        cases.len(),
        a.out.display()
    );
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Case(failures.join("; ")))
    }
}

/// Labeled points from a predictions file or an annotation list.
pub fn read_points(path: &Path) -> Result<Vec<VertebraPrediction>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if value.is_array() {
        let records: Vec<AnnotationRecord> = serde_json::from_value(value).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        Ok(records
            .iter()
            .map(|r| VertebraPrediction {
                label: r.label,
                center: Vec3::new(r.x_mm, r.y_mm, r.z_mm),
                activation: 1.0,
            })
            .collect())
    } else {
        let file: PredictionFile = serde_json::from_value(value).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        Ok(file.predictions())
    }
}

/// `case -> file` for either layout: `<dir>/<case>/truth.json` or `<dir>/<case>.json`.
fn case_files(dir: &Path) -> Result<Vec<(String, PathBuf)>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for path in entries.filter_map(|e| e.ok().map(|e| e.path())) {
        if path.is_dir() && path.join("truth.json").is_file() {
            out.push((path.file_name().unwrap().to_string_lossy().into_owned(), path.join("truth.json")));
        } else if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
            if stem != "report" {
                out.push((stem, path));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn cmd_eval(a: &EvalArgs) -> Result<(), CliError> {
    let preds = case_files(&a.pred)?;
    let truths = case_files(&a.truth)?;
    let pred_names: Vec<&String> = preds.iter().map(|p| &p.0).collect();
    let truth_names: Vec<&String> = truths.iter().map(|t| &t.0).collect();
    let missing_pred: Vec<&str> = truth_names.iter().filter(|n| !pred_names.contains(n)).map(|s| s.as_str()).collect();
    let missing_truth: Vec<&str> = pred_names.iter().filter(|n| !truth_names.contains(n)).map(|s| s.as_str()).collect();
    if !missing_pred.is_empty() || !missing_truth.is_empty() || preds.is_empty() {
        let mut msg = String::from("case sets differ");
        if !missing_pred.is_empty() {
            msg += &format!("; missing predictions: {}", missing_pred.join(", "));
        }
        if !missing_truth.is_empty() {
            msg += &format!("; missing truth: {}", missing_truth.join(", "));
        }
        if preds.is_empty() {
            msg += "; no cases";
        }
        return Err(usage(msg));
    }
    let mut outcomes = Vec::new();
    let mut mode = None;
    for ((name, pred_path), (_, truth_path)) in preds.iter().zip(&truths) {
        let pred = read_points(pred_path)?;
        let truth: Vec<VertebraAnnotation> = read_annotations(truth_path).map_err(usage)?;
        outcomes.extend(identify_matches(&pred, &truth).map_err(|e| usage(format!("{name}: {e}")))?);
        if mode.is_none() {
            mode = fs::read_to_string(pred_path)
                .ok()
                .and_then(|t| serde_json::from_str::<PredictionFile>(&t).ok())
                .map(|f| f.mode);
        }
    }
    let rep = report(&outcomes);
    let title = match mode.as_deref().and_then(|m| m.parse::<Mode>().ok()) {
        Some(m) => format!("{} ({} cases)", m.long_name(), preds.len()),
        None => format!("{} cases", preds.len()),
    };
    let table = rep.to_table(&title);
    print!("{table}");
    if let Some(out) = &a.out {
        write_text(&out.join("report.json"), &to_json6(&rep))?;
        write_text(&out.join("report.txt"), &table)?;
    }
    Ok(())
}

fn cmd_rectify(cfg: &RunConfig, a: &RectifyArgs) -> Result<(), CliError> {
    let cases = discover_cases(&a.data)?;
    let single = cases.len() == 1;
    let pipeline = Pipeline::new(cfg.clone());
    let results: Vec<Result<(), CliError>> = cases
        .par_iter()
        .map(|(name, dir)| {
            let fail = |e: &dyn std::fmt::Display| CliError::Case(format!("{name}: {e}"));
            let out = if single { a.out.clone() } else { a.out.join(name) };
            let stack = read_stack(stack_dir(dir)).map_err(|e| fail(&e))?;
            let prepared = pipeline.prepare(&stack).map_err(|e| fail(&e))?;
            write_text(&out.join("signals.csv"), &prepared.signals.to_csv())?;
            if a.dump_centerline {
                write_text(&out.join("centerline.csv"), &prepared.centerline.to_csv())?;
            }
            if !a.signals_only {
                let rcfg = cfg.rectify();
                fs::create_dir_all(out.join("rectified")).map_err(|e| fail(&e))?;
                write_volume(&rectify_grid(&stack.combine(), &prepared.centerline, &rcfg), out.join("rectified").join("combined.vgf"))
                    .map_err(|e| fail(&e))?;
                for (i, ch) in stack.channels().iter().enumerate() {
                    let path = out.join("rectified").join(format!("channel_{:02}.vgf", i + 1));
                    write_volume(&rectify_grid(ch, &prepared.centerline, &rcfg), path).map_err(|e| fail(&e))?;
                }
            }
            Ok(())
        })
        .collect();
    first_error(results)?;
    println!("rectified {} case(s) into {}", cases.len(), a.out.display());
    Ok(())
}

/// Indices (in CSV order) of the initial labeling's peaks.
pub fn signal_marks(cfg: &RunConfig, signals: &SignalSet) -> Vec<usize> {
    let oriented = if cfg.cranial_at_high_z { signals.reversed() } else { signals.clone() };
    let energy = cfg.energy(signals.v_max());
    let Ok(problem) = Problem::new(&oriented.channels, &energy) else {
        return Vec::new();
    };
    let Ok(state) = init_state(&problem, &oriented.q_hat, &cfg.solve().peaks) else {
        return Vec::new();
    };
    let n = signals.len();
    let mut marks: Vec<usize> = state
        .k
        .iter()
        .map(|&k| {
            let k = k.round() as usize;
            if cfg.cranial_at_high_z {
                n - 1 - k
            } else {
                k
            }
        })
        .collect();
    marks.sort_unstable();
    marks
}

fn cmd_plot(cfg: &RunConfig, a: &PlotArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.signals).map_err(|e| usage(format!("{}: {e}", a.signals.display())))?;
    let signals = SignalSet::from_csv(&text).map_err(|e| usage(format!("{}: {e}", a.signals.display())))?;
    let channels = a
        .channels
        .iter()
        .map(|n| labels::parse_label(n).ok_or_else(|| usage(format!("unknown label '{n}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = PlotSpec {
        title: a.title.clone().unwrap_or_else(|| a.signals.display().to_string()),
        channels,
        marks: signal_marks(cfg, &signals),
    };
    write_text(&a.out, &render_svg(&signals, &spec))?;
    println!("{} peak(s) marked in {}", spec.marks.len(), a.out.display());
    Ok(())
}

/// 1-D signals of a stack without touching the disk, as `rectify` writes them.
pub fn signals_of(cfg: &RunConfig, stack: &crate::volume::ActivationStack) -> Result<SignalSet, CliError> {
    let g_hat = stack.combine();
    let c = crate::centerline::extract_centerline(&g_hat, &cfg.centerline()).map_err(|e| CliError::Case(e.to_string()))?;
    Ok(rectified_signals(stack, &g_hat, &c, &cfg.rectify()))
}
