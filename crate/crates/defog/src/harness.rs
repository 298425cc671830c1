//! Batch experiments: fog sweeps over ground-truth scenes, no-reference runs
//! over foggy captures, and the CSV/JSON reports they produce.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use defog_core::haze::{self, FogSpec};
use defog_core::metrics::FADE_VERSION;
use defog_core::pde::{evolve, EvolutionState, StepStats};
use defog_core::{MetricReport, PlanarImage, SolverConfig, SolverWarning};

use crate::codec::{load_image, save_image};
use crate::corpus;
use crate::degrade::{degrade, entry_seed};
use crate::error::{DefogError, Result};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "DEFOG_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Reference,
    NoReference,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputRef {
    Builtin(String),
    File(PathBuf),
}

impl InputRef {
    pub fn id(&self) -> String {
        match self {
            InputRef::Builtin(name) => name.clone(),
            InputRef::File(path) => {
                path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
            }
        }
    }

    pub fn load(&self) -> Result<PlanarImage> {
        match self {
            InputRef::Builtin(name) => {
                corpus::scene(name).ok_or_else(|| DefogError::Plan(format!("unknown builtin scene {name:?}")))
            }
            InputRef::File(path) => load_image(path),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// The unprocessed input; only appears as the no-reference baseline row.
    Foggy,
    /// Prior-based guidance image.
    Dcp,
    /// Guidance refined by the fourth-order evolution.
    Proposed,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Foggy => "foggy",
            Method::Dcp => "dcp",
            Method::Proposed => "proposed",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = DefogError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dcp" => Ok(Method::Dcp),
            "proposed" => Ok(Method::Proposed),
            other => Err(DefogError::Plan(format!("unknown method {other:?}; expected dcp or proposed"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub inputs: Vec<InputRef>,
    pub fog_levels: Vec<f64>,
    pub methods: Vec<Method>,
    pub config: SolverConfig,
    pub output_dir: PathBuf,
    pub emit_traces: bool,
    pub record_timing: bool,
    pub fog_airlight: f64,
    /// Sensor noise added after fog synthesis in reference runs.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl ExperimentPlan {
    /// Plan over `inputs` with default settings for everything else.
    pub fn new(inputs: Vec<InputRef>, output_dir: impl Into<PathBuf>) -> Self {
        let defaults = crate::config::PlanSection::default();
        Self {
            inputs,
            fog_levels: defaults.fog_levels,
            methods: vec![Method::Dcp, Method::Proposed],
            config: SolverConfig::default(),
            output_dir: output_dir.into(),
            emit_traces: defaults.emit_traces,
            record_timing: defaults.record_timing,
            fog_airlight: defaults.fog_airlight,
            noise_sigma: defaults.noise_sigma,
            seed: defaults.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(DefogError::Plan("no inputs".into()));
        }
        if self.methods.is_empty() {
            return Err(DefogError::Plan("no methods".into()));
        }
        if self.methods.contains(&Method::Foggy) {
            return Err(DefogError::Plan("\"foggy\" is a baseline row, not a method".into()));
        }
        if let Some(l) = self.fog_levels.iter().find(|l| !(0.0..1.0).contains(*l)) {
            return Err(DefogError::Plan(format!("fog level {l} outside [0, 1)")));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(DefogError::Plan("noise_sigma must be a non-negative number".into()));
        }
        FogSpec::new(0.0, self.fog_airlight)?;
        self.config.validate()?;
        Ok(())
    }
}

/// One restored image and its scores.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub image_id: String,
    pub method: Method,
    /// `None` for no-reference inputs.
    pub fog_level: Option<f64>,
    pub report: MetricReport,
    pub iterations: usize,
    /// Only the evolution can converge; other rows report `false`.
    pub converged: bool,
    pub final_rel_err: Option<f64>,
    pub wall_time_ms: f64,
    pub warnings: Vec<String>,
    pub trace: Vec<StepStats>,
}

impl RunRecord {
    /// File-name stem shared by the restored image and its trace.
    pub fn stem(&self) -> String {
        match self.fog_level {
            Some(l) => format!("{}_{}_f{:02}", self.image_id, self.method, (l * 100.0).round() as u32),
            None => format!("{}_{}", self.image_id, self.method),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub image_id: String,
    pub fog_level: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<Failure>,
}

/// Human-readable summary of solver warnings.
pub fn summarize_warnings(state: &EvolutionState) -> Vec<String> {
    let mut out = Vec::new();
    let cfl: Vec<_> = state
        .warnings
        .iter()
        .filter_map(|w| match *w {
            SolverWarning::CflViolation { iteration, tau, bound, g_max } => Some((iteration, tau, bound, g_max)),
            _ => None,
        })
        .collect();
    if let Some(&(first, tau, bound, g_max)) = cfl.first() {
        out.push(format!(
            "cfl-violation: tau={tau} exceeds h/max g={bound} (max g={g_max}) at {} of {} iterations, first at {first}",
            cfl.len(),
            state.iteration
        ));
    }
    let clamps: Vec<_> = state
        .warnings
        .iter()
        .filter_map(|w| match *w {
            SolverWarning::Clamping { iteration, fraction } => Some((iteration, fraction)),
            _ => None,
        })
        .collect();
    if let Some(&(first, _)) = clamps.first() {
        let worst = clamps.iter().map(|c| c.1).fold(0.0, f64::max);
        out.push(format!(
            "clamping: more than 1% of samples clamped at {} of {} iterations, first at {first}, worst {worst}",
            clamps.len(),
            state.iteration
        ));
    }
    out
}

fn elapsed_ms(start: Instant, record: bool) -> f64 {
    if record {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    }
}

/// Restores `foggy` with every requested method, in plan order.
fn restore_all(
    image_id: &str,
    fog_level: Option<f64>,
    reference: Option<&PlanarImage>,
    foggy: &PlanarImage,
    plan: &ExperimentPlan,
) -> Result<Vec<(RunRecord, PlanarImage)>> {
    let start = Instant::now();
    let (estimate, guidance) = haze::estimate(foggy, &plan.config)?;
    let dcp_ms = elapsed_ms(start, plan.record_timing);
    let state = if plan.methods.contains(&Method::Proposed) {
        Some(evolve(&guidance, &estimate.transmission, &plan.config)?)
    } else {
        None
    };
    let proposed_ms = elapsed_ms(start, plan.record_timing);

    let mut out = Vec::with_capacity(plan.methods.len());
    for &method in &plan.methods {
        let record = |restored: &PlanarImage, iterations, converged, final_rel_err, wall_time_ms, warnings, trace| {
            Ok::<_, DefogError>(RunRecord {
                image_id: image_id.to_string(),
                method,
                fog_level,
                report: MetricReport::evaluate(reference, foggy, restored)?,
                iterations,
                converged,
                final_rel_err,
                wall_time_ms,
                warnings,
                trace,
            })
        };
        match method {
            Method::Dcp => {
                out.push((record(&guidance, 0, false, None, dcp_ms, Vec::new(), Vec::new())?, guidance.clone()));
            }
            Method::Proposed => {
                let state = state.as_ref().expect("evolution ran for proposed");
                let r = record(
                    &state.current,
                    state.iteration,
                    state.converged,
                    state.last_rel_err(),
                    proposed_ms,
                    summarize_warnings(state),
                    state.trace.clone(),
                )?;
                out.push((r, state.current.clone()));
            }
            Method::Foggy => unreachable!("rejected by plan validation"),
        }
    }
    Ok(out)
}

fn persist(dir: &Path, records: &[(RunRecord, PlanarImage)]) -> Result<()> {
    let restored = dir.join("restored");
    fs::create_dir_all(&restored).map_err(|e| DefogError::io(&restored, e))?;
    for (record, img) in records {
        save_image(img, restored.join(format!("{}.png", record.stem())))?;
    }
    Ok(())
}

/// Builds a pool honouring `DEFOG_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| DefogError::Plan(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| DefogError::Plan(e.to_string()))
}

type EntryResult = std::result::Result<Vec<RunRecord>, Failure>;

fn collect(results: Vec<EntryResult>) -> ExperimentOutcome {
    let mut outcome = ExperimentOutcome::default();
    for r in results {
        match r {
            Ok(mut records) => outcome.records.append(&mut records),
            Err(f) => outcome.failures.push(f),
        }
    }
    outcome
}

/// Fog sweep over ground-truth inputs: for every input, fog level and
/// method, degrade, restore, score against the clean image and save the
/// restored PNG under `output_dir/restored`.
pub fn run_reference_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutcome> {
    plan.validate()?;
    let entries: Vec<(&InputRef, f64)> =
        plan.inputs.iter().flat_map(|i| plan.fog_levels.iter().map(move |&l| (i, l))).collect();
    let pool = thread_pool()?;
    let results: Vec<EntryResult> = pool.install(|| {
        entries
            .par_iter()
            .map(|&(input, level)| {
                let id = input.id();
                let run = || -> Result<Vec<RunRecord>> {
                    let clean = input.load()?;
                    let fog = FogSpec::new(level, plan.fog_airlight)?;
                    let foggy = degrade(&clean, fog, plan.noise_sigma, entry_seed(plan.seed, &id, level))?;
                    let restored = restore_all(&id, Some(level), Some(&clean), &foggy, plan)?;
                    persist(&plan.output_dir, &restored)?;
                    Ok(restored.into_iter().map(|(r, _)| r).collect())
                };
                run().map_err(|e| Failure { image_id: id.clone(), fog_level: Some(level), message: e.to_string() })
            })
            .collect()
    });
    Ok(collect(results))
}

/// Restores real foggy inputs and scores them without a reference. Each
/// input also gets a "foggy" baseline row scored against itself.
pub fn run_noreference_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutcome> {
    plan.validate()?;
    let pool = thread_pool()?;
    let results: Vec<EntryResult> = pool.install(|| {
        plan.inputs
            .par_iter()
            .map(|input| {
                let id = input.id();
                let run = || -> Result<Vec<RunRecord>> {
                    let foggy = input.load()?;
                    let baseline = RunRecord {
                        image_id: id.clone(),
                        method: Method::Foggy,
                        fog_level: None,
                        report: MetricReport::evaluate(None, &foggy, &foggy)?,
                        iterations: 0,
                        converged: false,
                        final_rel_err: None,
                        wall_time_ms: 0.0,
                        warnings: Vec::new(),
                        trace: Vec::new(),
                    };
                    let restored = restore_all(&id, None, None, &foggy, plan)?;
                    persist(&plan.output_dir, &restored)?;
                    let mut records = vec![baseline];
                    records.extend(restored.into_iter().map(|(r, _)| r));
                    Ok(records)
                };
                run().map_err(|e| Failure { image_id: id.clone(), fog_level: None, message: e.to_string() })
            })
            .collect()
    });
    Ok(collect(results))
}

/// Column order of `report.csv`.
pub const CSV_COLUMNS: [&str; 12] = [
    "image",
    "method",
    "fog_level",
    "mse",
    "ssim",
    "fade",
    "cri",
    "entropy",
    "ag",
    "iterations",
    "converged",
    "wall_time_ms",
];

#[derive(Serialize)]
struct CsvRow<'a> {
    image: &'a str,
    method: &'a str,
    fog_level: Option<f64>,
    mse: Option<f64>,
    ssim: Option<f64>,
    fade: f64,
    cri: f64,
    entropy: f64,
    ag: f64,
    iterations: usize,
    converged: bool,
    wall_time_ms: f64,
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    image: &'a str,
    method: &'a str,
    fog_level: Option<f64>,
    mse: Option<f64>,
    ssim: Option<f64>,
    fade: f64,
    fade_version: &'static str,
    cri: f64,
    cri_undefined: bool,
    entropy: f64,
    ag: f64,
    iterations: usize,
    converged: bool,
    final_rel_err: Option<f64>,
    wall_time_ms: f64,
    warnings: &'a [String],
}

fn csv_row(r: &RunRecord) -> CsvRow<'_> {
    CsvRow {
        image: &r.image_id,
        method: r.method.as_str(),
        fog_level: r.fog_level,
        mse: r.report.mse,
        ssim: r.report.ssim,
        fade: r.report.fade,
        cri: r.report.cri,
        entropy: r.report.entropy,
        ag: r.report.ag,
        iterations: r.iterations,
        converged: r.converged,
        wall_time_ms: r.wall_time_ms,
    }
}

fn json_record(r: &RunRecord) -> JsonRecord<'_> {
    JsonRecord {
        image: &r.image_id,
        method: r.method.as_str(),
        fog_level: r.fog_level,
        mse: r.report.mse,
        ssim: r.report.ssim,
        fade: r.report.fade,
        fade_version: FADE_VERSION,
        cri: r.report.cri,
        cri_undefined: r.report.cri_undefined,
        entropy: r.report.entropy,
        ag: r.report.ag,
        iterations: r.iterations,
        converged: r.converged,
        final_rel_err: r.final_rel_err,
        wall_time_ms: r.wall_time_ms,
        warnings: &r.warnings,
    }
}

/// Flat JSON object for one metric report.
pub fn metric_report_json(report: &MetricReport) -> serde_json::Value {
    serde_json::json!({
        "mse": report.mse,
        "ssim": report.ssim,
        "fade": report.fade,
        "cri": report.cri,
        "entropy": report.entropy,
        "ag": report.ag,
    })
}

/// Per-iteration trace as CSV text: `iter,rel_err,g_max,clamped_fraction`.
pub fn trace_csv(trace: &[StepStats]) -> String {
    let mut s = String::from("iter,rel_err,g_max,clamped_fraction\n");
    for t in trace {
        s.push_str(&format!("{},{},{},{}\n", t.iteration, t.rel_err, t.g_max, t.clamped_fraction));
    }
    s
}

pub fn write_trace(path: &Path, trace: &[StepStats]) -> Result<()> {
    fs::write(path, trace_csv(trace)).map_err(|e| DefogError::io(path, e))
}

/// Writes `report.csv`, `report.json` and, with `emit_traces`, one trace
/// per evolved record under `traces/`. Output bytes depend only on the records.
pub fn emit_report(records: &[RunRecord], dir: &Path, emit_traces: bool) -> Result<()> {
    if records.is_empty() {
        return Err(DefogError::Plan("no records to report".into()));
    }
    fs::create_dir_all(dir).map_err(|e| DefogError::io(dir, e))?;

    let csv_path = dir.join("report.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    for r in records {
        w.serialize(csv_row(r))?;
    }
    w.flush().map_err(|e| DefogError::io(&csv_path, e))?;

    let json_path = dir.join("report.json");
    let rows: Vec<JsonRecord<'_>> = records.iter().map(json_record).collect();
    let mut text = serde_json::to_string_pretty(&rows)?;
    text.push('\n');
    fs::write(&json_path, text).map_err(|e| DefogError::io(&json_path, e))?;

    if emit_traces {
        let traces = dir.join("traces");
        fs::create_dir_all(&traces).map_err(|e| DefogError::io(&traces, e))?;
        for r in records.iter().filter(|r| r.method == Method::Proposed) {
            write_trace(&traces.join(format!("{}.csv", r.stem())), &r.trace)?;
        }
    }
    Ok(())
}
