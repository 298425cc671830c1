use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use defog::config::{load_plan, load_solver_config, HazeParams, PdeParams};
use defog::corpus;
use defog::degrade::add_sensor_noise;
use defog::harness::{summarize_warnings, write_trace};
use defog::{
    emit_report, load_image, run_noreference_experiment, run_reference_experiment, save_image, DefogError,
    ExperimentKind, ExperimentOutcome,
};
use defog_core::haze::{self, synthesize_depth_fog, synthesize_fog, FogSpec};
use defog_core::pde::evolve;
use defog_core::{MetricReport, SolverConfig};

#[derive(Parser)]
#[command(name = "defog", version, about = "Single-image defogging with a fourth-order telegraph diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SingleMethod {
    Dcp,
    Proposed,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Restore one foggy image.
    Single {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value = "proposed")]
        method: SingleMethod,
        /// Plan-style file supplying [haze] and [pde] settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the per-iteration convergence trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        haze: HazeParams,
        #[command(flatten)]
        pde: PdeParams,
    },
    /// Fog sweep over ground-truth images, scored with MSE and SSIM.
    BenchRef { config: PathBuf },
    /// No-reference scoring of foggy captures.
    BenchNr { config: PathBuf },
    /// Add synthetic fog to a clean image.
    Synth {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        level: f64,
        #[arg(long, default_value_t = haze::DEFAULT_FOG_AIRLIGHT)]
        airlight: f64,
        /// Denser fog towards the top of the frame instead of uniform fog.
        #[arg(long)]
        depth_ramp: bool,
        /// Gaussian sensor noise added after the fog.
        #[arg(long, default_value_t = 0.0)]
        noise_sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the bundled scenes as PNG files.
    Corpus { dir: PathBuf },
}

enum Failure {
    Partial,
    InvalidPlan(DefogError),
    Other(DefogError),
}

impl From<DefogError> for Failure {
    fn from(e: DefogError) -> Self {
        match e {
            DefogError::Plan(_) | DefogError::Core(defog_core::Error::Parameter(_)) => Failure::InvalidPlan(e),
            other => Failure::Other(other),
        }
    }
}

fn single(
    input: &Path,
    output: &Path,
    method: SingleMethod,
    cfg: SolverConfig,
    trace: Option<&Path>,
) -> Result<(), Failure> {
    cfg.validate().map_err(DefogError::from)?;
    let foggy = load_image(input)?;
    let (estimate, guidance) = haze::estimate(&foggy, &cfg).map_err(DefogError::from)?;
    let restored = match method {
        SingleMethod::Dcp => guidance,
        SingleMethod::Proposed => {
            let state = evolve(&guidance, &estimate.transmission, &cfg).map_err(DefogError::from)?;
            println!(
                "iterations={} converged={} rel_err={}",
                state.iteration,
                state.converged,
                state.last_rel_err().unwrap_or(0.0)
            );
            for w in summarize_warnings(&state) {
                eprintln!("warning: {w}");
            }
            if let Some(path) = trace {
                write_trace(path, &state.trace)?;
            }
            state.current
        }
    };
    save_image(&restored, output)?;
    let report = MetricReport::evaluate(None, &foggy, &restored).map_err(DefogError::from)?;
    println!("airlight={} {}", estimate.airlight, defog::harness::metric_report_json(&report));
    Ok(())
}

fn bench(config: &Path, kind: ExperimentKind) -> Result<(), Failure> {
    let plan = load_plan(config, kind)?;
    let ExperimentOutcome { records, failures } = match kind {
        ExperimentKind::Reference => run_reference_experiment(&plan)?,
        ExperimentKind::NoReference => run_noreference_experiment(&plan)?,
    };
    for f in &failures {
        eprintln!("failed: {} (fog level {:?}): {}", f.image_id, f.fog_level, f.message);
    }
    if !records.is_empty() {
        emit_report(&records, &plan.output_dir, plan.emit_traces)?;
    }
    println!("{} records written to {}", records.len(), plan.output_dir.display());
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Partial)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Single { input, output, method, config, trace, haze, pde } => {
            let mut cfg = match config {
                Some(path) => load_solver_config(path)?,
                None => SolverConfig::default(),
            };
            haze.apply(&mut cfg);
            pde.apply(&mut cfg);
            single(&input, &output, method, cfg, trace.as_deref())
        }
        Command::BenchRef { config } => bench(&config, ExperimentKind::Reference),
        Command::BenchNr { config } => bench(&config, ExperimentKind::NoReference),
        Command::Synth { input, output, level, airlight, depth_ramp, noise_sigma, seed } => {
            let spec = FogSpec::new(level, airlight).map_err(DefogError::from)?;
            let clean = load_image(&input)?;
            let foggy = if depth_ramp { synthesize_depth_fog(&clean, spec) } else { synthesize_fog(&clean, spec) };
            save_image(&add_sensor_noise(&foggy, noise_sigma, seed), &output)?;
            Ok(())
        }
        Command::Corpus { dir } => {
            std::fs::create_dir_all(&dir).map_err(|e| DefogError::Io { path: dir.clone(), source: e })?;
            for name in corpus::CLEAN_SCENES.iter().chain(&corpus::FOGGY_SCENES) {
                let img = corpus::scene(name).expect("listed scene exists");
                save_image(&img, dir.join(format!("{name}.png")))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Partial) => ExitCode::from(1),
        Err(Failure::InvalidPlan(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
