//! Plan files: TOML-style `key = value` text with a `[plan]` section and one
//! section per solver parameter group. Every key is optional; an empty file
//! runs the bundled corpus with the default solver settings.
//!
//! ```toml
//! [plan]
//! inputs = ["builtin:harbor", "photos/pier.png"]
//! fog_levels = [0.1, 0.2, 0.3]
//! methods = ["dcp", "proposed"]
//! output_dir = "out"
//!
//! [haze]
//! omega = 0.95
//!
//! [pde]
//! tau = 0.05
//! ```

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use defog_core::haze::DEFAULT_FOG_AIRLIGHT;
use defog_core::SolverConfig;

use crate::corpus::{BUILTIN_PREFIX, CLEAN_SCENES, FOGGY_SCENES};
use crate::degrade::DEFAULT_NOISE_SIGMA;
use crate::error::{DefogError, Result};
use crate::harness::{ExperimentKind, ExperimentPlan, InputRef, Method};

/// Overrides for the haze-estimation parameters.
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct HazeParams {
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long = "patch_radius", alias = "patch-radius")]
    pub patch_radius: Option<usize>,
    #[arg(long = "airlight_fraction", alias = "airlight-fraction")]
    pub airlight_fraction: Option<f64>,
    #[arg(long = "refine_sigma", alias = "refine-sigma")]
    pub refine_sigma: Option<f64>,
    #[arg(long = "t_floor", alias = "t-floor")]
    pub t_floor: Option<f64>,
}

/// Overrides for the evolution parameters.
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct PdeParams {
    #[arg(long = "lambda_damp", alias = "lambda-damp")]
    pub lambda_damp: Option<f64>,
    #[arg(long = "lambda_fid", alias = "lambda-fid")]
    pub lambda_fid: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub toll: Option<f64>,
    #[arg(long = "max_iters", alias = "max-iters")]
    pub max_iters: Option<usize>,
    #[arg(long = "eps_rel", alias = "eps-rel")]
    pub eps_rel: Option<f64>,
}

macro_rules! apply_fields {
    ($src:expr, $dst:expr, $($field:ident),+) => {
        $( if let Some(v) = $src.$field { $dst.$field = v; } )+
    };
}

impl HazeParams {
    pub fn apply(&self, cfg: &mut SolverConfig) {
        apply_fields!(self, cfg, omega, patch_radius, airlight_fraction, refine_sigma, t_floor);
    }
}

impl PdeParams {
    pub fn apply(&self, cfg: &mut SolverConfig) {
        apply_fields!(self, cfg, lambda_damp, lambda_fid, k, alpha, xi, v, tau, toll, max_iters, eps_rel);
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSection {
    pub inputs: Vec<String>,
    pub fog_levels: Vec<f64>,
    pub methods: Vec<String>,
    pub output_dir: PathBuf,
    pub emit_traces: bool,
    /// Write measured wall times into the report; off keeps reports byte-stable.
    pub record_timing: bool,
    pub fog_airlight: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for PlanSection {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            fog_levels: vec![0.1, 0.2, 0.3],
            methods: vec!["dcp".into(), "proposed".into()],
            output_dir: PathBuf::from("defog-out"),
            emit_traces: false,
            record_timing: false,
            fog_airlight: DEFAULT_FOG_AIRLIGHT,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanFile {
    pub plan: PlanSection,
    pub haze: HazeParams,
    pub pde: PdeParams,
}

impl PlanFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| DefogError::Plan(e.to_string()))
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        self.haze.apply(&mut cfg);
        self.pde.apply(&mut cfg);
        cfg
    }

    /// Builds a validated plan. Relative paths resolve against `base_dir`;
    /// an empty input list selects the bundled scenes for `kind`.
    pub fn into_plan(self, kind: ExperimentKind, base_dir: &Path) -> Result<ExperimentPlan> {
        let config = self.solver_config();
        let p = self.plan;
        let inputs = if p.inputs.is_empty() {
            let names: &[&str] = match kind {
                ExperimentKind::Reference => &CLEAN_SCENES,
                ExperimentKind::NoReference => &FOGGY_SCENES,
            };
            names.iter().map(|n| InputRef::Builtin((*n).to_string())).collect()
        } else {
            p.inputs
                .iter()
                .map(|s| match s.strip_prefix(BUILTIN_PREFIX) {
                    Some(name) => InputRef::Builtin(name.to_string()),
                    None => InputRef::File(base_dir.join(s)),
                })
                .collect()
        };
        let methods = p.methods.iter().map(|m| m.parse::<Method>()).collect::<Result<Vec<_>>>()?;
        let plan = ExperimentPlan {
            inputs,
            fog_levels: p.fog_levels,
            methods,
            config,
            output_dir: base_dir.join(p.output_dir),
            emit_traces: p.emit_traces,
            record_timing: p.record_timing,
            fog_airlight: p.fog_airlight,
            noise_sigma: p.noise_sigma,
            seed: p.seed,
        };
        plan.validate()?;
        Ok(plan)
    }
}

/// Reads and validates a plan file.
pub fn load_plan(path: impl AsRef<Path>, kind: ExperimentKind) -> Result<ExperimentPlan> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DefogError::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    PlanFile::parse(&text)?.into_plan(kind, base)
}

/// Solver settings from an optional plan-style file, without the plan section checks.
pub fn load_solver_config(path: impl AsRef<Path>) -> Result<SolverConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DefogError::io(path, e))?;
    Ok(PlanFile::parse(&text)?.solver_config())
}
