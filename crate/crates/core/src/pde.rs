//! Damped fourth-order (telegraph-type) evolution of the guidance image.
//!
//! The continuous model is
//!
//! ```text
//! u_tt + λ u_t = −Δ(v·g·Δu) − λ_f T² (u − J)
//! ```
//!
//! discretized with central differences in space and time:
//!
//! ```text
//! u⁺ = [(2 + λτ) u − u⁻ − τ² (Δ(v·g·Δu) + λ_f T² (u − J))] / (1 + λτ)
//! ```
//!
//! `g` is re-evaluated every iteration from a Gaussian-smoothed copy of the
//! current iterate. Iterates are clamped to `[0, 1]` and the evolution stops
//! once the relative ℓ₂ change between iterates drops below `toll`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::haze::{self, check_transmission_shape, HazeEstimate};
use crate::image::{convolve, gaussian_kernel, laplacian, laplacian_plane, PlanarImage};

/// Grid spacing used in the CFL bound.
pub const GRID_SPACING: f64 = 1.0;

/// Fraction of clamped samples above which a step is reported.
pub const CLAMP_REPORT_FRACTION: f64 = 0.01;

/// Every prior and PDE parameter. `Default` reproduces the reference settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Haze retention factor in the rough transmission.
    pub omega: f64,
    /// Dark channel patch radius; the window is `(2r+1)²`.
    pub patch_radius: usize,
    /// Fraction of brightest dark-channel pixels used for the airlight.
    pub airlight_fraction: f64,
    /// σ of the Gaussian transmission refinement.
    pub refine_sigma: f64,
    /// Lower bound on transmission during radiance recovery.
    pub t_floor: f64,
    /// Damping λ on `u_t`.
    pub lambda_damp: f64,
    /// Fidelity weight λ_f.
    pub lambda_fid: f64,
    /// Edge threshold on `|Δu_ξ|`.
    pub k: f64,
    pub alpha: f64,
    /// σ of the pre-smoothing applied before evaluating `g`.
    pub xi: f64,
    /// Scale on the fourth-order flux.
    pub v: f64,
    /// Time step τ.
    pub tau: f64,
    pub toll: f64,
    pub max_iters: usize,
    /// ε in the relative-error denominator.
    pub eps_rel: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            omega: 0.95,
            patch_radius: 7,
            airlight_fraction: 0.001,
            refine_sigma: 8.0,
            t_floor: 0.1,
            lambda_damp: 1.5,
            lambda_fid: 1.5,
            k: 2.0,
            alpha: 2.0,
            xi: 2.0,
            v: 1.0,
            tau: 0.05,
            toll: 1e-4,
            max_iters: 500,
            eps_rel: 1e-12,
        }
    }
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::Parameter("omega must lie in (0, 1)"));
        }
        if self.patch_radius == 0 {
            return Err(Error::Parameter("patch_radius must be positive"));
        }
        if !(self.airlight_fraction > 0.0 && self.airlight_fraction <= 1.0) {
            return Err(Error::Parameter("airlight_fraction must lie in (0, 1]"));
        }
        if !positive(self.refine_sigma) || !positive(self.xi) {
            return Err(Error::Parameter("smoothing sigmas must be positive"));
        }
        if !(self.t_floor > 0.0 && self.t_floor < 1.0) {
            return Err(Error::Parameter("t_floor must lie in (0, 1)"));
        }
        if !(self.lambda_damp >= 0.0 && self.lambda_fid >= 0.0) {
            return Err(Error::Parameter("lambda_damp and lambda_fid must be non-negative"));
        }
        if !positive(self.k) || !positive(self.alpha) || !positive(self.v) {
            return Err(Error::Parameter("k, alpha and v must be positive"));
        }
        if !positive(self.tau) || !positive(self.toll) || !positive(self.eps_rel) {
            return Err(Error::Parameter("tau, toll and eps_rel must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    /// 1-based iteration that produced these numbers.
    pub iteration: usize,
    pub rel_err: f64,
    pub g_max: f64,
    /// Fraction of samples the `[0, 1]` clamp touched.
    pub clamped_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverWarning {
    /// τ exceeded `h / max g` at this iteration.
    CflViolation { iteration: usize, tau: f64, bound: f64, g_max: f64 },
    /// More than 1% of samples were clamped at this iteration.
    Clamping { iteration: usize, fraction: f64 },
}

/// Two consecutive iterates plus the convergence record.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub current: PlanarImage,
    pub previous: PlanarImage,
    pub iteration: usize,
    pub rel_err_history: Vec<f64>,
    pub trace: Vec<StepStats>,
    pub warnings: Vec<SolverWarning>,
    pub converged: bool,
}

impl EvolutionState {
    /// Zero initial velocity: `u⁻¹ = u⁰`.
    pub fn at_rest(initial: PlanarImage) -> Self {
        Self {
            previous: initial.clone(),
            current: initial,
            iteration: 0,
            rel_err_history: Vec::new(),
            trace: Vec::new(),
            warnings: Vec::new(),
            converged: false,
        }
    }

    pub fn last_rel_err(&self) -> Option<f64> {
        self.rel_err_history.last().copied()
    }

    pub fn cfl_violations(&self) -> usize {
        self.warnings.iter().filter(|w| matches!(w, SolverWarning::CflViolation { .. })).count()
    }
}

/// Edge-adaptive coefficient
/// `g = 2|u_ξ|^α / (M^α + |u_ξ|^α) · 1 / (1 + (|Δu_ξ|/k)²)`,
/// where `M` is the largest `|u_ξ|` over all pixels and channels.
pub fn diffusion_coefficient(
    u_smooth: &PlanarImage,
    lap_smooth: &PlanarImage,
    k: f64,
    alpha: f64,
) -> Result<PlanarImage> {
    if !positive(k) || !positive(alpha) {
        return Err(Error::Parameter("k and alpha must be positive"));
    }
    if !u_smooth.same_shape(lap_smooth) {
        return Err(Error::Dimension("smoothed image and its Laplacian differ in shape"));
    }
    let mut g = u_smooth.zeros_like();
    let m = u_smooth.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return Ok(g);
    }
    let m_alpha = libm::pow(m, alpha);
    for ((out, &u), &lap) in g.data_mut().iter_mut().zip(u_smooth.data()).zip(lap_smooth.data()) {
        let ua = libm::pow(u.abs(), alpha);
        let edge = lap.abs() / k;
        *out = 2.0 * ua / (m_alpha + ua) / (1.0 + edge * edge);
    }
    debug_assert!(g.data().iter().all(|v| (0.0..=1.0).contains(v)), "g left [0, 1]");
    Ok(g)
}

/// Largest stable step `h / g_max`; unbounded when `g_max = 0`.
pub fn cfl_bound(g_max: f64, h: f64) -> f64 {
    if g_max == 0.0 {
        f64::INFINITY
    } else {
        h / g_max
    }
}

/// Coefficient for the current iterate: smooth, take the Laplacian, evaluate `g`.
pub fn coefficient_for(u: &PlanarImage, cfg: &SolverConfig) -> Result<PlanarImage> {
    let smooth = convolve(u, &gaussian_kernel(cfg.xi)?);
    let lap = laplacian(&smooth);
    diffusion_coefficient(&smooth, &lap, cfg.k, cfg.alpha)
}

/// Fourth-order flux `Δ(v·g·Δu)`.
pub fn flux(u: &PlanarImage, g: &PlanarImage, v: f64) -> PlanarImage {
    let (h, w) = (u.height(), u.width());
    let mut out = u.zeros_like();
    let mut inner = vec![0.0; h * w];
    for c in 0..u.channels() {
        laplacian_plane(u.plane(c), h, w, &mut inner);
        for (x, &gv) in inner.iter_mut().zip(g.plane(c)) {
            *x *= v * gv;
        }
        laplacian_plane(&inner, h, w, out.plane_mut(c));
    }
    out
}

/// One explicit update. Consumes the state and returns the advanced one.
pub fn step(
    state: EvolutionState,
    guidance: &PlanarImage,
    t: &PlanarImage,
    cfg: &SolverConfig,
) -> Result<EvolutionState> {
    let EvolutionState { current, previous, iteration, mut rel_err_history, mut trace, mut warnings, .. } = state;
    if !current.same_shape(&previous) || !current.same_shape(guidance) {
        return Err(Error::Dimension("iterates and guidance differ in shape"));
    }
    check_transmission_shape(&current, t)?;
    let iteration = iteration + 1;

    let g = coefficient_for(&current, cfg)?;
    let g_max = g.max();
    let bound = cfl_bound(g_max, GRID_SPACING);
    if cfg.tau > bound {
        warnings.push(SolverWarning::CflViolation { iteration, tau: cfg.tau, bound, g_max });
    }

    let div = flux(&current, &g, cfg.v);
    let (tau, lam) = (cfg.tau, cfg.lambda_damp);
    let (tau2, denom) = (tau * tau, 1.0 + lam * tau);
    let t2: Vec<f64> = t.data().iter().map(|x| x * x).collect();

    let mut next = current.zeros_like();
    let mut clamped = 0usize;
    for c in 0..current.channels() {
        let rows = next
            .plane_mut(c)
            .iter_mut()
            .zip(current.plane(c))
            .zip(previous.plane(c))
            .zip(div.plane(c))
            .zip(guidance.plane(c))
            .zip(&t2);
        for (((((out, &u), &u_prev), &f), &j), &tsq) in rows {
            let fidelity = cfg.lambda_fid * tsq * (u - j);
            // (2+λτ)u − u⁻ = (1+λτ)u + (u − u⁻); keeps constant states bitwise fixed.
            let raw = u + ((u - u_prev) - tau2 * (f + fidelity)) / denom;
            if !raw.is_finite() {
                return Err(Error::Divergence { iteration });
            }
            if !(0.0..=1.0).contains(&raw) {
                clamped += 1;
            }
            *out = raw.clamp(0.0, 1.0);
        }
    }

    let clamped_fraction = clamped as f64 / next.data().len() as f64;
    if clamped_fraction > CLAMP_REPORT_FRACTION {
        warnings.push(SolverWarning::Clamping { iteration, fraction: clamped_fraction });
    }
    let rel_err = relative_change(&next, &current, cfg.eps_rel);
    rel_err_history.push(rel_err);
    trace.push(StepStats { iteration, rel_err, g_max, clamped_fraction });

    Ok(EvolutionState {
        current: next,
        previous: current,
        iteration,
        rel_err_history,
        trace,
        warnings,
        converged: false,
    })
}

/// `‖next − current‖₂ / (‖current‖₂ + ε)` over every sample.
pub fn relative_change(next: &PlanarImage, current: &PlanarImage, eps: f64) -> f64 {
    let diff: f64 = next.data().iter().zip(current.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    let norm: f64 = current.data().iter().map(|x| x * x).sum();
    libm::sqrt(diff) / (libm::sqrt(norm) + eps)
}

/// Evolve from `u⁰ = guidance` at rest until the relative change drops
/// below `toll` or `max_iters` is reached.
pub fn evolve(guidance: &PlanarImage, t: &PlanarImage, cfg: &SolverConfig) -> Result<EvolutionState> {
    cfg.validate()?;
    let mut state = EvolutionState::at_rest(guidance.clone());
    while state.iteration < cfg.max_iters {
        state = step(state, guidance, t, cfg)?;
        if state.last_rel_err().is_some_and(|e| e < cfg.toll) {
            state.converged = true;
            break;
        }
    }
    Ok(state)
}

/// Result of a full restoration.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub restored: PlanarImage,
    pub state: EvolutionState,
    pub estimate: HazeEstimate,
    /// Prior-based radiance the evolution started from.
    pub guidance: PlanarImage,
}

/// Haze estimation followed by the evolution.
pub fn solve(foggy: &PlanarImage, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    let (estimate, guidance) = haze::estimate(foggy, cfg)?;
    let state = evolve(&guidance, &estimate.transmission, cfg)?;
    Ok(Solution { restored: state.current.clone(), state, estimate, guidance })
}
