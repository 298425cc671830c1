//! Atmospheric scattering model: dark channel, airlight, transmission and
//! radiance recovery, plus forward fog synthesis for experiments.
//!
//! A foggy observation is `u = J·T + A·(1 − T)` with scene radiance `J`,
//! scalar airlight `A` and transmission `T`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{convolve, gaussian_kernel, to_gray, PlanarImage};
use crate::pde::SolverConfig;

/// Lower clamp applied to the estimated airlight.
pub const AIRLIGHT_FLOOR: f64 = 0.05;

/// Default airlight used when synthesizing fog.
pub const DEFAULT_FOG_AIRLIGHT: f64 = 0.9;

/// Atmospheric parameters estimated from one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct HazeEstimate {
    pub dark_channel: PlanarImage,
    pub airlight: f64,
    /// Refined transmission in `[0, 1]`; the `t_floor` bound is applied at
    /// recovery time, not stored here.
    pub transmission: PlanarImage,
}

/// Homogeneous fog of strength `level` with a given airlight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FogSpec {
    level: f64,
    airlight: f64,
}

impl FogSpec {
    pub fn new(level: f64, airlight: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&level) {
            return Err(Error::Parameter("fog level must lie in [0, 1)"));
        }
        if !(airlight > 0.0 && airlight <= 1.0) {
            return Err(Error::Parameter("fog airlight must lie in (0, 1]"));
        }
        Ok(Self { level, airlight })
    }

    pub fn with_level(level: f64) -> Result<Self> {
        Self::new(level, DEFAULT_FOG_AIRLIGHT)
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn airlight(&self) -> f64 {
        self.airlight
    }

    /// Transmission of the homogeneous model, `1 − level`.
    pub fn transmission(&self) -> f64 {
        1.0 - self.level
    }
}

/// Sliding minimum over a `(2r+1)`-wide window along rows then columns,
/// truncated at the borders. Equivalent to the square-patch minimum.
fn min_filter(src: &[f64], h: usize, w: usize, r: usize) -> Vec<f64> {
    let mut rows = vec![0.0; h * w];
    for i in 0..h {
        for j in 0..w {
            let (lo, hi) = (j.saturating_sub(r), (j + r).min(w - 1));
            rows[i * w + j] = src[i * w + lo..=i * w + hi].iter().copied().fold(f64::INFINITY, f64::min);
        }
    }
    let mut out = vec![0.0; h * w];
    for i in 0..h {
        let (lo, hi) = (i.saturating_sub(r), (i + r).min(h - 1));
        for j in 0..w {
            out[i * w + j] = (lo..=hi).map(|k| rows[k * w + j]).fold(f64::INFINITY, f64::min);
        }
    }
    out
}

/// Minimum over the `(2r+1)²` patch of the per-pixel channel minimum.
/// A one-channel input skips the channel reduction.
pub fn dark_channel(img: &PlanarImage, patch_radius: usize) -> Result<PlanarImage> {
    if patch_radius == 0 {
        return Err(Error::Parameter("patch radius must be positive"));
    }
    let n = img.pixels();
    let mut channel_min = img.plane(0).to_vec();
    for c in 1..img.channels() {
        for (m, v) in channel_min.iter_mut().zip(img.plane(c)) {
            *m = m.min(*v);
        }
    }
    debug_assert_eq!(channel_min.len(), n);
    let data = min_filter(&channel_min, img.height(), img.width(), patch_radius);
    Ok(PlanarImage::from_parts(img.height(), img.width(), 1, data))
}

/// Airlight from the brightest `ceil(top_fraction·H·W)` dark-channel pixels:
/// the largest gray-mean observation among them, clamped to `[0.05, 1]`.
/// Ties in the dark channel go to the smaller row-major index.
pub fn estimate_airlight(img: &PlanarImage, dark: &PlanarImage, top_fraction: f64) -> Result<f64> {
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(Error::Parameter("airlight top fraction must lie in (0, 1]"));
    }
    if dark.height() != img.height() || dark.width() != img.width() || dark.channels() != 1 {
        return Err(Error::Dimension("dark channel must be a single plane matching the image"));
    }
    let n = img.pixels();
    let count = selection_count(top_fraction, n);
    let d = dark.data();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));

    let gray = to_gray(img);
    let g = gray.data();
    let brightest = order[..count].iter().map(|&k| g[k]).fold(f64::NEG_INFINITY, f64::max);
    Ok(brightest.clamp(AIRLIGHT_FLOOR, 1.0))
}

/// Number of pixels the airlight selection keeps.
pub fn selection_count(top_fraction: f64, pixels: usize) -> usize {
    (libm::ceil(top_fraction * pixels as f64) as usize).clamp(1, pixels)
}

/// Rough transmission `1 − ω·dark/A`, clamped to `[0, 1]`.
pub fn transmission(dark: &PlanarImage, airlight: f64, omega: f64) -> Result<PlanarImage> {
    if airlight.is_nan() || airlight <= 0.0 {
        return Err(Error::Parameter("airlight must be positive"));
    }
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::Parameter("omega must lie in (0, 1)"));
    }
    let data = dark.data().iter().map(|&d| (1.0 - omega * d / airlight).clamp(0.0, 1.0)).collect();
    Ok(PlanarImage::from_parts(dark.height(), dark.width(), dark.channels(), data))
}

/// Gaussian-smoothed transmission, re-clamped to `[0, 1]`.
pub fn refine_transmission(t_rough: &PlanarImage, sigma: f64) -> Result<PlanarImage> {
    Ok(convolve(t_rough, &gaussian_kernel(sigma)?).clamped())
}

/// Inverts the scattering model, `J = (u − A)/max(T, t_floor) + A`, per
/// channel, clamped to `[0, 1]`. `T` is a single plane broadcast over channels.
pub fn recover_radiance(img: &PlanarImage, t: &PlanarImage, airlight: f64, t_floor: f64) -> Result<PlanarImage> {
    if !(t_floor > 0.0 && t_floor < 1.0) {
        return Err(Error::Parameter("t_floor must lie in (0, 1)"));
    }
    check_transmission_shape(img, t)?;
    Ok(recover_unclamped(img, t, airlight, t_floor).clamped())
}

pub(crate) fn check_transmission_shape(img: &PlanarImage, t: &PlanarImage) -> Result<()> {
    if t.height() != img.height() || t.width() != img.width() || t.channels() != 1 {
        return Err(Error::Dimension("transmission must be a single plane matching the image"));
    }
    Ok(())
}

/// Recovery before the final clamp; exposed for round-trip checks.
pub fn recover_unclamped(img: &PlanarImage, t: &PlanarImage, airlight: f64, t_floor: f64) -> PlanarImage {
    let mut out = img.zeros_like();
    let tp = t.data();
    for c in 0..img.channels() {
        for ((o, &u), &tv) in out.plane_mut(c).iter_mut().zip(img.plane(c)).zip(tp) {
            *o = (u - airlight) / tv.max(t_floor) + airlight;
        }
    }
    out
}

/// Forward model with homogeneous transmission: `clean·(1−level) + A·level`.
pub fn synthesize_fog(clean: &PlanarImage, spec: FogSpec) -> PlanarImage {
    let t = spec.transmission();
    let a = spec.airlight();
    let data = clean.data().iter().map(|&v| (v * t + a * spec.level()).clamp(0.0, 1.0)).collect();
    PlanarImage::from_parts(clean.height(), clean.width(), clean.channels(), data)
}

/// Transmission plane of the depth-ramp fog variant: `1 − level` on the
/// bottom row, `(1 − level)²` on the top row, linear in between.
pub fn depth_ramp_transmission(height: usize, width: usize, level: f64) -> PlanarImage {
    let near = 1.0 - level;
    let far = near * near;
    let mut data = Vec::with_capacity(height * width);
    for i in 0..height {
        let s = i as f64 / (height - 1) as f64;
        let t = far + (near - far) * s;
        data.extend(core::iter::repeat_n(t, width));
    }
    PlanarImage::from_parts(height, width, 1, data)
}

/// Forward model with an explicit transmission plane.
pub fn synthesize_fog_with(clean: &PlanarImage, t: &PlanarImage, airlight: f64) -> Result<PlanarImage> {
    check_transmission_shape(clean, t)?;
    let mut out = clean.zeros_like();
    for c in 0..clean.channels() {
        for ((o, &j), &tv) in out.plane_mut(c).iter_mut().zip(clean.plane(c)).zip(t.data()) {
            *o = (j * tv + airlight * (1.0 - tv)).clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

/// Depth-ramp fog: denser towards the top of the frame.
pub fn synthesize_depth_fog(clean: &PlanarImage, spec: FogSpec) -> PlanarImage {
    let t = depth_ramp_transmission(clean.height(), clean.width(), spec.level());
    synthesize_fog_with(clean, &t, spec.airlight()).expect("ramp matches image shape")
}

/// Full prior-based estimate. Returns the estimate and the guidance image.
pub fn estimate(img: &PlanarImage, cfg: &SolverConfig) -> Result<(HazeEstimate, PlanarImage)> {
    if img.channels() != 3 {
        return Err(Error::Dimension("haze estimation needs a 3-channel image"));
    }
    let dark = dark_channel(img, cfg.patch_radius)?;
    let airlight = estimate_airlight(img, &dark, cfg.airlight_fraction)?;
    let rough = transmission(&dark, airlight, cfg.omega)?;
    let refined = refine_transmission(&rough, cfg.refine_sigma)?;
    let guidance = recover_radiance(img, &refined, airlight, cfg.t_floor)?;
    Ok((HazeEstimate { dark_channel: dark, airlight, transmission: refined }, guidance))
}
