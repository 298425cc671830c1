//! Full-reference (MSE, SSIM) and no-reference (fog density, contrast
//! restoration, entropy, average gradient) quality measures.
//!
//! Everything except MSE works on the gray-mean plane.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::haze::dark_channel;
use crate::image::{gaussian_kernel, gradient_plane, to_gray, Kernel2D, PlanarImage};

pub const SSIM_C1: f64 = 1e-4;
pub const SSIM_C2: f64 = 9e-4;
pub const SSIM_SIGMA: f64 = 1.5;

/// Identifier of the fog-density proxy formula.
pub const FADE_VERSION: &str = "fade-s1";
const FADE_PATCH_RADIUS: usize = 7;
const FADE_EPS: f64 = 1e-3;

/// Value reported by [`cri`] when the input has no dynamic range.
pub const CRI_SENTINEL: f64 = 1.0;

fn same_shape(a: &PlanarImage, b: &PlanarImage) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::Dimension("images differ in shape"))
    }
}

/// Mean squared difference over every pixel and channel.
pub fn mse(reference: &PlanarImage, test: &PlanarImage) -> Result<f64> {
    same_shape(reference, test)?;
    let sum: f64 = reference.data().iter().zip(test.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / reference.data().len() as f64)
}

struct Moments {
    mx: f64,
    my: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

#[allow(clippy::too_many_arguments)]
fn window_moments(
    x: &[f64],
    y: &[f64],
    w: usize,
    rows: (usize, usize),
    cols: (usize, usize),
    k: &Kernel2D,
    ci: usize,
    cj: usize,
) -> Moments {
    let r = k.radius() as isize;
    let (mut total, mut mx, mut my, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in rows.0..rows.1 {
        for j in cols.0..cols.1 {
            let wt = k.weight(i as isize - ci as isize, j as isize - cj as isize);
            let (a, b) = (x[i * w + j], y[i * w + j]);
            total += wt;
            mx += wt * a;
            my += wt * b;
            xx += wt * a * a;
            yy += wt * b * b;
            xy += wt * a * b;
        }
    }
    debug_assert!(r >= 0);
    let (mx, my) = (mx / total, my / total);
    Moments { mx, my, sxx: xx / total - mx * mx, syy: yy / total - my * my, sxy: xy / total - mx * my }
}

fn ssim_index(m: &Moments) -> f64 {
    ((2.0 * m.mx * m.my + SSIM_C1) * (2.0 * m.sxy + SSIM_C2))
        / ((m.mx * m.mx + m.my * m.my + SSIM_C1) * (m.sxx + m.syy + SSIM_C2))
}

/// Mean structural similarity with an 11×11 Gaussian window (σ = 1.5).
///
/// The map covers positions where the window fits inside the image. Images
/// narrower than the window use a truncated, renormalized window at every
/// pixel instead.
pub fn ssim(reference: &PlanarImage, test: &PlanarImage) -> Result<f64> {
    same_shape(reference, test)?;
    let (gx, gy) = (to_gray(reference), to_gray(test));
    let (x, y) = (gx.data(), gy.data());
    let (h, w) = (reference.height(), reference.width());
    let k = gaussian_kernel(SSIM_SIGMA)?;
    let r = k.radius();

    let mut total = 0.0;
    let mut count = 0usize;
    if h >= k.side() && w >= k.side() {
        for i in r..h - r {
            for j in r..w - r {
                let m = window_moments(x, y, w, (i - r, i + r + 1), (j - r, j + r + 1), &k, i, j);
                total += ssim_index(&m);
                count += 1;
            }
        }
    } else {
        for i in 0..h {
            for j in 0..w {
                let rows = (i.saturating_sub(r), (i + r + 1).min(h));
                let cols = (j.saturating_sub(r), (j + r + 1).min(w));
                total += ssim_index(&window_moments(x, y, w, rows, cols, &k, i, j));
                count += 1;
            }
        }
    }
    Ok(total / count as f64)
}

/// Average gradient magnitude of the gray-mean plane.
pub fn ag(img: &PlanarImage) -> f64 {
    let gray = to_gray(img);
    let (h, w) = (gray.height(), gray.width());
    let mut gx = vec![0.0; h * w];
    let mut gy = vec![0.0; h * w];
    gradient_plane(gray.data(), h, w, &mut gx, &mut gy);
    let sum: f64 = gx.iter().zip(&gy).map(|(a, b)| libm::sqrt(a * a + b * b)).sum();
    sum / (h * w) as f64
}

fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n)
}

/// Deterministic fog-density proxy ("fade-s1"); larger means foggier.
///
/// `100 · mean(dark channel, r = 7) / (AG + std(gray) + 10⁻³)`
pub fn fade_surrogate(img: &PlanarImage) -> f64 {
    let dark = dark_channel(img, FADE_PATCH_RADIUS).expect("fixed positive patch radius");
    let gray = to_gray(img);
    100.0 * dark.mean() / (ag(img) + std_dev(gray.data()) + FADE_EPS)
}

/// Ratio of restored to foggy gray-plane dynamic range, or `None` when the
/// foggy plane is flat.
pub fn cri_checked(foggy: &PlanarImage, restored: &PlanarImage) -> Option<f64> {
    let (f, r) = (to_gray(foggy), to_gray(restored));
    let range_in = f.max() - f.min();
    if range_in > 0.0 {
        Some((r.max() - r.min()) / range_in)
    } else {
        None
    }
}

/// [`cri_checked`] with [`CRI_SENTINEL`] substituted for a flat input.
pub fn cri(foggy: &PlanarImage, restored: &PlanarImage) -> f64 {
    cri_checked(foggy, restored).unwrap_or(CRI_SENTINEL)
}

/// Histogram bin of an intensity: `floor(255·v)` clamped to `[0, 255]`.
#[inline]
pub fn intensity_bin(v: f64) -> usize {
    libm::floor(v * 255.0).clamp(0.0, 255.0) as usize
}

/// Shannon entropy in bits of the 256-bin gray-plane histogram.
pub fn entropy(img: &PlanarImage) -> f64 {
    let gray = to_gray(img);
    let mut hist = [0usize; 256];
    for &v in gray.data() {
        hist[intensity_bin(v)] += 1;
    }
    let n = gray.data().len() as f64;
    -hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * libm::log2(p)
        })
        .sum::<f64>()
}

/// Quality measures for one restored image.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub mse: Option<f64>,
    pub ssim: Option<f64>,
    pub fade: f64,
    pub cri: f64,
    pub entropy: f64,
    pub ag: f64,
    /// Set when the foggy input had zero range and `cri` holds the sentinel.
    pub cri_undefined: bool,
}

impl MetricReport {
    /// Scores `restored`; MSE and SSIM are filled in only when a ground
    /// truth is supplied.
    pub fn evaluate(reference: Option<&PlanarImage>, foggy: &PlanarImage, restored: &PlanarImage) -> Result<Self> {
        same_shape(foggy, restored)?;
        let (mse, ssim) = match reference {
            Some(r) => (Some(mse(r, restored)?), Some(ssim(r, restored)?)),
            None => (None, None),
        };
        let checked = cri_checked(foggy, restored);
        Ok(Self {
            mse,
            ssim,
            fade: fade_surrogate(restored),
            cri: checked.unwrap_or(CRI_SENTINEL),
            entropy: entropy(restored),
            ag: ag(restored),
            cri_undefined: checked.is_none(),
        })
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.mse.iter().chain(self.ssim.iter()).copied().collect();
        v.extend([self.fade, self.cri, self.entropy, self.ag]);
        v
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}
