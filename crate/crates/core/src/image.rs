//! Pixel containers and the discrete operators shared by every stage.
//!
//! All stencils use unit grid spacing. Convolution and the Laplacian
//! replicate edge pixels; the gradient switches to one-sided differences on
//! the border rows and columns so that linear fields differentiate exactly.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Smallest admissible side length; the stencils need an interior.
pub const MIN_SIDE: usize = 3;

/// An `height × width × channels` array of reals in channel-planar layout.
///
/// Images built with [`PlanarImage::new`] hold intensities in `[0, 1]`.
/// Derivative planes (gradients, Laplacians, diffusion fluxes) are built
/// with [`PlanarImage::new_field`] and only guarantee finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarImage {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

fn check_shape(height: usize, width: usize, channels: usize, len: usize) -> Result<()> {
    if height < MIN_SIDE || width < MIN_SIDE {
        return Err(Error::Dimension("image must be at least 3x3"));
    }
    if channels != 1 && channels != 3 {
        return Err(Error::Dimension("channel count must be 1 or 3"));
    }
    if len != height * width * channels {
        return Err(Error::Dimension("data length does not match height*width*channels"));
    }
    Ok(())
}

impl PlanarImage {
    /// Intensity image; every sample must lie in `[0, 1]`.
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(height, width, channels, data.len())?;
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Value("intensity outside [0, 1]"));
        }
        Ok(Self { height, width, channels, data })
    }

    /// Signed real-valued plane (derivatives, fluxes). Samples must be finite.
    pub fn new_field(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(height, width, channels, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Value("non-finite sample"));
        }
        Ok(Self { height, width, channels, data })
    }

    /// Intensity image from a per-sample function `f(row, col, channel)`,
    /// clamped to `[0, 1]`.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        check_shape(height, width, channels, height * width * channels)?;
        let mut data = Vec::with_capacity(height * width * channels);
        for c in 0..channels {
            for i in 0..height {
                for j in 0..width {
                    let v = f(i, j, c);
                    if v.is_nan() {
                        return Err(Error::Value("NaN sample"));
                    }
                    data.push(v.clamp(0.0, 1.0));
                }
            }
        }
        Ok(Self { height, width, channels, data })
    }

    pub fn constant(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    pub(crate) fn from_parts(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width * channels);
        Self { height, width, channels, data }
    }

    pub(crate) fn zeros_like(&self) -> Self {
        Self::from_parts(self.height, self.width, self.channels, vec![0.0; self.data.len()])
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Samples of channel `c`, row-major.
    #[inline]
    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.pixels();
        &self.data[c * n..(c + 1) * n]
    }

    pub(crate) fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.pixels();
        &mut self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[channel * self.pixels() + row * self.width + col]
    }

    pub fn same_shape(&self, other: &PlanarImage) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Copy with every sample clamped to `[0, 1]`.
    pub fn clamped(&self) -> PlanarImage {
        let data = self.data.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Self::from_parts(self.height, self.width, self.channels, data)
    }

    /// True when every sample lies in `[0, 1]`.
    pub fn is_intensity(&self) -> bool {
        self.data.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

/// Single-plane image holding the unweighted channel mean `(R+G+B)/3`.
/// One-channel input is returned unchanged.
pub fn to_gray(img: &PlanarImage) -> PlanarImage {
    if img.channels() == 1 {
        return img.clone();
    }
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let data = r.iter().zip(g).zip(b).map(|((r, g), b)| (r + g + b) / 3.0).collect();
    PlanarImage::from_parts(img.height(), img.width(), 1, data)
}

/// Square convolution kernel of side `2·radius + 1`, row-major weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    radius: usize,
    weights: Vec<f64>,
    // 1-D factor when the kernel is an outer product of itself.
    separable: Option<Vec<f64>>,
}

impl Kernel2D {
    /// Arbitrary kernel. Weights must be finite and symmetric under 180° rotation.
    pub fn new(radius: usize, weights: Vec<f64>) -> Result<Self> {
        let side = 2 * radius + 1;
        if weights.len() != side * side {
            return Err(Error::Dimension("kernel weights must have (2r+1)^2 entries"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Parameter("kernel weights must be finite"));
        }
        let n = weights.len();
        if (0..n).any(|k| weights[k] != weights[n - 1 - k]) {
            return Err(Error::Parameter("kernel must be symmetric under 180-degree rotation"));
        }
        Ok(Self { radius, weights, separable: None })
    }

    pub fn identity() -> Self {
        Self { radius: 0, weights: vec![1.0], separable: Some(vec![1.0]) }
    }

    /// Normalized box filter of side `2·radius + 1`.
    pub fn box_filter(radius: usize) -> Self {
        let side = 2 * radius + 1;
        let w = 1.0 / (side * side) as f64;
        Self { radius, weights: vec![w; side * side], separable: Some(vec![1.0 / side as f64; side]) }
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset `(dy, dx)` from the center.
    pub fn weight(&self, dy: isize, dx: isize) -> f64 {
        let r = self.radius as isize;
        let side = self.side() as isize;
        self.weights[((dy + r) * side + (dx + r)) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Normalized Gaussian kernel with radius `ceil(3σ)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Kernel2D> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter("gaussian sigma must be positive"));
    }
    let radius = libm::ceil(3.0 * sigma) as usize;
    let side = 2 * radius + 1;
    let two_s2 = 2.0 * sigma * sigma;
    let r = radius as f64;

    let mut profile: Vec<f64> = (0..side)
        .map(|k| {
            let x = k as f64 - r;
            libm::exp(-(x * x) / two_s2)
        })
        .collect();

    let mut weights = Vec::with_capacity(side * side);
    for ky in 0..side {
        for kx in 0..side {
            let (y, x) = (ky as f64 - r, kx as f64 - r);
            weights.push(libm::exp(-(x * x + y * y) / two_s2));
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let total_1d: f64 = profile.iter().sum();
    profile.iter_mut().for_each(|w| *w /= total_1d);

    Ok(Kernel2D { radius, weights, separable: Some(profile) })
}

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

fn convolve_plane_direct(src: &[f64], h: usize, w: usize, k: &Kernel2D, dst: &mut [f64]) {
    let r = k.radius() as isize;
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for dy in -r..=r {
                let row = clamp_index(i as isize + dy, h) * w;
                for dx in -r..=r {
                    acc += k.weight(dy, dx) * src[row + clamp_index(j as isize + dx, w)];
                }
            }
            dst[i * w + j] = acc;
        }
    }
}

fn convolve_plane_separable(src: &[f64], h: usize, w: usize, taps: &[f64], dst: &mut [f64]) {
    let r = (taps.len() / 2) as isize;
    let mut tmp = vec![0.0; h * w];
    for i in 0..h {
        let row = &src[i * w..(i + 1) * w];
        for j in 0..w {
            let mut acc = 0.0;
            for (t, wt) in taps.iter().enumerate() {
                acc += wt * row[clamp_index(j as isize + t as isize - r, w)];
            }
            tmp[i * w + j] = acc;
        }
    }
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for (t, wt) in taps.iter().enumerate() {
                acc += wt * tmp[clamp_index(i as isize + t as isize - r, h) * w + j];
            }
            dst[i * w + j] = acc;
        }
    }
}

/// Per-channel 2-D convolution with clamp-to-edge boundaries.
pub fn convolve(img: &PlanarImage, k: &Kernel2D) -> PlanarImage {
    let (h, w) = (img.height(), img.width());
    let mut out = img.zeros_like();
    for c in 0..img.channels() {
        let dst = out.plane_mut(c);
        match &k.separable {
            Some(taps) => convolve_plane_separable(img.plane(c), h, w, taps, dst),
            None => convolve_plane_direct(img.plane(c), h, w, k, dst),
        }
    }
    out
}

pub(crate) fn gradient_plane(src: &[f64], h: usize, w: usize, gx: &mut [f64], gy: &mut [f64]) {
    for i in 0..h {
        for j in 0..w {
            let at = |r: usize, c: usize| src[r * w + c];
            gx[i * w + j] = if i == 0 {
                at(1, j) - at(0, j)
            } else if i == h - 1 {
                at(h - 1, j) - at(h - 2, j)
            } else {
                (at(i + 1, j) - at(i - 1, j)) / 2.0
            };
            gy[i * w + j] = if j == 0 {
                at(i, 1) - at(i, 0)
            } else if j == w - 1 {
                at(i, w - 1) - at(i, w - 2)
            } else {
                (at(i, j + 1) - at(i, j - 1)) / 2.0
            };
        }
    }
}

/// Central-difference gradient `(∇ₓ, ∇ᵧ)`, where x runs down the rows and
/// y across the columns. Border samples use one-sided differences.
pub fn gradient(img: &PlanarImage) -> (PlanarImage, PlanarImage) {
    let (h, w) = (img.height(), img.width());
    let mut gx = img.zeros_like();
    let mut gy = img.zeros_like();
    for c in 0..img.channels() {
        gradient_plane(img.plane(c), h, w, gx.plane_mut(c), gy.plane_mut(c));
    }
    (gx, gy)
}

pub(crate) fn laplacian_plane(src: &[f64], h: usize, w: usize, dst: &mut [f64]) {
    for i in 0..h {
        let up = if i == 0 { 0 } else { i - 1 };
        let down = if i + 1 == h { i } else { i + 1 };
        for j in 0..w {
            let left = if j == 0 { 0 } else { j - 1 };
            let right = if j + 1 == w { j } else { j + 1 };
            let centre = src[i * w + j];
            dst[i * w + j] = (src[down * w + j] - 2.0 * centre + src[up * w + j])
                + (src[i * w + right] - 2.0 * centre + src[i * w + left]);
        }
    }
}

/// Five-point Laplacian with replicated borders.
pub fn laplacian(img: &PlanarImage) -> PlanarImage {
    let (h, w) = (img.height(), img.width());
    let mut out = img.zeros_like();
    for c in 0..img.channels() {
        laplacian_plane(img.plane(c), h, w, out.plane_mut(c));
    }
    out
}
