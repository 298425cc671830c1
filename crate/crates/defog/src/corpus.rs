//! Procedurally generated test scenes.
//!
//! Three clean scenes serve as ground truth for reference experiments and
//! two pre-fogged scenes stand in for real foggy photographs. Everything is
//! a closed-form function of the pixel position, so the corpus is identical
//! on every platform.

use std::f64::consts::PI;

use defog_core::haze::{synthesize_depth_fog, FogSpec};
use defog_core::PlanarImage;

use crate::codec::quantize_image;
use crate::degrade::{add_sensor_noise, stable_hash, DEFAULT_NOISE_SIGMA};

/// Name prefix that selects a bundled scene in plan inputs.
pub const BUILTIN_PREFIX: &str = "builtin:";

pub const CLEAN_SCENES: [&str; 3] = ["harbor", "meadow", "quarry"];
pub const FOGGY_SCENES: [&str; 2] = ["misty-harbor", "misty-quarry"];

#[derive(Clone, Copy)]
struct Block {
    top: usize,
    left: usize,
    height: usize,
    width: usize,
    colour: [f64; 3],
    // Spatial period of the stripe texture, in pixels.
    period: f64,
}

fn sky(i: usize, h: usize) -> [f64; 3] {
    let s = i as f64 / h as f64;
    [0.55 + 0.25 * s, 0.68 + 0.2 * s, 0.86 + 0.1 * s]
}

fn render(height: usize, width: usize, horizon: usize, ground: [f64; 3], blocks: &[Block]) -> PlanarImage {
    PlanarImage::from_fn(height, width, 3, |i, j, c| {
        if let Some(b) = blocks
            .iter()
            .rev()
            .find(|b| (b.top..b.top + b.height).contains(&i) && (b.left..b.left + b.width).contains(&j))
        {
            let phase = 2.0 * PI * ((i - b.top) as f64 + 0.5 * (j - b.left) as f64) / b.period;
            return b.colour[c] * (0.8 + 0.2 * phase.sin());
        }
        if i < horizon {
            sky(i, horizon)[c]
        } else {
            let d = (i - horizon) as f64 / (height - horizon) as f64;
            let grain = 0.04 * (2.0 * PI * j as f64 / 9.0).sin() * (2.0 * PI * i as f64 / 7.0).cos();
            ground[c] * (0.7 + 0.3 * d) + grain
        }
    })
    .expect("scene dimensions are fixed and valid")
}

fn harbor() -> PlanarImage {
    let blocks = [
        Block { top: 20, left: 4, height: 22, width: 14, colour: [0.66, 0.2, 0.06], period: 6.0 },
        Block { top: 14, left: 24, height: 30, width: 12, colour: [0.08, 0.3, 0.58], period: 8.0 },
        Block { top: 26, left: 42, height: 18, width: 18, colour: [0.56, 0.5, 0.08], period: 5.0 },
        Block { top: 48, left: 10, height: 10, width: 40, colour: [0.12, 0.42, 0.24], period: 10.0 },
    ];
    render(64, 64, 30, [0.06, 0.26, 0.34], &blocks)
}

fn meadow() -> PlanarImage {
    let blocks = [
        Block { top: 18, left: 6, height: 16, width: 20, colour: [0.26, 0.56, 0.06], period: 7.0 },
        Block { top: 30, left: 34, height: 20, width: 22, colour: [0.62, 0.42, 0.05], period: 6.0 },
        Block { top: 44, left: 2, height: 16, width: 28, colour: [0.1, 0.38, 0.05], period: 9.0 },
    ];
    render(64, 64, 24, [0.16, 0.4, 0.06], &blocks)
}

fn quarry() -> PlanarImage {
    let blocks = [
        Block { top: 16, left: 4, height: 26, width: 24, colour: [0.5, 0.38, 0.12], period: 7.0 },
        Block { top: 22, left: 34, height: 24, width: 18, colour: [0.26, 0.1, 0.46], period: 5.0 },
        Block { top: 30, left: 60, height: 26, width: 30, colour: [0.6, 0.26, 0.07], period: 8.0 },
        Block { top: 50, left: 12, height: 10, width: 44, colour: [0.22, 0.16, 0.05], period: 11.0 },
    ];
    render(64, 96, 26, [0.34, 0.26, 0.08], &blocks)
}

/// Clean ground-truth scene by name.
pub fn clean_scene(name: &str) -> Option<PlanarImage> {
    match name {
        "harbor" => Some(harbor()),
        "meadow" => Some(meadow()),
        "quarry" => Some(quarry()),
        _ => None,
    }
}

/// Foggy stand-in scene by name: depth-ramp fog, sensor noise and 8-bit
/// quantization, like a camera capture.
pub fn foggy_scene(name: &str) -> Option<PlanarImage> {
    let (clean, level) = match name {
        "misty-harbor" => (harbor(), 0.3),
        "misty-quarry" => (quarry(), 0.25),
        _ => return None,
    };
    let spec = FogSpec::new(level, 0.88).expect("fixed valid fog");
    let foggy = synthesize_depth_fog(&clean, spec);
    let noisy = add_sensor_noise(&foggy, DEFAULT_NOISE_SIGMA, stable_hash(&[name.as_bytes()]));
    Some(quantize_image(&noisy))
}

/// Any bundled scene, clean or foggy.
pub fn scene(name: &str) -> Option<PlanarImage> {
    clean_scene(name).or_else(|| foggy_scene(name))
}
