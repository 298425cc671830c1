//! Synthetic degradation used by the reference benchmark: homogeneous fog,
//! additive Gaussian sensor noise, then 8-bit quantization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use defog_core::haze::{synthesize_fog, FogSpec};
use defog_core::PlanarImage;

use crate::codec::quantize_image;
use crate::error::Result;

/// Default sensor noise standard deviation, about 10 levels out of 255.
pub const DEFAULT_NOISE_SIGMA: f64 = 0.04;

/// Adds zero-mean Gaussian noise with the given standard deviation, clamped
/// to `[0, 1]`. The stream is a pure function of `seed`.
pub fn add_sensor_noise(img: &PlanarImage, sigma: f64, seed: u64) -> PlanarImage {
    if sigma <= 0.0 {
        return img.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("positive finite sigma");
    let data = img.data().iter().map(|&v| (v + normal.sample(&mut rng)).clamp(0.0, 1.0)).collect();
    PlanarImage::new(img.height(), img.width(), img.channels(), data).expect("clamped samples")
}

/// Fog, sensor noise and quantization in that order.
pub fn degrade(clean: &PlanarImage, fog: FogSpec, noise_sigma: f64, seed: u64) -> Result<PlanarImage> {
    let foggy = synthesize_fog(clean, fog);
    Ok(quantize_image(&add_sensor_noise(&foggy, noise_sigma, seed)))
}

/// Stable 64-bit FNV-1a hash used to derive per-entry noise seeds.
pub fn stable_hash(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for &b in *part {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Seed for one (image, fog level) entry of a plan.
pub fn entry_seed(base: u64, image_id: &str, level: f64) -> u64 {
    stable_hash(&[&base.to_le_bytes(), image_id.as_bytes(), &level.to_bits().to_le_bytes()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_is_seeded() {
        let img = PlanarImage::constant(8, 8, 3, 0.5).unwrap();
        let a = add_sensor_noise(&img, 0.05, 3);
        assert_eq!(a, add_sensor_noise(&img, 0.05, 3));
        assert_ne!(a, add_sensor_noise(&img, 0.05, 4));
        assert_eq!(add_sensor_noise(&img, 0.0, 3), img);
        let sd = (a.data().iter().map(|v| (v - 0.5) * (v - 0.5)).sum::<f64>() / a.data().len() as f64).sqrt();
        assert!((sd - 0.05).abs() < 0.01, "{sd}");
    }

    #[test]
    fn seeds_differ_per_entry() {
        assert_ne!(entry_seed(0, "harbor", 0.1), entry_seed(0, "harbor", 0.2));
        assert_ne!(entry_seed(0, "harbor", 0.1), entry_seed(0, "meadow", 0.1));
        assert_eq!(entry_seed(7, "harbor", 0.1), entry_seed(7, "harbor", 0.1));
    }
}
