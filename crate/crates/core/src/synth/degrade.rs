//! Seeded capture degradations: Gaussian sensor noise, an oriented sinusoidal
//! interference field standing in for display moire, and a horizontal
//! brightness ramp.

use std::f64::consts::PI;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::raster::GrayImage;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DegradationSpec {
    /// Standard deviation of additive noise, >= 0.
    pub gaussian_sigma: f64,
    /// Peak amplitude of the interference field, 0..=64.
    pub moire_amplitude: f64,
    /// Wavelength in pixels, > 1 whenever the amplitude is non-zero.
    pub moire_period: f64,
    /// Direction of the wave vector in degrees.
    pub moire_angle: f64,
    /// Total left-to-right brightness change, 0..=64, centered on zero.
    pub gradient_span: f64,
    pub seed: u64,
}

impl DegradationSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidDegradation(m.to_string()));
        let finite = [
            self.gaussian_sigma,
            self.moire_amplitude,
            self.moire_period,
            self.moire_angle,
            self.gradient_span,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return bad("parameters must be finite");
        }
        if self.gaussian_sigma < 0.0 {
            return bad("gaussian_sigma must be >= 0");
        }
        if !(0.0..=64.0).contains(&self.moire_amplitude) {
            return bad("moire_amplitude must be in [0, 64]");
        }
        if self.moire_amplitude > 0.0 && self.moire_period <= 1.0 {
            return bad("moire_period must be > 1");
        }
        if !(0.0..=64.0).contains(&self.gradient_span) {
            return bad("gradient_span must be in [0, 64]");
        }
        Ok(())
    }
}

/// Uniform double in [0, 1) from the top 53 bits.
pub(crate) fn unit_f64(rng: &mut Xoshiro256PlusPlus) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Box-Muller pair of standard normals.
fn normal_pair(rng: &mut Xoshiro256PlusPlus) -> (f64, f64) {
    let u1 = 1.0 - unit_f64(rng); // (0, 1]
    let u2 = unit_f64(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Applies ramp, interference and noise (in that order of summation), then
/// rounds and clamps. Noise is drawn in row-major order, two pixels per
/// Box-Muller pair, from xoshiro256++ seeded with `spec.seed`.
pub fn degrade(img: &GrayImage, spec: &DegradationSpec) -> Result<GrayImage, SynthError> {
    spec.validate()?;
    let (w, h) = (img.width(), img.height());
    let mut field: Vec<f64> = img.pixels().iter().map(|&p| p as f64).collect();

    if spec.gradient_span > 0.0 && w > 1 {
        for y in 0..h {
            for x in 0..w {
                let t = x as f64 / (w - 1) as f64 - 0.5;
                field[(y * w + x) as usize] += spec.gradient_span * t;
            }
        }
    }

    if spec.moire_amplitude > 0.0 {
        let angle = spec.moire_angle.to_radians();
        let (kx, ky) = (angle.cos(), angle.sin());
        for y in 0..h {
            for x in 0..w {
                let phase = 2.0 * PI * (x as f64 * kx + y as f64 * ky) / spec.moire_period;
                field[(y * w + x) as usize] += spec.moire_amplitude * phase.sin();
            }
        }
    }

    if spec.gaussian_sigma > 0.0 {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(spec.seed);
        let mut chunks = field.chunks_mut(2);
        for pair in &mut chunks {
            let (a, b) = normal_pair(&mut rng);
            pair[0] += spec.gaussian_sigma * a;
            if let Some(second) = pair.get_mut(1) {
                *second += spec.gaussian_sigma * b;
            }
        }
    }

    let pixels = field
        .into_iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    Ok(GrayImage::from_pixels(w, h, pixels)?)
}

/// 3x3 mean filter with edge replication, rounded to nearest. Used to soften
/// glyph edges the way font anti-aliasing would.
pub fn box_blur3(img: &GrayImage) -> GrayImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let mut sum = 0u32;
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                let sx = (x as i64 + dx).clamp(0, w - 1) as u32;
                let sy = (y as i64 + dy).clamp(0, h - 1) as u32;
                sum += img.get(sx, sy) as u32;
            }
        }
        ((sum + 4) / 9) as u8
    })
}
