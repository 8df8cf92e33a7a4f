use crate::components::label_components;
use crate::raster::{GrayImage, Raster};

use super::{Polarity, ThresholdError};

/// Row-major glyph membership; `true` is letter.
pub type BinaryMask = Raster<bool>;

impl BinaryMask {
    /// Two-level image: 255 for foreground, 0 for background.
    pub fn to_image(&self) -> GrayImage {
        self.map(|&b| if b { 255 } else { 0 })
    }

    pub fn count(&self) -> usize {
        self.pixels().iter().filter(|&&b| b).count()
    }
}

/// Foreground after primary thresholding: `>= t` for bright text, `< t` for
/// dark text. Only the largest 8-connected component is kept.
pub fn letter_mask(
    crop: &GrayImage,
    t: f64,
    polarity: Polarity,
) -> Result<BinaryMask, ThresholdError> {
    let raw: Vec<bool> = crop
        .pixels()
        .iter()
        .map(|&p| match polarity {
            Polarity::TextBright => p as f64 >= t,
            Polarity::TextDark => (p as f64) < t,
        })
        .collect();
    let labeling = label_components(crop.width(), crop.height(), &raw);
    let largest = labeling.largest().ok_or(ThresholdError::EmptyMask)?;
    Ok(
        BinaryMask::from_pixels(crop.width(), crop.height(), labeling.mask_of(largest.label))
            .expect("same dimensions as crop"),
    )
}
