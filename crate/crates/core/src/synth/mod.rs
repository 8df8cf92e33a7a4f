//! Synthetic text images with exact ground truth, plus seeded degradations.

mod corpus;
mod degrade;
pub mod font;

use std::path::PathBuf;

use thiserror::Error;

use crate::raster::{BoundingBox, GrayImage, RasterError};
use crate::threshold::BinaryMask;

pub use corpus::{
    generate_sample, load_corpus, make_corpus, CorpusEntry, CorpusManifest, CorpusRanges,
    ManifestSample, Range, Sample, TruthFile, MANIFEST_NAME, PRNG_ID,
};
pub use degrade::{box_blur3, degrade, DegradationSpec};

/// Minimum |fill - background| the generator accepts.
pub const MIN_CONTRAST: u8 = 30;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("text is empty")]
    EmptyText,
    #[error("glyph {0:?} is not in the built-in font")]
    UnsupportedGlyph(char),
    #[error("contrast |{fill} - {background}| is below {MIN_CONTRAST}")]
    LowContrast { fill: u8, background: u8 },
    #[error("scale must be at least 1")]
    InvalidScale,
    #[error("invalid degradation: {0}")]
    InvalidDegradation(String),
    #[error("invalid parameter ranges: {0}")]
    InvalidRanges(String),
    #[error("corpus size must be at least 1")]
    EmptyCorpus,
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus file {path} is malformed: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error(transparent)]
    Raster(#[from] RasterError),
}

impl SynthError {
    pub fn name(&self) -> &'static str {
        match self {
            SynthError::EmptyText => "EmptyText",
            SynthError::UnsupportedGlyph(_) => "UnsupportedGlyph",
            SynthError::LowContrast { .. } => "LowContrast",
            SynthError::InvalidScale => "InvalidScale",
            SynthError::InvalidDegradation(_) => "InvalidDegradation",
            SynthError::InvalidRanges(_) => "InvalidRanges",
            SynthError::EmptyCorpus => "EmptyCorpus",
            SynthError::Io { .. } => "IoError",
            SynthError::Corrupt { .. } => "CorruptCorpus",
            SynthError::Raster(e) => e.name(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlyphSpec {
    pub text: String,
    pub scale: u32,
    pub fill: u8,
    pub background: u8,
    pub margin: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    pub transcript: String,
    /// True exactly where glyph pixels were painted.
    pub glyph_mask: BinaryMask,
    pub fill: u8,
    /// Tight box per inked glyph, in text order. Spaces have none.
    pub boxes: Vec<BoundingBox>,
}

/// Paints `spec.text` in one line. Each font cell is `5*scale` x `7*scale`,
/// cells are separated by `scale` blank columns, and `margin` pixels of
/// background surround the line.
pub fn render(spec: &GlyphSpec) -> Result<(GrayImage, GroundTruth), SynthError> {
    if spec.text.is_empty() {
        return Err(SynthError::EmptyText);
    }
    if spec.scale == 0 {
        return Err(SynthError::InvalidScale);
    }
    if spec.fill.abs_diff(spec.background) < MIN_CONTRAST {
        return Err(SynthError::LowContrast {
            fill: spec.fill,
            background: spec.background,
        });
    }
    let bitmaps = spec
        .text
        .chars()
        .map(|c| font::glyph(c).ok_or(SynthError::UnsupportedGlyph(c)))
        .collect::<Result<Vec<_>, _>>()?;

    let s = spec.scale;
    let n = bitmaps.len() as u32;
    let cell_w = font::GLYPH_WIDTH * s;
    let width = 2 * spec.margin + n * cell_w + (n - 1) * s;
    let height = 2 * spec.margin + font::GLYPH_HEIGHT * s;

    let mut mask = BinaryMask::filled(width, height, false);
    let mut boxes = Vec::new();
    for (i, bitmap) in bitmaps.iter().enumerate() {
        let x0 = spec.margin + i as u32 * (cell_w + s);
        let y0 = spec.margin;
        let mut extent: Option<(u32, u32, u32, u32)> = None;
        for gy in 0..font::GLYPH_HEIGHT {
            for gx in 0..font::GLYPH_WIDTH {
                if !font::ink(bitmap, gx, gy) {
                    continue;
                }
                let (px, py) = (x0 + gx * s, y0 + gy * s);
                for dy in 0..s {
                    for dx in 0..s {
                        mask.set(px + dx, py + dy, true);
                    }
                }
                let (r, b) = (px + s - 1, py + s - 1);
                extent = Some(match extent {
                    None => (px, py, r, b),
                    Some((l, t, rr, bb)) => (l.min(px), t.min(py), rr.max(r), bb.max(b)),
                });
            }
        }
        if let Some((l, t, r, b)) = extent {
            boxes.push(BoundingBox::new(l, t, r - l + 1, b - t + 1));
        }
    }

    let img = mask.map(|&m| if m { spec.fill } else { spec.background });
    Ok((
        img,
        GroundTruth {
            transcript: spec.text.clone(),
            glyph_mask: mask,
            fill: spec.fill,
            boxes,
        },
    ))
}
