//! Raster types and the basic image plumbing: decode/encode, luma conversion,
//! cropping, nearest-neighbor magnification and intensity statistics.
//!
//! Intensities follow the usual convention: 0 is black, 255 is white.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("cannot encode {path}: {message}")]
    Encode { path: PathBuf, message: String },
    #[error("box {bbox:?} exceeds image extent {width}x{height}")]
    OutOfBounds {
        bbox: BoundingBox,
        width: u32,
        height: u32,
    },
    #[error("box {0:?} has zero width or height")]
    EmptyBox(BoundingBox),
    #[error("magnification factor must be at least 1, got {0}")]
    InvalidFactor(u32),
    #[error("image has no pixels")]
    EmptyImage,
    #[error("pixel buffer of length {len} does not match {width}x{height}")]
    DimensionMismatch { width: u32, height: u32, len: usize },
}

impl RasterError {
    /// Stable, greppable name of the error kind.
    pub fn name(&self) -> &'static str {
        match self {
            RasterError::Io { .. } => "IoError",
            RasterError::Decode { .. } => "DecodeError",
            RasterError::Encode { .. } => "EncodeError",
            RasterError::OutOfBounds { .. } => "OutOfBounds",
            RasterError::EmptyBox(_) => "EmptyBox",
            RasterError::InvalidFactor(_) => "InvalidFactor",
            RasterError::EmptyImage => "EmptyImage",
            RasterError::DimensionMismatch { .. } => "DimensionMismatch",
        }
    }
}

pub type Result<T, E = RasterError> = std::result::Result<T, E>;

/// Axis-aligned pixel rectangle. `left`/`top` are inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundingBox {
    pub left: u32,
    pub top: u32,
    pub width: u32,
    pub height: u32,
}

impl BoundingBox {
    pub fn new(left: u32, top: u32, width: u32, height: u32) -> Self {
        BoundingBox {
            left,
            top,
            width,
            height,
        }
    }

    pub fn area(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    pub fn right(&self) -> u64 {
        self.left as u64 + self.width as u64
    }

    pub fn bottom(&self) -> u64 {
        self.top as u64 + self.height as u64
    }

    /// Checks the box is non-empty and lies inside a `width` x `height` image.
    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(RasterError::EmptyBox(*self));
        }
        if self.right() > width as u64 || self.bottom() > height as u64 {
            return Err(RasterError::OutOfBounds {
                bbox: *self,
                width,
                height,
            });
        }
        Ok(())
    }

    /// Grows the box by `margin` pixels on every side, clipped to the image.
    pub fn expand(&self, margin: u32, width: u32, height: u32) -> BoundingBox {
        let left = self.left.saturating_sub(margin);
        let top = self.top.saturating_sub(margin);
        let right = (self.right() + margin as u64).min(width as u64) as u32;
        let bottom = (self.bottom() + margin as u64).min(height as u64) as u32;
        BoundingBox::new(left, top, right - left, bottom - top)
    }
}

/// Row-major raster generic over the pixel type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Raster<P> {
    width: u32,
    height: u32,
    pixels: Vec<P>,
}

pub type GrayImage = Raster<u8>;
pub type RgbImage = Raster<[u8; 3]>;

impl<P: Copy> Raster<P> {
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<P>) -> Result<Self> {
        if pixels.len() != width as usize * height as usize {
            return Err(RasterError::DimensionMismatch {
                width,
                height,
                len: pixels.len(),
            });
        }
        Ok(Raster {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, value: P) -> Self {
        Raster {
            width,
            height,
            pixels: vec![value; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> P) -> Self {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Raster {
            width,
            height,
            pixels,
        }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[P] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [P] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<P> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> P {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: P) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = value;
    }

    pub fn map<Q>(&self, f: impl FnMut(&P) -> Q) -> Raster<Q> {
        Raster {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(f).collect(),
        }
    }

    pub fn full_box(&self) -> BoundingBox {
        BoundingBox::new(0, 0, self.width, self.height)
    }

    /// Copies the region under `bbox` into a new raster.
    pub fn crop(&self, bbox: &BoundingBox) -> Result<Self> {
        bbox.validate(self.width, self.height)?;
        let w = self.width as usize;
        let mut pixels = Vec::with_capacity(bbox.area() as usize);
        for y in bbox.top..bbox.top + bbox.height {
            let start = y as usize * w + bbox.left as usize;
            pixels.extend_from_slice(&self.pixels[start..start + bbox.width as usize]);
        }
        Ok(Raster {
            width: bbox.width,
            height: bbox.height,
            pixels,
        })
    }

    /// Nearest-neighbor upscale: each pixel becomes a `factor` x `factor` block.
    pub fn magnify(&self, factor: u32) -> Result<Self> {
        if factor < 1 {
            return Err(RasterError::InvalidFactor(factor));
        }
        let (w, h) = (self.width * factor, self.height * factor);
        Ok(Raster::from_fn(w, h, |x, y| {
            self.get(x / factor, y / factor)
        }))
    }
}

impl GrayImage {
    /// Exact mean of all pixel values.
    pub fn mean_intensity(&self) -> Result<f64> {
        if self.pixels.is_empty() {
            return Err(RasterError::EmptyImage);
        }
        let sum: u64 = self.pixels.iter().map(|&p| p as u64).sum();
        Ok(sum as f64 / self.pixels.len() as f64)
    }

    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &p in &self.pixels {
            hist[p as usize] += 1;
        }
        hist
    }

    pub fn invert(&self) -> GrayImage {
        self.map(|&p| 255 - p)
    }

    pub fn to_rgb(&self) -> RgbImage {
        self.map(|&p| [p, p, p])
    }
}

impl RgbImage {
    pub fn to_grayscale(&self) -> GrayImage {
        self.map(|&[r, g, b]| luma(r, g, b))
    }
}

/// BT.601 luma, round-half-up, in exact integer arithmetic.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((weighted + 500) / 1000).min(255) as u8
}

pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    img.to_grayscale()
}

fn io_err(path: &Path, source: io::Error) -> RasterError {
    RasterError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Decodes a PNG, JPEG or binary PPM/PGM file. Single-channel sources are
/// replicated into all three channels.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let decoded = image::load_from_memory(&bytes).map_err(|e| RasterError::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = rgb.dimensions();
    let pixels = rgb.pixels().map(|p| p.0).collect();
    RgbImage::from_pixels(w, h, pixels)
}

pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    Ok(load_image(path)?.to_grayscale())
}

fn output_format(path: &Path) -> ImageFormat {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("pgm") | Some("ppm") | Some("pnm") => ImageFormat::Pnm,
        _ => ImageFormat::Png,
    }
}

fn write_dynamic(img: DynamicImage, path: &Path) -> Result<()> {
    let format = output_format(path);
    let mut buf = io::Cursor::new(Vec::new());
    match format {
        ImageFormat::Pnm => {
            use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
            use image::ImageEncoder;
            let subtype = match &img {
                DynamicImage::ImageLuma8(_) => PnmSubtype::Graymap(SampleEncoding::Binary),
                _ => PnmSubtype::Pixmap(SampleEncoding::Binary),
            };
            PnmEncoder::new(&mut buf).with_subtype(subtype).write_image(
                img.as_bytes(),
                img.width(),
                img.height(),
                img.color().into(),
            )
        }
        _ => img.write_to(&mut buf, format),
    }
    .map_err(|e| RasterError::Encode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    fs::write(path, buf.into_inner()).map_err(|e| io_err(path, e))
}

/// Writes a single-channel image; `.pgm` selects binary PGM, anything else PNG.
pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let buf = image::GrayImage::from_raw(img.width(), img.height(), img.pixels().to_vec())
        .expect("raster invariant: buffer matches dimensions");
    write_dynamic(DynamicImage::ImageLuma8(buf), path.as_ref())
}

/// Writes an RGB image; `.ppm` selects binary PPM, anything else PNG.
pub fn save_rgb(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let flat = img.pixels().iter().flatten().copied().collect();
    let buf = image::RgbImage::from_raw(img.width(), img.height(), flat)
        .expect("raster invariant: buffer matches dimensions");
    write_dynamic(DynamicImage::ImageRgb8(buf), path.as_ref())
}
