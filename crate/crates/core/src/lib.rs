//! Adaptive binarization for OCR driven by the fill intensity of text glyphs.
//!
//! A letter is located (from an OCR engine's box output or by connected
//! components), cropped and primary-thresholded at its mean plus a small delta.
//! The intensity at the pixels farthest from the glyph boundary is taken as the
//! glyph's fill; the whole image is then thresholded just below (or above, for
//! dark text) that fill.
//!
//! ```
//! use textthresh::raster::{BoundingBox, GrayImage};
//! use textthresh::letterloc::{LetterBox, BoxSource};
//! use textthresh::threshold::{binarize, EstimateParams};
//!
//! // a bright 5x5 glyph of 233 on a background of 40
//! let img = GrayImage::from_fn(11, 11, |x, y| {
//!     if (3..8).contains(&x) && (3..8).contains(&y) { 233 } else { 40 }
//! });
//! let boxes = [LetterBox {
//!     bbox: BoundingBox::new(3, 3, 5, 5),
//!     confidence: None,
//!     glyph: None,
//!     source: BoxSource::ConnectedComponent,
//! }];
//! let (report, binary) = binarize(&img, &boxes, &EstimateParams::default()).unwrap();
//! assert_eq!(report.fill_intensity, 233);
//! assert_eq!(report.final_threshold, 213);
//! assert_eq!(binary.get(5, 5), 255);
//! ```

pub mod components;
pub mod letterloc;
pub mod ocr;
pub mod raster;
pub mod synth;
pub mod threshold;

pub use letterloc::{LetterBox, SelectionPolicy};
pub use raster::{BoundingBox, GrayImage, RgbImage};
pub use threshold::{EstimateParams, Polarity, ThresholdReport};
