//! Glyph fill-intensity estimation and the global threshold derived from it.
//!
//! Per letter: crop, mean intensity `m`, primary threshold `t_p = m + delta`,
//! polarity from the crop border, the largest glyph component above (or below)
//! `t_p`, its exact distance map, and the median intensity over the pixels
//! deepest inside the glyph. That fill intensity, pulled toward the background
//! by `offset`, is the threshold applied to the whole image.

mod contour;
mod distance;
mod mask;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::letterloc::{select_letter, LetterBox, LetterError, SelectionPolicy};
use crate::raster::{BoundingBox, GrayImage, RasterError};

pub use contour::{trace_contour, Contour};
pub use distance::{distance_map, DistanceMap};
pub use mask::{letter_mask, BinaryMask};

pub const DEFAULT_PRIMARY_DELTA: u32 = 5;
pub const DEFAULT_OFFSET: u32 = 20;
pub const DEFAULT_BOX_MARGIN: u32 = 1;

#[derive(Debug, Error)]
pub enum ThresholdError {
    #[error("no foreground pixel survives primary thresholding")]
    EmptyMask,
    #[error("letter mask has no interior pixel")]
    NoInterior,
    #[error("crop is {crop:?} but distance map is {map:?}")]
    DimensionMismatch { crop: (u32, u32), map: (u32, u32) },
    #[error(transparent)]
    Candidates(#[from] LetterError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("letter at {bbox:?}: {source}")]
    Letter {
        bbox: BoundingBox,
        #[source]
        source: Box<ThresholdError>,
    },
}

impl ThresholdError {
    pub fn name(&self) -> &'static str {
        match self {
            ThresholdError::EmptyMask => "EmptyMask",
            ThresholdError::NoInterior => "NoInterior",
            ThresholdError::DimensionMismatch { .. } => "DimensionMismatch",
            ThresholdError::Candidates(e) => e.name(),
            ThresholdError::Raster(e) => e.name(),
            ThresholdError::Letter { source, .. } => source.name(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    TextBright,
    TextDark,
}

impl Polarity {
    pub fn flipped(self) -> Polarity {
        match self {
            Polarity::TextBright => Polarity::TextDark,
            Polarity::TextDark => Polarity::TextBright,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::TextBright => "text-bright",
            Polarity::TextDark => "text-dark",
        })
    }
}

/// Pixels below `t` become 0; the rest keep their value.
pub fn primary_threshold(img: &GrayImage, t: f64) -> GrayImage {
    img.map(|&p| if (p as f64) < t { 0 } else { p })
}

/// Letter polarity from the crop's border pixels. Background dominates the
/// border of a letter box, so the letter is the minority class; equal counts
/// resolve to dark text.
pub fn detect_polarity(crop: &GrayImage, t: f64) -> Polarity {
    let (w, h) = (crop.width(), crop.height());
    let mut bright = 0usize;
    let mut dark = 0usize;
    for y in 0..h {
        for x in 0..w {
            if x != 0 && y != 0 && x != w - 1 && y != h - 1 {
                continue;
            }
            if crop.get(x, y) as f64 >= t {
                bright += 1;
            } else {
                dark += 1;
            }
        }
    }
    if bright < dark {
        Polarity::TextBright
    } else {
        Polarity::TextDark
    }
}

/// Result of sampling the glyph at its deepest interior pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FillEstimate {
    pub intensity: u8,
    pub argmax_distance: f64,
    pub argmax_pixel_count: u64,
}

/// Median crop intensity over the pixels at maximal distance from the glyph
/// boundary. For an even count the median leans toward the background side:
/// the lower middle value for bright text, the upper one for dark text.
pub fn fill_intensity(
    crop: &GrayImage,
    dmap: &DistanceMap,
    polarity: Polarity,
) -> Result<FillEstimate, ThresholdError> {
    if (crop.width(), crop.height()) != (dmap.width(), dmap.height()) {
        return Err(ThresholdError::DimensionMismatch {
            crop: (crop.width(), crop.height()),
            map: (dmap.width(), dmap.height()),
        });
    }
    let max = dmap.max_squared();
    if max == 0 {
        return Err(ThresholdError::NoInterior);
    }
    let mut values: Vec<u8> = dmap
        .squared()
        .iter()
        .zip(crop.pixels())
        .filter(|(&d, _)| d == max)
        .map(|(_, &p)| p)
        .collect();
    values.sort_unstable();
    let n = values.len();
    let intensity = match polarity {
        Polarity::TextBright => values[(n - 1) / 2],
        Polarity::TextDark => values[n / 2],
    };
    Ok(FillEstimate {
        intensity,
        argmax_distance: (max as f64).sqrt(),
        argmax_pixel_count: n as u64,
    })
}

/// Moves the fill intensity toward the background by `offset`, clamped to [0, 255].
pub fn final_threshold(fill: u8, offset: u32, polarity: Polarity) -> u8 {
    let fill = fill as i64;
    let offset = offset as i64;
    let t = match polarity {
        Polarity::TextBright => fill - offset,
        Polarity::TextDark => fill + offset,
    };
    t.clamp(0, 255) as u8
}

/// Two-level output. Bright text: 255 where `img >= t`. Dark text: 0 where
/// `img <= t`. Text keeps its side of the intensity scale.
pub fn apply_global_threshold(img: &GrayImage, t: u8, polarity: Polarity) -> GrayImage {
    match polarity {
        Polarity::TextBright => img.map(|&p| if p >= t { 255 } else { 0 }),
        Polarity::TextDark => img.map(|&p| if p <= t { 0 } else { 255 }),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// One letter chosen by the selection policy.
    #[default]
    Single,
    /// Median of the per-letter fill intensities over all boxes.
    Median,
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Single => "single",
            Aggregation::Median => "median",
        })
    }
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(Aggregation::Single),
            "median" => Ok(Aggregation::Median),
            _ => Err(format!("expected single or median, got {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EstimateParams {
    /// Added to the crop mean to form the primary threshold.
    pub primary_delta: u32,
    /// Distance from the fill intensity to the final threshold.
    pub offset: u32,
    pub policy: SelectionPolicy,
    pub aggregation: Aggregation,
    /// Context pixels added around each letter box before cropping.
    pub box_margin: u32,
}

impl Default for EstimateParams {
    fn default() -> Self {
        EstimateParams {
            primary_delta: DEFAULT_PRIMARY_DELTA,
            offset: DEFAULT_OFFSET,
            policy: SelectionPolicy::default(),
            aggregation: Aggregation::default(),
            box_margin: DEFAULT_BOX_MARGIN,
        }
    }
}

/// Every scalar of the estimate, serialized with stable key names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub mean_intensity: f64,
    pub primary_delta: u32,
    pub primary_threshold: f64,
    pub fill_intensity: u8,
    pub offset: u32,
    pub final_threshold: u8,
    pub polarity: Polarity,
    pub argmax_distance: f64,
    pub argmax_pixel_count: u64,
}

/// Intermediate state for one letter box.
#[derive(Clone, Debug)]
pub struct LetterEstimate {
    /// The box as supplied.
    pub letter: BoundingBox,
    /// The region actually cropped (letter box plus margin, clipped).
    pub crop_box: BoundingBox,
    pub mean_intensity: f64,
    pub primary_threshold: f64,
    pub polarity: Polarity,
    pub mask: BinaryMask,
    pub fill: FillEstimate,
}

pub fn estimate_letter(
    img: &GrayImage,
    letter: BoundingBox,
    params: &EstimateParams,
) -> Result<LetterEstimate, ThresholdError> {
    let run = || -> Result<LetterEstimate, ThresholdError> {
        letter.validate(img.width(), img.height())?;
        let crop_box = letter.expand(params.box_margin, img.width(), img.height());
        let crop = img.crop(&crop_box)?;
        let mean_intensity = crop.mean_intensity()?;
        let t = mean_intensity + params.primary_delta as f64;
        let polarity = detect_polarity(&crop, t);
        let mask = letter_mask(&crop, t, polarity)?;
        let dmap = distance_map(&mask);
        let fill = fill_intensity(&crop, &dmap, polarity)?;
        Ok(LetterEstimate {
            letter,
            crop_box,
            mean_intensity,
            primary_threshold: t,
            polarity,
            mask,
            fill,
        })
    };
    run().map_err(|e| ThresholdError::Letter {
        bbox: letter,
        source: Box::new(e),
    })
}

fn report_from(est: &LetterEstimate, fill: u8, params: &EstimateParams) -> ThresholdReport {
    ThresholdReport {
        mean_intensity: est.mean_intensity,
        primary_delta: params.primary_delta,
        primary_threshold: est.primary_threshold,
        fill_intensity: fill,
        offset: params.offset,
        final_threshold: final_threshold(fill, params.offset, est.polarity),
        polarity: est.polarity,
        argmax_distance: est.fill.argmax_distance,
        argmax_pixel_count: est.fill.argmax_pixel_count,
    }
}

/// Runs the per-letter estimate over the selected boxes and derives the final
/// threshold.
///
/// With [`Aggregation::Median`] every box is estimated (in parallel) and the
/// letters of the majority polarity vote: the median fill intensity wins and
/// the remaining report fields come from the letter that supplied it. Results
/// are ordered by box position before aggregating, so the outcome does not
/// depend on scheduling.
pub fn estimate_threshold(
    img: &GrayImage,
    boxes: &[LetterBox],
    params: &EstimateParams,
) -> Result<ThresholdReport, ThresholdError> {
    if boxes.is_empty() {
        return Err(LetterError::NoCandidates.into());
    }
    match params.aggregation {
        Aggregation::Single => {
            let chosen = select_letter(boxes, params.policy)?;
            let est = estimate_letter(img, chosen.bbox, params)?;
            Ok(report_from(&est, est.fill.intensity, params))
        }
        Aggregation::Median => {
            let mut order: Vec<BoundingBox> = boxes.iter().map(|b| b.bbox).collect();
            order.sort_by_key(|b| (b.top, b.left, b.width, b.height));
            let estimates = order
                .par_iter()
                .map(|&b| estimate_letter(img, b, params))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(aggregate(&estimates, params))
        }
    }
}

fn aggregate(estimates: &[LetterEstimate], params: &EstimateParams) -> ThresholdReport {
    let bright = estimates
        .iter()
        .filter(|e| e.polarity == Polarity::TextBright)
        .count();
    let polarity = if bright > estimates.len() - bright {
        Polarity::TextBright
    } else {
        Polarity::TextDark
    };
    let mut voters: Vec<&LetterEstimate> = estimates
        .iter()
        .filter(|e| e.polarity == polarity)
        .collect();
    // stable: equal fills keep position order
    voters.sort_by_key(|e| e.fill.intensity);
    let n = voters.len();
    let pick = match polarity {
        Polarity::TextBright => voters[(n - 1) / 2],
        Polarity::TextDark => voters[n / 2],
    };
    report_from(pick, pick.fill.intensity, params)
}

/// Estimates the threshold and applies it to the whole image.
pub fn binarize(
    img: &GrayImage,
    boxes: &[LetterBox],
    params: &EstimateParams,
) -> Result<(ThresholdReport, GrayImage), ThresholdError> {
    let report = estimate_threshold(img, boxes, params)?;
    let out = apply_global_threshold(img, report.final_threshold, report.polarity);
    Ok((report, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::letterloc::BoxSource;

    fn gray(w: u32, h: u32, px: &[u8]) -> GrayImage {
        GrayImage::from_pixels(w, h, px.to_vec()).unwrap()
    }

    #[test]
    fn primary_threshold_rules() {
        let img = gray(3, 1, &[100, 233, 184]);
        assert_eq!(primary_threshold(&img, 184.0).pixels(), &[0, 233, 184]);
        let flat = GrayImage::filled(4, 4, 50);
        assert_eq!(primary_threshold(&flat, 49.0), flat);
    }

    #[test]
    fn polarity_rules() {
        let bright_glyph = GrayImage::from_fn(5, 5, |x, y| {
            if (1..4).contains(&x) && (1..4).contains(&y) {
                233
            } else {
                40
            }
        });
        assert_eq!(detect_polarity(&bright_glyph, 120.0), Polarity::TextBright);
        assert_eq!(
            detect_polarity(&bright_glyph.invert(), 120.0),
            Polarity::TextDark
        );
        // half the border on each side of t
        let split = GrayImage::from_fn(4, 4, |x, _| if x < 2 { 0 } else { 255 });
        assert_eq!(detect_polarity(&split, 128.0), Polarity::TextDark);
    }

    fn dmap_with_argmax(n: usize) -> (DistanceMap, Vec<usize>) {
        // isolated single pixels all have distance 1
        let w = 2 * n as u32 + 1;
        let mask = BinaryMask::from_fn(w, 1, |x, _| x % 2 == 1);
        let idx = (0..n).map(|i| 2 * i + 1).collect();
        (distance_map(&mask), idx)
    }

    #[test]
    fn fill_median_rules() {
        let (d, idx) = dmap_with_argmax(3);
        let mut px = vec![0u8; d.width() as usize];
        for (&i, v) in idx.iter().zip([230, 233, 233]) {
            px[i] = v;
        }
        let crop = gray(d.width(), 1, &px);
        let f = fill_intensity(&crop, &d, Polarity::TextBright).unwrap();
        assert_eq!(f.intensity, 233);
        assert_eq!(f.argmax_pixel_count, 3);

        let (d, idx) = dmap_with_argmax(2);
        let mut px = vec![0u8; d.width() as usize];
        for (&i, v) in idx.iter().zip([230, 210]) {
            px[i] = v;
        }
        let crop = gray(d.width(), 1, &px);
        assert_eq!(
            fill_intensity(&crop, &d, Polarity::TextBright)
                .unwrap()
                .intensity,
            210
        );
        assert_eq!(
            fill_intensity(&crop, &d, Polarity::TextDark)
                .unwrap()
                .intensity,
            230
        );
    }

    #[test]
    fn fill_uniform_glyph_center() {
        let crop = GrayImage::from_fn(7, 7, |x, y| {
            if (1..6).contains(&x) && (1..6).contains(&y) {
                233
            } else {
                30
            }
        });
        let mask = letter_mask(&crop, 150.0, Polarity::TextBright).unwrap();
        let f = fill_intensity(&crop, &distance_map(&mask), Polarity::TextBright).unwrap();
        assert_eq!(f.intensity, 233);
        assert_eq!(f.argmax_pixel_count, 1);
        assert_eq!(f.argmax_distance, 3.0);
    }

    #[test]
    fn fill_errors() {
        let crop = GrayImage::filled(3, 3, 9);
        let d = distance_map(&BinaryMask::filled(3, 3, false));
        assert!(matches!(
            fill_intensity(&crop, &d, Polarity::TextBright),
            Err(ThresholdError::NoInterior)
        ));
        let d = distance_map(&BinaryMask::filled(2, 3, true));
        assert!(matches!(
            fill_intensity(&crop, &d, Polarity::TextBright),
            Err(ThresholdError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn final_threshold_rules() {
        assert_eq!(final_threshold(233, 20, Polarity::TextBright), 213);
        assert_eq!(final_threshold(233, 0, Polarity::TextBright), 233);
        assert_eq!(final_threshold(10, 20, Polarity::TextBright), 0);
        assert_eq!(final_threshold(250, 20, Polarity::TextDark), 255);
        assert_eq!(final_threshold(40, 20, Polarity::TextDark), 60);
    }

    #[test]
    fn global_threshold_rules() {
        let img = gray(3, 1, &[184, 213, 233]);
        assert_eq!(
            apply_global_threshold(&img, 213, Polarity::TextBright).pixels(),
            &[0, 255, 255]
        );
        assert_eq!(
            apply_global_threshold(&img, 0, Polarity::TextBright).pixels(),
            &[255, 255, 255]
        );
        let img = gray(3, 1, &[0, 254, 255]);
        assert_eq!(
            apply_global_threshold(&img, 255, Polarity::TextBright).pixels(),
            &[0, 0, 255]
        );
        assert_eq!(
            apply_global_threshold(&img, 0, Polarity::TextDark).pixels(),
            &[0, 255, 255]
        );
    }

    fn glyph_image(fills: &[u8]) -> (GrayImage, Vec<LetterBox>) {
        // 5x5 solid squares, 4 px apart, on a background of 40
        let w = 4 + fills.len() as u32 * 9;
        let img = GrayImage::from_fn(w, 13, |x, y| {
            if !(4..9).contains(&y) || x < 4 {
                return 40;
            }
            let i = ((x - 4) / 9) as usize;
            if (x - 4) % 9 < 5 && i < fills.len() {
                fills[i]
            } else {
                40
            }
        });
        let boxes = (0..fills.len() as u32)
            .map(|i| LetterBox {
                bbox: BoundingBox::new(4 + 9 * i, 4, 5, 5),
                confidence: None,
                glyph: None,
                source: BoxSource::ConnectedComponent,
            })
            .collect();
        (img, boxes)
    }

    #[test]
    fn estimate_median_of_letters() {
        let (img, boxes) = glyph_image(&[240, 230, 233]);
        let params = EstimateParams {
            aggregation: Aggregation::Median,
            ..Default::default()
        };
        let r = estimate_threshold(&img, &boxes, &params).unwrap();
        assert_eq!(r.fill_intensity, 233);
        assert_eq!(r.final_threshold, 213);
        assert_eq!(r.polarity, Polarity::TextBright);
    }

    #[test]
    fn estimate_single_and_errors() {
        let (img, boxes) = glyph_image(&[233]);
        let r = estimate_threshold(&img, &boxes, &EstimateParams::default()).unwrap();
        assert_eq!((r.fill_intensity, r.final_threshold), (233, 213));
        assert_eq!(r.argmax_pixel_count, 1);
        assert_eq!(r.argmax_distance, 3.0);
        assert_eq!(r.primary_threshold, r.mean_intensity + 5.0);

        let err = estimate_threshold(&img, &[], &EstimateParams::default()).unwrap_err();
        assert_eq!(err.name(), "NoCandidates");

        let mut far = boxes.clone();
        far[0].bbox = BoundingBox::new(100, 0, 3, 3);
        let err = estimate_threshold(&img, &far, &EstimateParams::default()).unwrap_err();
        assert_eq!(err.name(), "OutOfBounds");
        assert!(err.to_string().contains("left: 100"));
    }

    #[test]
    fn report_json_keys() {
        let (img, boxes) = glyph_image(&[233]);
        let r = estimate_threshold(&img, &boxes, &EstimateParams::default()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "argmax_distance",
                "argmax_pixel_count",
                "fill_intensity",
                "final_threshold",
                "mean_intensity",
                "offset",
                "polarity",
                "primary_delta",
                "primary_threshold"
            ]
        );
        assert_eq!(v["polarity"], "text-bright");
    }
}
