//! Candidate letter boxes: ingested from an OCR engine's TSV box output, or
//! detected with an Otsu + connected-component fallback.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::components::label_components;
use crate::raster::{BoundingBox, GrayImage};

#[derive(Debug, Error, PartialEq)]
pub enum LetterError {
    #[error("malformed TSV at line {line}: {message}")]
    MalformedTsv { line: usize, message: String },
    #[error("image has no pixels")]
    EmptyImage,
    #[error("invalid area range [{min}, {max}]")]
    InvalidAreaRange { min: u64, max: u64 },
    #[error("no candidate letter boxes")]
    NoCandidates,
    #[error("candidate index {index} out of range ({count} candidates)")]
    IndexOutOfRange { index: usize, count: usize },
}

impl LetterError {
    pub fn name(&self) -> &'static str {
        match self {
            LetterError::MalformedTsv { .. } => "MalformedTsv",
            LetterError::EmptyImage => "EmptyImage",
            LetterError::InvalidAreaRange { .. } => "InvalidAreaRange",
            LetterError::NoCandidates => "NoCandidates",
            LetterError::IndexOutOfRange { .. } => "IndexOutOfRange",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoxSource {
    ExternalOcr,
    ConnectedComponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LetterBox {
    pub bbox: BoundingBox,
    /// Engine confidence in [0, 100], if the source provides one.
    pub confidence: Option<f64>,
    pub glyph: Option<String>,
    pub source: BoxSource,
}

impl LetterBox {
    fn order_key(&self) -> (u32, u32, u32, u32) {
        let b = &self.bbox;
        (b.top, b.left, b.width, b.height)
    }
}

/// How to pick the single letter used for fill-intensity estimation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SelectionPolicy {
    #[default]
    LargestArea,
    HighestConfidence,
    Index(usize),
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionPolicy::LargestArea => f.write_str("largest-area"),
            SelectionPolicy::HighestConfidence => f.write_str("highest-confidence"),
            SelectionPolicy::Index(n) => write!(f, "index:{n}"),
        }
    }
}

impl FromStr for SelectionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "largest-area" => Ok(SelectionPolicy::LargestArea),
            "highest-confidence" => Ok(SelectionPolicy::HighestConfidence),
            _ => s
                .strip_prefix("index:")
                .and_then(|n| n.parse().ok())
                .map(SelectionPolicy::Index)
                .ok_or_else(|| {
                    format!("expected largest-area, highest-confidence or index:N, got {s:?}")
                }),
        }
    }
}

const REQUIRED_COLUMNS: [&str; 6] = ["left", "top", "width", "height", "conf", "text"];

/// Parses the tab-separated box output of an OCR engine.
///
/// Columns are located by header name, so the usual 12-column layout
/// (`level page_num block_num par_num line_num word_num left top width height conf text`)
/// and any reordering of it are accepted. Rows with negative confidence or blank
/// text are skipped, as are zero-sized boxes.
pub fn parse_ocr_tsv(text: &str) -> Result<Vec<LetterBox>, LetterError> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l,
            None => return Ok(Vec::new()),
        }
    };
    let names: Vec<&str> = header.split('\t').map(str::trim).collect();
    let mut idx = [0usize; 6];
    for (slot, col) in idx.iter_mut().zip(REQUIRED_COLUMNS) {
        *slot = names
            .iter()
            .position(|n| *n == col)
            .ok_or_else(|| LetterError::MalformedTsv {
                line: 1,
                message: format!("missing column {col:?}"),
            })?;
    }
    let [left_i, top_i, width_i, height_i, conf_i, text_i] = idx;

    let mut out = Vec::new();
    for (n, raw) in lines {
        let line = n + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let field = |i: usize| fields.get(i).copied().unwrap_or("");
        let number = |i: usize, what: &str| -> Result<u32, LetterError> {
            field(i)
                .trim()
                .parse()
                .map_err(|_| LetterError::MalformedTsv {
                    line,
                    message: format!("{what} is not a non-negative integer: {:?}", field(i)),
                })
        };
        let left = number(left_i, "left")?;
        let top = number(top_i, "top")?;
        let width = number(width_i, "width")?;
        let height = number(height_i, "height")?;
        let conf: f64 = field(conf_i)
            .trim()
            .parse()
            .ok()
            .filter(|c: &f64| c.is_finite())
            .ok_or_else(|| LetterError::MalformedTsv {
                line,
                message: format!("conf is not a number: {:?}", field(conf_i)),
            })?;
        let glyph = field(text_i).trim();
        if conf < 0.0 || glyph.is_empty() || width == 0 || height == 0 {
            continue;
        }
        if conf > 100.0 {
            return Err(LetterError::MalformedTsv {
                line,
                message: format!("conf {conf} exceeds 100"),
            });
        }
        out.push(LetterBox {
            bbox: BoundingBox::new(left, top, width, height),
            confidence: Some(conf),
            glyph: Some(glyph.to_string()),
            source: BoxSource::ExternalOcr,
        });
    }
    Ok(out)
}

/// Renders boxes as a debugging TSV (`left top width height conf text source`),
/// which [`parse_ocr_tsv`] can read back.
pub fn boxes_to_tsv(boxes: &[LetterBox]) -> String {
    let mut s = String::from("left\ttop\twidth\theight\tconf\ttext\tsource\n");
    for b in boxes {
        let conf = b.confidence.map(|c| c.to_string()).unwrap_or_default();
        let source = match b.source {
            BoxSource::ExternalOcr => "external-ocr",
            BoxSource::ConnectedComponent => "connected-component",
        };
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            b.bbox.left,
            b.bbox.top,
            b.bbox.width,
            b.bbox.height,
            conf,
            b.glyph.as_deref().unwrap_or(""),
            source
        ));
    }
    s
}

/// Otsu's threshold over a 256-bin histogram. Classes are `< t` and `>= t`; the
/// smallest `t` maximizing between-class variance wins. `None` when the histogram
/// holds a single intensity.
pub fn otsu_threshold(hist: &[u64; 256]) -> Option<u8> {
    let total: u64 = hist.iter().sum();
    let total_sum: u64 = hist.iter().enumerate().map(|(i, &c)| i as u64 * c).sum();
    let mut below = 0u64;
    let mut below_sum = 0u64;
    let mut best: Option<(f64, u8)> = None;
    for t in 1..256usize {
        below += hist[t - 1];
        below_sum += (t as u64 - 1) * hist[t - 1];
        let above = total - below;
        if below == 0 || above == 0 {
            continue;
        }
        let mean_below = below_sum as f64 / below as f64;
        let mean_above = (total_sum - below_sum) as f64 / above as f64;
        let var = below as f64 * above as f64 * (mean_below - mean_above).powi(2);
        if best.is_none_or(|(v, _)| var > v) {
            best = Some((var, t as u8));
        }
    }
    best.map(|(_, t)| t)
}

/// Fallback letter detector: global Otsu binarization, then the bounding box of
/// every 8-connected component of the minority class whose pixel count lies in
/// `[min_area, max_area]`. Output is ordered by (top, left).
pub fn detect_letters_cc(
    img: &GrayImage,
    min_area: u64,
    max_area: u64,
) -> Result<Vec<LetterBox>, LetterError> {
    if img.is_empty() {
        return Err(LetterError::EmptyImage);
    }
    if min_area == 0 || min_area > max_area {
        return Err(LetterError::InvalidAreaRange {
            min: min_area,
            max: max_area,
        });
    }
    let Some(t) = otsu_threshold(&img.histogram()) else {
        return Ok(Vec::new());
    };
    let dark = img.pixels().iter().filter(|&&p| p < t).count();
    let bright = img.pixels().len() - dark;
    // ties favor dark text, the common document case
    let text_is_dark = dark <= bright;
    let fg: Vec<bool> = img
        .pixels()
        .iter()
        .map(|&p| (p < t) == text_is_dark)
        .collect();

    let labeling = label_components(img.width(), img.height(), &fg);
    let mut boxes: Vec<LetterBox> = labeling
        .components
        .iter()
        .filter(|c| (min_area..=max_area).contains(&c.area))
        .map(|c| LetterBox {
            bbox: c.bbox,
            confidence: None,
            glyph: None,
            source: BoxSource::ConnectedComponent,
        })
        .collect();
    boxes.sort_by_key(LetterBox::order_key);
    Ok(boxes)
}

/// Picks one candidate. Ties are broken by the lexicographically smallest
/// (top, left, width, height).
pub fn select_letter(
    candidates: &[LetterBox],
    policy: SelectionPolicy,
) -> Result<&LetterBox, LetterError> {
    if candidates.is_empty() {
        return Err(LetterError::NoCandidates);
    }
    let pick = match policy {
        SelectionPolicy::Index(index) => {
            candidates.get(index).ok_or(LetterError::IndexOutOfRange {
                index,
                count: candidates.len(),
            })?
        }
        SelectionPolicy::LargestArea => candidates
            .iter()
            .min_by_key(|c| (std::cmp::Reverse(c.bbox.area()), c.order_key()))
            .expect("non-empty"),
        SelectionPolicy::HighestConfidence => candidates
            .iter()
            .min_by(|a, b| {
                let ca = a.confidence.unwrap_or(f64::NEG_INFINITY);
                let cb = b.confidence.unwrap_or(f64::NEG_INFINITY);
                cb.total_cmp(&ca)
                    .then_with(|| a.order_key().cmp(&b.order_key()))
            })
            .expect("non-empty"),
    };
    Ok(pick)
}
