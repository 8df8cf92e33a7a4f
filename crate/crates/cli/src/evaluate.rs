use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use textthresh::letterloc::{detect_letters_cc, BoxSource, LetterBox};
use textthresh::ocr::{check_template, compare, OcrComparison};
use textthresh::raster::{load_gray, save_gray};
use textthresh::synth::{load_corpus, CorpusEntry};
use textthresh::threshold::{binarize, ThresholdReport};

use crate::error::{CliError, Result};
use crate::{write_json, PipelineArgs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoxMode {
    Auto,
    Truth,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Corpus directory written by `textthresh synth`
    corpus: PathBuf,
    /// OCR command template; {input} is replaced by the image path
    #[arg(long, env = "TEXTTHRESH_OCR_CMD", value_name = "TEMPLATE")]
    ocr_cmd: String,
    /// Per-invocation OCR time limit in seconds
    #[arg(long, value_name = "SECS", default_value_t = 30.0)]
    timeout: f64,
    /// Directory for the binarized images (created if missing)
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Evaluation report JSON [default: stdout]
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Letter boxes: auto (connected components) or truth (corpus ground truth)
    #[arg(long, value_enum, default_value_t = BoxMode::Auto)]
    boxes: BoxMode,
    /// Smallest component area (pixels) accepted as a letter by auto detection
    #[arg(long, default_value_t = 10)]
    min_area: u64,
    /// Largest component area (pixels) accepted as a letter by auto detection
    #[arg(long, default_value_t = 1_000_000)]
    max_area: u64,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Serialize)]
struct Failure {
    stage: &'static str,
    error: &'static str,
    message: String,
}

#[derive(Serialize)]
struct SampleRecord {
    name: String,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<ThresholdReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<OcrComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<Failure>,
}

#[derive(Serialize)]
struct Params {
    delta: u32,
    offset: u32,
    policy: String,
    aggregation: String,
    box_margin: u32,
    boxes: BoxMode,
    timeout_secs: f64,
}

#[derive(Serialize)]
struct Summary {
    total: usize,
    scored: usize,
    failed: usize,
    improved: usize,
    median_cer_before: Option<f64>,
    median_cer_after: Option<f64>,
    median_wer_before: Option<f64>,
    median_wer_after: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    corpus: String,
    ocr_cmd: String,
    params: Params,
    summary: Summary,
    samples: Vec<SampleRecord>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

fn failed(name: &str, stage: &'static str, error: &CliError) -> SampleRecord {
    SampleRecord {
        name: name.to_string(),
        status: "failed",
        threshold: None,
        comparison: None,
        failure: Some(Failure {
            stage,
            error: error.name,
            message: error.message.clone(),
        }),
    }
}

impl EvaluateArgs {
    fn boxes_for(
        &self,
        entry: &CorpusEntry,
        img: &textthresh::GrayImage,
    ) -> Result<Vec<LetterBox>> {
        match self.boxes {
            BoxMode::Auto => Ok(detect_letters_cc(img, self.min_area, self.max_area)?),
            BoxMode::Truth => Ok(entry
                .truth
                .boxes
                .iter()
                .map(|&bbox| LetterBox {
                    bbox,
                    confidence: None,
                    glyph: None,
                    source: BoxSource::ExternalOcr,
                })
                .collect()),
        }
    }

    fn sample(&self, entry: &CorpusEntry, timeout: Duration) -> SampleRecord {
        let processed = self.out.join(format!("{}.png", entry.name));
        let threshold = load_gray(&entry.image_path)
            .map_err(CliError::from)
            .and_then(|img| {
                let boxes = self.boxes_for(entry, &img)?;
                let (report, out) = binarize(&img, &boxes, &self.pipeline.params())?;
                save_gray(&out, &processed)?;
                Ok(report)
            });
        let report = match threshold {
            Ok(r) => r,
            Err(e) => return failed(&entry.name, "threshold", &e),
        };
        match compare(
            &entry.truth.transcript,
            &entry.image_path,
            &processed,
            &self.ocr_cmd,
            timeout,
        ) {
            Ok(c) => SampleRecord {
                name: entry.name.clone(),
                status: "scored",
                threshold: Some(report),
                comparison: Some(c),
                failure: None,
            },
            Err(e) => {
                let mut rec = failed(&entry.name, "ocr", &e.into());
                rec.threshold = Some(report);
                rec
            }
        }
    }
}

fn summarize(samples: &[SampleRecord]) -> Summary {
    let scored: Vec<&OcrComparison> = samples
        .iter()
        .filter_map(|s| s.comparison.as_ref())
        .collect();
    let pick = |f: fn(&OcrComparison) -> f64| median(scored.iter().map(|c| f(c)).collect());
    Summary {
        total: samples.len(),
        scored: scored.len(),
        failed: samples.len() - scored.len(),
        improved: scored.iter().filter(|c| c.improved).count(),
        median_cer_before: pick(|c| c.cer_before),
        median_cer_after: pick(|c| c.cer_after),
        median_wer_before: pick(|c| c.wer_before),
        median_wer_after: pick(|c| c.wer_after),
    }
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    check_template(&args.ocr_cmd)?;
    if !(args.timeout.is_finite() && args.timeout > 0.0) {
        return Err(CliError::usage(
            "InvalidTimeout",
            format!(
                "--timeout must be a positive number of seconds, got {}",
                args.timeout
            ),
        ));
    }
    let timeout = Duration::from_secs_f64(args.timeout);
    let (_, mut entries) = load_corpus(&args.corpus)?;
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;

    let samples: Vec<SampleRecord> = entries
        .par_iter()
        .map(|entry| args.sample(entry, timeout))
        .collect();
    let p = &args.pipeline;
    let report = Report {
        corpus: display(&args.corpus),
        ocr_cmd: args.ocr_cmd.clone(),
        params: Params {
            delta: p.delta,
            offset: p.offset,
            policy: p.policy.to_string(),
            aggregation: p.aggregation.to_string(),
            box_margin: p.box_margin,
            boxes: args.boxes,
            timeout_secs: args.timeout,
        },
        summary: summarize(&samples),
        samples,
    };
    write_json(&report, args.report.as_deref())
}

fn display(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}
