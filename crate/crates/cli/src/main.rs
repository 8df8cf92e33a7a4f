use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use textthresh::letterloc::{boxes_to_tsv, detect_letters_cc, parse_ocr_tsv, LetterBox};
use textthresh::raster::{load_gray, save_gray, GrayImage};
use textthresh::synth::{make_corpus, CorpusRanges, Range};
use textthresh::threshold::{
    binarize, Aggregation, EstimateParams, DEFAULT_BOX_MARGIN, DEFAULT_OFFSET,
    DEFAULT_PRIMARY_DELTA,
};
use textthresh::SelectionPolicy;

mod error;
mod evaluate;

use error::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "textthresh",
    version,
    about = "Adaptive text binarization from glyph fill intensity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Binarize one image and report the estimated threshold
    Threshold(ThresholdArgs),
    /// OCR every corpus sample before and after binarization and compare error rates
    Evaluate(evaluate::EvaluateArgs),
    /// Generate a synthetic degraded text corpus with ground truth
    Synth(SynthArgs),
    /// Print the letter boxes that would be used, as TSV
    Boxes(BoxesArgs),
}

/// Tunables shared by every command that estimates a threshold.
#[derive(Args, Clone, Debug)]
pub struct PipelineArgs {
    /// Added to the crop mean to form the primary threshold
    #[arg(long, default_value_t = DEFAULT_PRIMARY_DELTA)]
    pub delta: u32,
    /// Distance from the fill intensity to the final threshold
    #[arg(long, default_value_t = DEFAULT_OFFSET)]
    pub offset: u32,
    /// Letter selection: largest-area, highest-confidence or index:N
    #[arg(long, default_value_t = SelectionPolicy::LargestArea)]
    pub policy: SelectionPolicy,
    /// Use one letter (single) or the median over all letters (median)
    #[arg(long, default_value_t = Aggregation::Single)]
    pub aggregation: Aggregation,
    /// Context pixels added around each letter box before cropping
    #[arg(long, default_value_t = DEFAULT_BOX_MARGIN)]
    pub box_margin: u32,
}

impl PipelineArgs {
    pub fn params(&self) -> EstimateParams {
        EstimateParams {
            primary_delta: self.delta,
            offset: self.offset,
            policy: self.policy,
            aggregation: self.aggregation,
            box_margin: self.box_margin,
        }
    }
}

/// Where letter boxes come from.
#[derive(Args, Clone, Debug)]
pub struct BoxArgs {
    /// OCR engine TSV with letter boxes, or "auto" for connected-component detection
    #[arg(long, value_name = "PATH", default_value = "auto")]
    pub boxes_tsv: String,
    /// Smallest component area (pixels) accepted as a letter by auto detection
    #[arg(long, default_value_t = 10)]
    pub min_area: u64,
    /// Largest component area (pixels) accepted as a letter by auto detection
    #[arg(long, default_value_t = 1_000_000)]
    pub max_area: u64,
}

impl BoxArgs {
    pub fn letter_boxes(&self, img: &GrayImage) -> Result<Vec<LetterBox>> {
        if self.boxes_tsv == "auto" {
            return Ok(detect_letters_cc(img, self.min_area, self.max_area)?);
        }
        let path = Path::new(&self.boxes_tsv);
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(parse_ocr_tsv(&text)?)
    }
}

#[derive(Args)]
struct ThresholdArgs {
    /// Input image (PNG, JPEG or PNM)
    input: PathBuf,
    /// Binarized output image; .pgm/.ppm/.pnm write PNM, anything else PNG
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Threshold report JSON [default: stdout]
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    #[command(flatten)]
    boxes: BoxArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct BoxesArgs {
    /// Input image (PNG, JPEG or PNM)
    input: PathBuf,
    /// Output TSV [default: stdout]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(flatten)]
    boxes: BoxArgs,
}

/// `MIN:MAX`, or a single value for a fixed parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
struct RangeArg<T>(Range<T>);

impl<T: FromStr + Copy> FromStr for RangeArg<T> {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |v: &str| {
            v.trim()
                .parse::<T>()
                .map_err(|_| format!("invalid number {v:?} in range {s:?}"))
        };
        match s.split_once(':') {
            Some((a, b)) => Ok(RangeArg(Range::new(parse(a)?, parse(b)?))),
            None => Ok(RangeArg(Range::fixed(parse(s)?))),
        }
    }
}

impl<T: fmt::Display + PartialEq> fmt::Display for RangeArg<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.min == self.0.max {
            write!(f, "{}", self.0.min)
        } else {
            write!(f, "{}:{}", self.0.min, self.0.max)
        }
    }
}

fn defaults() -> CorpusRanges {
    CorpusRanges::default()
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory (created if missing)
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Number of samples
    #[arg(long, default_value_t = 10)]
    n: u64,
    /// Corpus seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Characters per sample
    #[arg(long, value_name = "MIN:MAX", default_value_t = RangeArg(defaults().text_len))]
    text_len: RangeArg<u32>,
    /// Font scale factor (5x7 cells)
    #[arg(long, value_name = "MIN:MAX", default_value_t = RangeArg(defaults().scale))]
    scale: RangeArg<u32>,
    /// Glyph fill intensity
    #[arg(long, value_name = "MIN:MAX", default_value_t = RangeArg(defaults().fill))]
    fill: RangeArg<u8>,
    /// Background intensity
    #[arg(long, value_name = "MIN:MAX", default_value_t = RangeArg(defaults().background))]
    background: RangeArg<u8>,
    /// Blank border around the text, in pixels
    #[arg(long, default_value_t = defaults().margin)]
    margin: u32,
    /// Standard deviation of additive Gaussian noise
    #[arg(long, value_name = "MIN:MAX", default_value_t = RangeArg(defaults().gaussian_sigma))]
    sigma: RangeArg<f64>,
    /// Peak amplitude of the moire interference field
    #[arg(long, value_name = "MIN:MAX", default_value_t = RangeArg(defaults().moire_amplitude))]
    moire_amplitude: RangeArg<f64>,
    /// Moire wavelength in pixels
    #[arg(long, value_name = "MIN:MAX", default_value_t = RangeArg(defaults().moire_period))]
    moire_period: RangeArg<f64>,
    /// Moire wave direction in degrees
    #[arg(long, value_name = "MIN:MAX", default_value_t = RangeArg(defaults().moire_angle))]
    moire_angle: RangeArg<f64>,
    /// Left-to-right brightness ramp, total span in intensity levels
    #[arg(long, value_name = "MIN:MAX", default_value_t = RangeArg(defaults().gradient_span))]
    gradient: RangeArg<f64>,
    /// Soften glyph edges with a 3x3 box blur [default: off]
    #[arg(long)]
    antialias: bool,
}

impl SynthArgs {
    fn ranges(&self) -> CorpusRanges {
        CorpusRanges {
            text_len: self.text_len.0,
            scale: self.scale.0,
            fill: self.fill.0,
            background: self.background.0,
            margin: self.margin,
            gaussian_sigma: self.sigma.0,
            moire_amplitude: self.moire_amplitude.0,
            moire_period: self.moire_period.0,
            moire_angle: self.moire_angle.0,
            gradient_span: self.gradient.0,
            antialias: self.antialias,
        }
    }
}

/// Pretty JSON with a trailing newline, to a file or stdout.
pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    write_text(&text, path)
}

fn write_text(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn cmd_threshold(args: &ThresholdArgs) -> Result<()> {
    let img = load_gray(&args.input)?;
    let boxes = args.boxes.letter_boxes(&img)?;
    let (report, out) = binarize(&img, &boxes, &args.pipeline.params())?;
    save_gray(&out, &args.out)?;
    write_json(&report, args.report.as_deref())
}

fn cmd_boxes(args: &BoxesArgs) -> Result<()> {
    let img = load_gray(&args.input)?;
    let boxes = args.boxes.letter_boxes(&img)?;
    write_text(&boxes_to_tsv(&boxes), args.out.as_deref())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let ranges = args.ranges();
    let entries = make_corpus(args.n, &ranges, args.seed, &args.out)?;
    eprintln!("wrote {} samples to {}", entries.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::Threshold(a) => cmd_threshold(a),
        Command::Evaluate(a) => evaluate::cmd_evaluate(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Boxes(a) => cmd_boxes(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
