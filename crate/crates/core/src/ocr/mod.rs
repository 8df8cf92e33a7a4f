//! External OCR engine invocation and before/after error-rate comparison.
//!
//! The engine is any command line that reads an image path and prints the
//! recognized text on stdout, e.g. `tesseract {input} stdout`.

mod metrics;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};
use thiserror::Error;

pub use metrics::{cer, edit_distance, normalize, wer};

pub const INPUT_PLACEHOLDER: &str = "{input}";

#[derive(Debug, Error)]
pub enum OcrError {
    #[error("command template must contain {INPUT_PLACEHOLDER}: {0:?}")]
    MissingPlaceholder(String),
    #[error("cannot parse command template {template:?}: {message}")]
    BadTemplate { template: String, message: String },
    #[error("image not found: {0}")]
    MissingImage(PathBuf),
    #[error("OCR engine not found: {0}")]
    EngineNotFound(String),
    #[error("cannot run OCR engine {program}: {message}")]
    Spawn { program: String, message: String },
    #[error("OCR engine timed out after {0:?}")]
    Timeout(Duration),
    #[error("OCR engine exited with status {status}: {stderr}")]
    NonZeroExit { status: i32, stderr: String },
    #[error("reference text is empty")]
    EmptyReference,
    #[error("OCR on the {which} image failed: {source}")]
    Run {
        which: &'static str,
        #[source]
        source: Box<OcrError>,
    },
}

impl OcrError {
    pub fn name(&self) -> &'static str {
        match self {
            OcrError::MissingPlaceholder(_) => "MissingPlaceholder",
            OcrError::BadTemplate { .. } => "BadTemplate",
            OcrError::MissingImage(_) => "MissingImage",
            OcrError::EngineNotFound(_) => "EngineNotFound",
            OcrError::Spawn { .. } => "SpawnError",
            OcrError::Timeout(_) => "Timeout",
            OcrError::NonZeroExit { .. } => "NonZeroExit",
            OcrError::EmptyReference => "EmptyReference",
            OcrError::Run { source, .. } => source.name(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OcrResult {
    /// Engine stdout, verbatim (invalid UTF-8 replaced).
    pub text: String,
    pub engine_cmd: String,
    pub exit_status: i32,
    pub elapsed_ms: u64,
}

/// Splits the template shell-style and substitutes the image path into every
/// word carrying the placeholder, so paths with spaces stay one argument.
fn build_command(template: &str, image: &Path) -> Result<Vec<String>, OcrError> {
    if !template.contains(INPUT_PLACEHOLDER) {
        return Err(OcrError::MissingPlaceholder(template.to_string()));
    }
    let words = shell_words::split(template).map_err(|e| OcrError::BadTemplate {
        template: template.to_string(),
        message: e.to_string(),
    })?;
    if words.is_empty() {
        return Err(OcrError::BadTemplate {
            template: template.to_string(),
            message: "empty command".into(),
        });
    }
    let path = image.to_string_lossy();
    Ok(words
        .into_iter()
        .map(|w| w.replace(INPUT_PLACEHOLDER, &path))
        .collect())
}

/// Validates a command template without running anything.
pub fn check_template(template: &str) -> Result<(), OcrError> {
    build_command(template, Path::new("")).map(drop)
}

fn drain<R: Read + Send + 'static>(reader: Option<R>) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut r) = reader {
            let _ = r.read_to_end(&mut buf);
        }
        buf
    })
}

/// Runs the engine on one image, killing it if it outlives `timeout`.
pub fn run_ocr(
    image: impl AsRef<Path>,
    cmd_template: &str,
    timeout: Duration,
) -> Result<OcrResult, OcrError> {
    let image = image.as_ref();
    let argv = build_command(cmd_template, image)?;
    if !image.exists() {
        return Err(OcrError::MissingImage(image.to_path_buf()));
    }

    let started = Instant::now();
    let mut child = Command::new(&argv[0])
        .args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => OcrError::EngineNotFound(argv[0].clone()),
            _ => OcrError::Spawn {
                program: argv[0].clone(),
                message: e.to_string(),
            },
        })?;
    let stdout = drain(child.stdout.take());
    let stderr = drain(child.stderr.take());

    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if started.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(OcrError::Timeout(timeout));
            }
            Ok(None) => thread::sleep(Duration::from_millis(5)),
            Err(e) => {
                return Err(OcrError::Spawn {
                    program: argv[0].clone(),
                    message: e.to_string(),
                })
            }
        }
    };
    let elapsed_ms = started.elapsed().as_millis() as u64;
    let stdout = stdout.join().unwrap_or_default();
    let stderr = stderr.join().unwrap_or_default();
    let exit_status = status.code().unwrap_or(-1);
    if !status.success() {
        return Err(OcrError::NonZeroExit {
            status: exit_status,
            stderr: String::from_utf8_lossy(&stderr).trim().to_string(),
        });
    }
    Ok(OcrResult {
        text: String::from_utf8_lossy(&stdout).into_owned(),
        engine_cmd: cmd_template.to_string(),
        exit_status,
        elapsed_ms,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OcrComparison {
    pub reference: String,
    pub before: OcrResult,
    pub after: OcrResult,
    pub cer_before: f64,
    pub cer_after: f64,
    pub wer_before: f64,
    pub wer_after: f64,
    /// `cer_after < cer_before`
    pub improved: bool,
}

impl OcrComparison {
    /// Scores two transcripts against the reference.
    pub fn score(
        reference: &str,
        before: OcrResult,
        after: OcrResult,
    ) -> Result<OcrComparison, OcrError> {
        let cer_before = cer(reference, &before.text)?;
        let cer_after = cer(reference, &after.text)?;
        let wer_before = wer(reference, &before.text)?;
        let wer_after = wer(reference, &after.text)?;
        Ok(OcrComparison {
            reference: reference.to_string(),
            before,
            after,
            cer_before,
            cer_after,
            wer_before,
            wer_after,
            improved: cer_after < cer_before,
        })
    }
}

impl Serialize for OcrComparison {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Flat<'a> {
            reference: &'a str,
            before_text: &'a str,
            after_text: &'a str,
            cer_before: f64,
            cer_after: f64,
            wer_before: f64,
            wer_after: f64,
            improved: bool,
        }
        Flat {
            reference: &self.reference,
            before_text: &self.before.text,
            after_text: &self.after.text,
            cer_before: self.cer_before,
            cer_after: self.cer_after,
            wer_before: self.wer_before,
            wer_after: self.wer_after,
            improved: self.improved,
        }
        .serialize(serializer)
    }
}

/// OCRs the original and the preprocessed image once each and scores both.
pub fn compare(
    reference: &str,
    before_img: impl AsRef<Path>,
    after_img: impl AsRef<Path>,
    cmd_template: &str,
    timeout: Duration,
) -> Result<OcrComparison, OcrError> {
    if normalize(reference).is_empty() {
        return Err(OcrError::EmptyReference);
    }
    let tag = |which: &'static str| {
        move |e: OcrError| OcrError::Run {
            which,
            source: Box::new(e),
        }
    };
    let before = run_ocr(before_img, cmd_template, timeout).map_err(tag("before"))?;
    let after = run_ocr(after_img, cmd_template, timeout).map_err(tag("after"))?;
    OcrComparison::score(reference, before, after)
}
