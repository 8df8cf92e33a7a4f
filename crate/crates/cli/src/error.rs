use std::fmt;
use std::process::ExitCode;

use textthresh::letterloc::LetterError;
use textthresh::ocr::OcrError;
use textthresh::raster::RasterError;
use textthresh::synth::SynthError;
use textthresh::threshold::ThresholdError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Io,
    Pipeline,
}

/// A failure that ends the process. `name` is the stable identifier printed on
/// stderr for scripts to match on.
#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub name: &'static str,
    pub message: String,
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn new(kind: Kind, name: &'static str, message: impl Into<String>) -> Self {
        CliError {
            kind,
            name,
            message: message.into(),
        }
    }

    pub fn usage(name: &'static str, message: impl Into<String>) -> Self {
        CliError::new(Kind::Usage, name, message)
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::new(Kind::Io, "IoError", format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self.kind {
            Kind::Usage => 1,
            Kind::Io => 2,
            Kind::Pipeline => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error: {}: {}", self.name, self.message)
    }
}

impl From<RasterError> for CliError {
    fn from(e: RasterError) -> Self {
        CliError::new(raster_kind(&e), e.name(), e.to_string())
    }
}

impl From<LetterError> for CliError {
    fn from(e: LetterError) -> Self {
        let kind = match e {
            // a bad boxes file is a decode failure of an input
            LetterError::MalformedTsv { .. } => Kind::Io,
            LetterError::InvalidAreaRange { .. } => Kind::Usage,
            _ => Kind::Pipeline,
        };
        CliError::new(kind, e.name(), e.to_string())
    }
}

impl From<ThresholdError> for CliError {
    fn from(e: ThresholdError) -> Self {
        CliError::new(Kind::Pipeline, e.name(), e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        let kind = match e {
            SynthError::Io { .. } | SynthError::Corrupt { .. } => Kind::Io,
            SynthError::Raster(ref r) => raster_kind(r),
            _ => Kind::Usage,
        };
        CliError::new(kind, e.name(), e.to_string())
    }
}

impl From<OcrError> for CliError {
    fn from(e: OcrError) -> Self {
        let kind = match e {
            OcrError::MissingPlaceholder(_) | OcrError::BadTemplate { .. } => Kind::Usage,
            _ => Kind::Pipeline,
        };
        CliError::new(kind, e.name(), e.to_string())
    }
}

fn raster_kind(e: &RasterError) -> Kind {
    match e {
        RasterError::Io { .. } | RasterError::Decode { .. } | RasterError::Encode { .. } => {
            Kind::Io
        }
        _ => Kind::Pipeline,
    }
}
