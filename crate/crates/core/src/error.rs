use std::fmt;

/// Coarse failure class. Drives CLI exit codes, FFI status codes and HTTP
/// status mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parameter,
    Degenerate,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Parameter => 2,
            ErrorKind::Degenerate => 3,
            ErrorKind::Io => 4,
        }
    }
}

/// Pipeline stage names, used to tag failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Decode,
    Grayscale,
    Sharpen,
    Sobel,
    Threshold,
    Sample,
    Triangulate,
    Color,
    Rasterize,
    Encode,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Decode => "decode",
            Stage::Grayscale => "grayscale",
            Stage::Sharpen => "sharpen",
            Stage::Sobel => "sobel",
            Stage::Threshold => "threshold",
            Stage::Sample => "sample",
            Stage::Triangulate => "triangulate",
            Stage::Color => "color",
            Stage::Rasterize => "rasterize",
            Stage::Encode => "encode",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot decode image: {0}")]
    Decode(String),

    #[error("cannot encode image: {0}")]
    Encode(String),

    #[error("image is {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall { width: u32, height: u32, min: u32 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("too few points: {available} available, at least {required} needed{context}")]
    TooFewPoints {
        available: usize,
        required: usize,
        context: String,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{stage} stage failed: {source}")]
    InStage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parameter(_) => ErrorKind::Parameter,
            Error::ImageTooSmall { .. } | Error::TooFewPoints { .. } | Error::Degenerate(_) => {
                ErrorKind::Degenerate
            }
            Error::Decode(_) | Error::Encode(_) | Error::Io(_) => ErrorKind::Io,
            Error::InStage { source, .. } => source.kind(),
        }
    }

    /// The stage this error was raised in, if it was tagged.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::InStage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    pub(crate) fn in_stage(self, stage: Stage) -> Error {
        match self {
            tagged @ Error::InStage { .. } => tagged,
            other => Error::InStage {
                stage,
                source: Box::new(other),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
