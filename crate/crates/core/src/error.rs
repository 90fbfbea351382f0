use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate frame")]
    DegenerateFrame,
    #[error("frame too small: {width}x{height}, need at least {min}x{min}")]
    FrameTooSmall { width: usize, height: usize, min: usize },
    #[error("frame size mismatch: {0}x{1} vs {2}x{3}")]
    FrameSizeMismatch(usize, usize, usize, usize),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("empty band")]
    EmptyBand,
    #[error("invalid band: offset {offset}, width {width}")]
    InvalidBand { offset: f64, width: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("incompatible preset: {0}")]
    IncompatiblePreset(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("unsupported type tag '{0}'")]
    UnsupportedTypeTag(char),
    #[error("malformed packet: {0}")]
    MalformedPacket(&'static str),
    #[error("invalid OSC address {0:?}")]
    InvalidAddress(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("unknown descriptor '{0}'")]
    UnknownDescriptor(String),
    #[error("no shared descriptors")]
    NoSharedDescriptors,
    #[error("config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}
