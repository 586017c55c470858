use thiserror::Error;

/// Errors raised anywhere in the gesture pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SgfError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: coordinate ({x}, {y}) outside {width}x{height} geometry")]
    OutOfGeometry {
        line: usize,
        x: u32,
        y: u32,
        width: usize,
        height: usize,
    },

    #[error("line {line}: timestamp {t} is earlier than the previous event")]
    DecreasingTimestamp { line: usize, t: u64 },

    #[error("degenerate geometry {width}x{height}")]
    DegenerateGeometry { width: usize, height: usize },

    #[error("no frames to process")]
    NoFrames,

    #[error("geometry mismatch: expected {expected:?}, got {got:?}")]
    GeometryMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("feature vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("class {class} is not handled by unit {unit}")]
    ClassNotInUnit { class: u8, unit: char },

    #[error("untrained route: unit {unit} has no trained output neurons")]
    UntrainedRoute { unit: char },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("AER field {field} = {value} out of range")]
    FieldOutOfRange { field: &'static str, value: u32 },

    #[error("AER word {0:#x} exceeds 15 bits")]
    WordOutOfRange(u32),

    #[error("translation fault: no LUT entry for ({col}, {row})")]
    TranslationFault { col: u8, row: u8 },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("model line {line}: {message}")]
    Model { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, SgfError>;
