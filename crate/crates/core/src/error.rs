use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("EmptySchedule: scale {max_scale} gives short side {short_side}px < min size {min_size_px}px")]
    EmptySchedule {
        max_scale: f64,
        short_side: usize,
        min_size_px: usize,
    },
    #[error("EmptyFeatureBox: no feature center falls inside box {0:?}")]
    EmptyFeatureBox([i64; 4]),
    #[error("UnsupportedFormat: {0}")]
    UnsupportedFormat(String),
    #[error("CorruptFile: {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },
    #[error("file not found: {0}")]
    NotFound(PathBuf),
    #[error("ZeroOutputDim: resampling {width}x{height} gives an empty image")]
    ZeroOutputDim { width: usize, height: usize },
    #[error("AlreadyCentered: image has already been mean-centered")]
    AlreadyCentered,
    #[error("NotCentered: convnet input must be mean-centered")]
    NotCentered,
    #[error("ChannelMismatch: expected {expected} channels, got {actual}")]
    ChannelMismatch { expected: usize, actual: usize },
    #[error("LevelTooLarge: level {level} with border is {w}x{h}, canvas is {canvas_w}x{canvas_h}")]
    LevelTooLarge {
        level: usize,
        w: usize,
        h: usize,
        canvas_w: usize,
        canvas_h: usize,
    },
    #[error("DimMismatch: {0}")]
    DimMismatch(String),
    #[error("InputTooSmall: input {width}x{height} is smaller than receptive field {receptive_field}")]
    InputTooSmall {
        width: usize,
        height: usize,
        receptive_field: usize,
    },
    #[error("WrongPatchSize: patch is {width}x{height}, receptive field is {receptive_field}")]
    WrongPatchSize {
        width: usize,
        height: usize,
        receptive_field: usize,
    },
    #[error("UnknownPreset: {0}")]
    UnknownPreset(String),
    #[error("BadLevel: level {level} out of range (pyramid has {count})")]
    BadLevel { level: usize, count: usize },
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
