use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no components")]
    NoComponents,

    #[error("sampling rate {rate} is below the Nyquist rate for a maximum instantaneous frequency of {max_if} (at t = {time})")]
    Nyquist { rate: f64, max_if: f64, time: f64 },

    #[error("phase family has no closed-form derivative; supply the instantaneous frequency samples explicitly")]
    NotAnalytic,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("scale {scale} is too large: its wavelet spans {span} time units but the padded signal covers {padded}")]
    ScaleTooLarge { scale: f64, span: f64, padded: f64 },

    #[error("scale {scale} is too small: the wavelet band reaches {band_edge}, above the Nyquist frequency {nyquist}")]
    ScaleTooSmall { scale: f64, band_edge: f64, nyquist: f64 },

    #[error("window half-width {half_width} exceeds half the signal duration {duration}")]
    WindowTooWide { half_width: f64, duration: f64 },

    #[error("plane grids do not match: {0}")]
    GridMismatch(String),

    #[error("event time {time} lies outside [0, {duration}]")]
    EventOutOfRange { time: f64, duration: f64 },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("cannot read `{path}`: {source}")]
    Input { path: String, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line front end: 2 for usage and
    /// configuration mistakes, 3 for everything caused by the data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::UnknownPreset { .. } => 2,
            _ => 3,
        }
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
