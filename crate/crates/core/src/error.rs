use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid recording: {0}")]
    InvalidRecording(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("band {low_hz}-{high_hz} Hz is not usable at a sample rate of {sample_rate_hz} Hz")]
    BandOutOfRange {
        low_hz: f64,
        high_hz: f64,
        sample_rate_hz: f64,
    },

    #[error("input too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("window of {window} samples exceeds input of {available} samples")]
    WindowTooLong { window: usize, available: usize },

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("data are rank deficient: rank {rank}, {required} components required")]
    RankDeficient { rank: usize, required: usize },

    #[error(
        "FastICA did not converge: {iterations} iterations, final tolerance {final_tolerance:e}, {restarts} restarts"
    )]
    NotConverged {
        iterations: usize,
        final_tolerance: f64,
        restarts: usize,
    },

    #[error("Hodgkin-Huxley integration diverged at t = {t_ms} ms (V = {v_mv} mV)")]
    IntegrationFailure { t_ms: f64, v_mv: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("file format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or
    /// configuration). The command-line front end maps these to exit code 2.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::NotConverged { .. }
                | Error::IntegrationFailure { .. }
                | Error::Domain(_)
                | Error::Numerical(_)
        )
    }
}
