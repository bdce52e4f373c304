use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("modulation wavenumber {k} is not commensurate with the grid (2π/L = {unit})")]
    Incommensurate { k: f64, unit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no off-axis instability: mean signal detuning {0} is not negative")]
    NoOffAxisInstability(f64),

    #[error("pump amplitude |α0| = {max_abs:.6} reached the validity limit 2 at t = {time:.4}")]
    OutOfValidity { time: f64, max_abs: f64 },

    #[error("field norm {norm:.3e} exceeded the blow-up guard at t = {time:.4}")]
    BlowUp { time: f64, norm: f64 },

    #[error("non-finite field value at t = {0:.4}")]
    NonFinite(f64),

    #[error("Lyapunov solve undefined, A not Hurwitz (max growth rate {0:.3e})")]
    NotHurwitz(f64),

    #[error("no threshold below E = {0}")]
    NoThreshold(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("missing calibration: {0}")]
    MissingCalibration(String),

    #[error("campaign aborted: {0}")]
    CampaignAborted(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidGrid(_)
            | Error::Incommensurate { .. }
            | Error::InvalidParameter(_)
            | Error::NoOffAxisInstability(_)
            | Error::Json(_) => 2,
            Error::InsufficientStatistics(_) | Error::MissingCalibration(_) => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}
