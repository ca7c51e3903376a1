use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("aliasing: {fraction:.3e} of the momentum power sits within 1/8 of the Nyquist edge on axis {axis}")]
    Aliasing { axis: usize, fraction: f64 },

    #[error("invalid time: {0}")]
    InvalidTime(f64),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("non-relativistic regime violated: k0/m = {ratio} (must be < 0.1)")]
    NonRelativistic { ratio: f64 },

    #[error("paraxial assumption violated: packet size / L = {ratio} (must be <= 0.1)")]
    ParaxialViolated { ratio: f64 },

    #[error("time {t} outside worldline validity [{start}, {end}]")]
    OutsideValidity { t: f64, start: f64, end: f64 },

    #[error("superluminal worldline: |beta| = {beta} at t = {t}")]
    Superluminal { t: f64, beta: f64 },

    #[error("outside proper-frame patch: |g Z| = {gz}")]
    OutsidePatch { gz: f64 },

    #[error("screen not present at arrival: crossing window [{start}, {end}] exceeds worldline validity")]
    ScreenNotPresent { start: f64, end: f64 },

    #[error("use full-flux method: beta^2 = {beta_sq:.3e} exceeds 1e-3")]
    UseFullFlux { beta_sq: f64 },

    #[error("insufficient fringes: grid spans {periods:.2} periods (need >= 3)")]
    InsufficientFringes { periods: f64 },

    #[error("use phasor_visibility: short-time correction {correction} >= 0.5")]
    UsePhasor { correction: f64 },

    #[error("no exact revival: {0}")]
    NoExactRevival(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
