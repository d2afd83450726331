use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("invalid rotation number {p}/{q}: {reason}")]
    InvalidRotation { p: u32, q: u32, reason: &'static str },

    #[error("no root: target {target} outside the range of the period function")]
    NoRoot { target: f64 },

    #[error("resolution too coarse: unit-speed residual {residual:e}")]
    ResolutionTooCoarse { residual: f64 },

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("coefficients are not periodic with sub-period t0/{n} (deviation {deviation:e})")]
    SubperiodViolation { n: usize, deviation: f64 },

    #[error("rayleigh quotient of the zero function")]
    ZeroFunction,

    #[error("l_max = {l_max} insufficient: lambda_0(l_max) = {lambda0} < cut {cut}")]
    InsufficientLMax { l_max: usize, lambda0: f64, cut: f64 },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain { func, detail: detail.into() }
}
