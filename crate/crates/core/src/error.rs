use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (cutoff {cutoff})")]
    IndexOutOfRange { index: usize, cutoff: usize },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("Fock cutoff {cutoff} too small: need at least {required}")]
    CutoffTooSmall { cutoff: usize, required: usize },

    #[error("zero detuning in branch {branch}")]
    ZeroDetuning { branch: usize },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("resonance solver did not converge after {iterations} iterations (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("truncation leakage {leakage:e} exceeds limit {limit:e} at t = {time}")]
    LeakageExceeded { leakage: f64, limit: f64, time: f64 },

    #[error("step size underflow at t = {time} (h = {step:e})")]
    StepSizeUnderflow { time: f64, step: f64 },

    #[error("negative eigenvalue {value:e} at t = {time}")]
    NegativeEigenvalue { value: f64, time: f64 },

    #[error("steady state is not unique: null space has dimension {dimension}")]
    DegenerateSteadyState { dimension: usize },

    #[error("no steady state found: smallest singular value {smallest:e} above tolerance {tolerance:e}")]
    NoSteadyState { smallest: f64, tolerance: f64 },

    #[error("Mandel Q undefined: mean photon number {mean:e} below threshold")]
    UndefinedMandelQ { mean: f64 },

    #[error("duplicate selective channel k = {0}")]
    DuplicateChannel(usize),

    #[error("config validation failed at `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for the runtime guards that halt an evolution or a steady-state
    /// extraction (as opposed to bad inputs).
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::LeakageExceeded { .. }
                | Error::StepSizeUnderflow { .. }
                | Error::NegativeEigenvalue { .. }
                | Error::DegenerateSteadyState { .. }
                | Error::NoSteadyState { .. }
                | Error::NonConvergence { .. }
                | Error::UndefinedMandelQ { .. }
        )
    }
}
