use thiserror::Error;

/// Errors produced by the geometry, integration and enumeration routines.
///
/// The `Display` text of every variant starts with the variant name so that
/// front ends can surface it verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("NonUnitInput: |x| = {norm} deviates from 1 beyond {tol:e}")]
    NonUnitInput { norm: f64, tol: f64 },

    #[error("EmptyInput: {0}")]
    EmptyInput(&'static str),

    #[error("NonHorizontalPath: max |c| = {max_c:e} exceeds {tol:e}")]
    NonHorizontalPath { max_c: f64, tol: f64 },

    #[error("StepSizeUnderflow: step {h:e} too small at s = {s}")]
    StepSizeUnderflow { s: f64, h: f64 },

    #[error("MonitorBreach: {monitor} = {value:e} exceeds limit {limit:e}")]
    MonitorBreach {
        monitor: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("ChartSingularity: eta = {eta} is too close to a singular fiber")]
    ChartSingularity { eta: f64 },

    #[error("InvalidParam: {0}")]
    InvalidParam(String),

    #[error("InvalidOmega: {0} is outside [0, 2pi)")]
    InvalidOmega(f64),

    #[error("DomainError: |B| = {b} is not below {limit}")]
    DomainError { b: f64, limit: f64 },

    #[error("VerticalLineCase: target lies on the vertical line through the identity; use the fiber enumeration")]
    VerticalLineCase,

    #[error("HorizontalSphereCase: target lies on the horizontal sphere; it is reached by the B = 0 family")]
    HorizontalSphereCase,

    #[error("NoSolutionInBudget: no geodesic found with branch_max = {branch_max}")]
    NoSolutionInBudget { branch_max: usize },

    #[error("BasePointMismatch: |h(x0) - c(0)| = {distance:e}")]
    BasePointMismatch { distance: f64 },

    #[error("ResolutionTooCoarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("Parse: {0}")]
    Parse(String),

    #[error("Io: {0}")]
    Io(#[from] std::io::Error),

    #[error("Json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("Csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Variant name, e.g. `"StepSizeUnderflow"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonUnitInput { .. } => "NonUnitInput",
            Error::EmptyInput(_) => "EmptyInput",
            Error::NonHorizontalPath { .. } => "NonHorizontalPath",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::MonitorBreach { .. } => "MonitorBreach",
            Error::ChartSingularity { .. } => "ChartSingularity",
            Error::InvalidParam(_) => "InvalidParam",
            Error::InvalidOmega(_) => "InvalidOmega",
            Error::DomainError { .. } => "DomainError",
            Error::VerticalLineCase => "VerticalLineCase",
            Error::HorizontalSphereCase => "HorizontalSphereCase",
            Error::NoSolutionInBudget { .. } => "NoSolutionInBudget",
            Error::BasePointMismatch { .. } => "BasePointMismatch",
            Error::ResolutionTooCoarse(_) => "ResolutionTooCoarse",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }

    /// True for failures of a numerical routine (integrator, root finder,
    /// lift), as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonHorizontalPath { .. }
                | Error::StepSizeUnderflow { .. }
                | Error::MonitorBreach { .. }
                | Error::ChartSingularity { .. }
                | Error::DomainError { .. }
                | Error::NoSolutionInBudget { .. }
                | Error::ResolutionTooCoarse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
