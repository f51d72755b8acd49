use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the laboratory. Computational failures (degeneracy,
/// non-convergence) are distinguished from invalid input so that front ends
/// can map them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported domain variant for {op}: {variant}")]
    UnsupportedVariant { op: &'static str, variant: String },

    #[error("boundary projection did not converge after {iterations} iterations (|rho| = {rho:.3e}, alignment residual = {alignment:.3e}); last iterate {last:?}")]
    ProjectionFailed {
        iterations: usize,
        rho: f64,
        alignment: f64,
        last: Vec<[f64; 2]>,
    },

    #[error("inward point at distance {t} is not interior (rho = {rho:.3e})")]
    NotInterior { t: f64, rho: f64 },

    #[error("quadrature produced no interior nodes")]
    EmptyQuadrature,

    #[error("orthonormalization retained no basis elements (largest pivot {largest_pivot:.3e})")]
    EmptySpace { largest_pivot: f64 },

    #[error("degenerate metric: eigenvalues {eigenvalues:?}")]
    DegenerateMetric { eigenvalues: Vec<f64> },

    #[error("degenerate constraints in {context}: condition number {condition:.3e}")]
    DegenerateConstraints { context: String, condition: f64 },

    #[error("basis dimension {basis} is smaller than the constraint count {constraints}")]
    TooFewBasisElements { basis: usize, constraints: usize },

    #[error("zero direction vector")]
    ZeroDirection,

    #[error("containment violated: {0}")]
    Containment(String),

    #[error("unsupported map: {0}")]
    UnsupportedMap(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of a computation on valid input (as opposed to
    /// malformed input or I/O problems).
    pub fn is_computational(&self) -> bool {
        matches!(
            self,
            Error::ProjectionFailed { .. }
                | Error::NotInterior { .. }
                | Error::EmptyQuadrature
                | Error::EmptySpace { .. }
                | Error::DegenerateMetric { .. }
                | Error::DegenerateConstraints { .. }
                | Error::TooFewBasisElements { .. }
                | Error::ZeroDirection
                | Error::Containment(_)
        )
    }
}
