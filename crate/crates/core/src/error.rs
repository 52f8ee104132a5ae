use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DfError {
    /// A guarded primitive (log, division, fractional power) was evaluated
    /// outside its domain, or produced a non-finite value.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("finite-difference step {step:e} is below the admissible floor {floor:e}")]
    Step { step: f64, floor: f64 },

    #[error("invalid domain specification: {0}")]
    Spec(String),

    #[error("boundary projection did not converge (best residual {residual:e})")]
    Convergence { residual: f64 },

    #[error("point is outside the tubular neighborhood: stencil foot points spread {spread:e} > {limit:e}")]
    Tubular { spread: f64, limit: f64 },

    #[error("degenerate gradient: |d rho| = {0:e}")]
    DegenerateGradient(f64),

    #[error("empty Levi-flat sample set")]
    EmptySigma,

    #[error("empty input")]
    EmptyInput,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl DfError {
    /// True for numerical failures the CLI reports with exit status 3.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            DfError::Convergence { .. }
                | DfError::Tubular { .. }
                | DfError::DegenerateGradient(_)
                | DfError::Domain(_)
                | DfError::Step { .. }
        )
    }
}

impl From<std::io::Error> for DfError {
    fn from(e: std::io::Error) -> Self {
        DfError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DfError>;
