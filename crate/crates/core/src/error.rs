use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an input parameter was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An iterative or refinement procedure did not reach its tolerance.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("spectral projection is undefined at k = m = 0")]
    DegenerateMomentum,

    #[error("Bessel evaluation out of domain at argument {0}")]
    BesselDomain(f64),

    #[error("oscillatory quadrature needs {required} panels, budget is {budget}")]
    PanelBudget { required: usize, budget: usize },

    #[error("Hermitian correction {0:e} exceeds the assembly tolerance")]
    HermitizationTooLarge(f64),

    #[error("eigenvalue {eigenvalue} lies outside [-{tol:e}, 1 + {tol:e}]")]
    SpectrumOutOfRange { eigenvalue: f64, tol: f64 },

    #[error("kernel mass outside the truncation box is {0:e} of the total")]
    KernelTail(f64),

    #[error("bound is vacuous: denominator {denominator:e} (numerator {numerator:e})")]
    VacuousBound { numerator: f64, denominator: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures caused by a numerical procedure rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence(_)
                | Error::BesselDomain(_)
                | Error::PanelBudget { .. }
                | Error::HermitizationTooLarge(_)
                | Error::SpectrumOutOfRange { .. }
                | Error::KernelTail(_)
                | Error::VacuousBound { .. }
                | Error::NonFinite
                | Error::Linalg(_)
        )
    }
}
