use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Indices or variants the operation does not support.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Construction parameters violate a precondition.
    #[error("invalid parameters: {0}")]
    Parameter(String),

    /// Adaptive quadrature or an iterative scheme failed to meet its tolerance.
    #[error("accuracy failure: {what} (last estimate {estimate:e}, last change {change:e})")]
    Accuracy { what: String, estimate: f64, change: f64 },

    /// The window supremum is too close to one to build the bump profile.
    #[error("window supremum gamma = {0} is not certifiably below 1")]
    GammaNotBelowOne(f64),

    /// No Bernstein basis element pairs negatively at this degree.
    #[error("certificate not found at this degree (degree {degree}, smallest moment {min_moment:e})")]
    CertificateNotFound { degree: usize, min_moment: f64 },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}
