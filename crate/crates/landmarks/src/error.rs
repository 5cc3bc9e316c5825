use thiserror::Error;

/// Errors produced by landmark-geometry operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Kernel parameters outside the supported family.
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    /// Array shapes that do not match the landmark configuration.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Landmarks too close together: the Gram matrix is numerically
    /// singular (or the configuration violates the separation floor).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// A geodesic integration that had to stop mid-flight.
    #[error("integration stopped at t = {time}: {reason}")]
    IntegrationStopped { time: f64, reason: String },

    /// Radial motion stalled on a (near-)double root of the radial
    /// polynomial; the trajectory past this point is not unique.
    #[error("turning-point degeneracy: {0}")]
    TurningPoint(String),

    /// A quadrature or step-refinement loop failed to reach its tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Root bracketing could not decide a classification.
    #[error("inconclusive root bracketing: {0}")]
    Inconclusive(String),

    /// Covectors with momentum outside the supported landmark set.
    #[error("unsupported momentum support: {0}")]
    Support(String),
}

pub type Result<T> = std::result::Result<T, Error>;
