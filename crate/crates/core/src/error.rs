use thiserror::Error;

/// Errors raised by surface construction, potential evaluation, the nonlinear
/// solver and the batch driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature order {0} is below the minimum of 4")]
    InvalidOrder(usize),

    #[error("radial function is not positive: r = {radius:.3e} at (theta = {theta:.4}, phi = {phi:.4})")]
    NonPositiveRadius { radius: f64, theta: f64, phi: f64 },

    #[error("harmonic degree {0} exceeds the supported maximum of 8")]
    HarmonicDegree(usize),

    #[error("scale factor must be positive, got {0}")]
    NonPositiveEps(f64),

    #[error("fundamental solution evaluated at the origin")]
    OriginEvaluation,

    #[error("point at distance {distance:.3e} from the surface, below the threshold {threshold:.3e}")]
    TooCloseToSurface { distance: f64, threshold: f64 },

    #[error("surfaces are separated by {distance:.3e}, below the threshold {threshold:.3e}")]
    SurfacesOverlap { distance: f64, threshold: f64 },

    #[error("density has {got} values, surface has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("non-finite residual")]
    NonFiniteResidual,

    #[error("singular Jacobian")]
    SingularJacobian,

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NewtonDiverged {
        iterations: usize,
        residual: f64,
        /// Residual sup-norm after each iteration.
        log: Vec<f64>,
    },

    #[error("limit root fails the solvability conditions (integral_nonzero = {integral_nonzero}, sign_ok = {sign_ok})")]
    SolvabilityViolated { integral_nonzero: bool, sign_ok: bool },

    #[error("point lies outside the perforated domain")]
    OutsideDomain,

    #[error("point lies inside the inner domain")]
    InsideInnerDomain,

    #[error("point is too close to the origin")]
    TooCloseToOrigin,

    #[error("radius {r} outside [{lo}, {hi}]")]
    RadiusOutOfRange { r: f64, lo: f64, hi: f64 },

    #[error("eps = {0} outside (0, 1)")]
    EpsOutOfRange(f64),

    #[error("no sign change found for the radial limit equation within |xi| <= {0:.1e}")]
    NoBracketFound(f64),

    #[error("non-positive sample value {0}")]
    NonPositiveValue(f64),

    #[error("need at least 4 samples spanning 0.9 decades, got {count} spanning {decades:.3} decades")]
    InsufficientSamples { count: usize, decades: f64 },

    #[error("invalid config: {field}: {message}")]
    ConfigInvalid { field: String, message: String },

    #[error("solve failed at eps = {eps:.6e}: {source}")]
    SolveFailed {
        eps: f64,
        #[source]
        source: Box<Error>,
        log: Vec<f64>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
