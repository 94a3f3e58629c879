use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed map document at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("expected a {expected} map, found a {found} map")]
    WrongField { expected: &'static str, found: &'static str },

    #[error("map is not square ({n_in} variables, {n_out} components)")]
    NonSquare { n_in: usize, n_out: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("eigenvalue iteration did not converge")]
    EigenFailure,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("map is not in Keller form id - H: {0}")]
    NotKellerForm(String),

    #[error("points are not a collision pair (|F(a) - F(b)| = {residual:e})")]
    NotACollision { residual: f64 },

    #[error("collision endpoints coincide")]
    SameEndpoints,

    #[error("Jacobian of G at the origin is singular (det = {det:e})")]
    SingularJacobian { det: f64 },

    #[error("isolation radius schedule exhausted without reaching |det| >= {delta}")]
    ScheduleExhausted { delta: f64 },

    #[error("rim infimum {alpha:e} is not positive; a second zero lies near the rim")]
    DegenerateRim { alpha: f64 },

    #[error("functional vanishes at this point; Rayleigh quotient undefined")]
    ZeroResidual,

    #[error("symbolic expansion exceeded {limit} terms")]
    TermBlowup { limit: usize },

    #[error("corpus: {0}")]
    Corpus(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { context: context.into(), message: message.into() }
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
