use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The variants fall into three families which the command line tool maps to
/// distinct exit codes: invalid input, a solver running out of degree budget,
/// and a broken internal invariant.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid resolution {module}: {reason}")]
    InvalidResolution { module: usize, reason: String },
    #[error("ideal ({0}) is not supported by the quotient normal form")]
    UnsupportedIdeal(String),
    #[error("invalid relation: {0}")]
    InvalidRelation(String),
    #[error("relations are inconsistent: {0}")]
    InconsistentRelations(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("report schemas differ: `{left}` vs `{right}`")]
    SchemaMismatch { left: String, right: String },

    #[error("rewriting exceeded the step budget of {0}")]
    StepBudgetExceeded(usize),
    #[error("degree {degree} exceeds the truncation bound {bound}")]
    DegreeOverflow { degree: u32, bound: u32 },
    #[error("Ext^{n}(M{j}, M{i}) has not stabilized up to degree bound {bound}")]
    NotStabilized { i: usize, j: usize, n: usize, bound: u32 },
    #[error("cochain is not a coboundary up to degree bound {bound}")]
    NotACoboundary { bound: u32 },
    #[error("projection onto the Ext^2 basis failed up to degree bound {bound}")]
    ProjectionFailed { bound: u32 },

    #[error("cochain is not a cocycle: {0}")]
    NotACocycle(String),
    #[error("flatness violated at {monomial}, component {component}")]
    FlatnessViolated { monomial: String, component: usize },
    #[error("internal invariant broken: {0}")]
    Invariant(String),

    #[error("at order {order}{}: {source}", .monomial.as_ref().map(|m| format!(", monomial {m}")).unwrap_or_default())]
    AtOrder {
        order: usize,
        monomial: Option<String>,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    SolverBound,
    Invariant,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            StepBudgetExceeded(_)
            | DegreeOverflow { .. }
            | NotStabilized { .. }
            | NotACoboundary { .. }
            | ProjectionFailed { .. } => ErrorKind::SolverBound,
            NotACocycle(_) | FlatnessViolated { .. } | Invariant(_) => ErrorKind::Invariant,
            AtOrder { source, .. } => source.kind(),
            _ => ErrorKind::Validation,
        }
    }

    pub fn at_order(self, order: usize, monomial: Option<String>) -> Error {
        Error::AtOrder { order, monomial, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
