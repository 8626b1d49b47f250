use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("determinant {0} is not within tolerance of 1")]
    NonUnitDeterminant(f64),
    #[error("element is not hyperbolic")]
    NotHyperbolic,
    #[error("elements are not conjugate: {0}")]
    NotConjugate(String),
    #[error("deck index rounding is unstable (residual {0:e})")]
    IndexRoundingUnstable(f64),
    #[error("displacement range touches a multiple of pi (gap {0:e})")]
    DegenerateRange(f64),
    #[error("elliptic element has no lift in the closure of Hyp0")]
    EllipticHasNoHyp0Lift,
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("bad word: {0}")]
    BadWord(String),
    #[error("invalid surface: genus {genus}, punctures {punctures}")]
    InvalidSurface { genus: usize, punctures: usize },
    #[error("peripheral image c{0} is elliptic")]
    NotHP(usize),
    #[error("relator does not lift to a central element (defect {0:e})")]
    RelatorNotCentral(f64),
    #[error("relator check failed for the explicit last peripheral image (defect {0:e})")]
    RelatorMismatch(f64),
    #[error("splitting curve image is elliptic")]
    BoundaryElliptic,
    #[error("splitting curve image is not hyperbolic ({0})")]
    BoundaryNotHyperbolic(String),
    #[error("invalid splitting (j = {0}, k = {1})")]
    InvalidSplitting(usize, usize),
    #[error("target class {0} is not reachable from the requested factor kinds")]
    UnreachableTarget(String),
    #[error("solver failed: {0}")]
    SolveFailed(String),
    #[error("target class {0} is outside the commutator image")]
    TargetOutsideImage(String),
    #[error("infeasible request: {0}")]
    InfeasibleRequest(String),
    #[error("not supported: {0}")]
    NotSupported(String),
    #[error("curve is not in the standard separating list")]
    UnsupportedCurve,
    #[error("representation is not type-preserving: c{0} is not parabolic")]
    NotTypePreserving(usize),
    #[error("representation is not in a counterexample component: {0}")]
    NotCounterexample(String),
    #[error("self-verification failed: {0}")]
    Verification(String),
    #[error("malformed input: {0}")]
    Parse(String),
}
