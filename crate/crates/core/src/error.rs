use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("truncation order mismatch: {0} vs {1}")]
    ConfigMismatch(usize, usize),
    #[error("series with vanishing constant term is not invertible")]
    NotInvertible,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("operands belong to different algebras")]
    AlgebraMismatch,
    #[error("wrong degree: expected {expected}, found {found}")]
    DegreeError { expected: i32, found: i32 },
    #[error("structure constants are not antisymmetric at (i={i}, j={j}, k={k})")]
    NotAntisymmetric { i: usize, j: usize, k: usize },
    #[error("Jacobi identity fails at (i={i}, j={j}, k={k}, l={l})")]
    JacobiViolation { i: usize, j: usize, k: usize, l: usize },
    #[error("r-matrix fails the classical Yang-Baxter equation; [r,r] = {witness}")]
    NotTriangular { witness: String },
    #[error("map is not a Lie algebra action; failing pair ({i}, {j})")]
    NotAction { i: usize, j: usize },
    #[error("element is not a Maurer-Cartan element (first residual at hbar^{order})")]
    NotMaurerCartan { order: usize },
    #[error("element does not lie in the first filtration level")]
    NotFiltered,
    #[error("word length {len} exceeds bound {bound}")]
    BoundExceeded { len: usize, bound: usize },
    #[error("twist ansatz too small at hbar^{order} (multidegree {multidegree:?}); enlarge the degree schedule")]
    AnsatzTooSmall { order: usize, multidegree: Vec<u8> },
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
