use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimension {dim} is odd")]
    DimensionOdd { dim: usize },

    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not antisymmetric (residue {residue:.3e})")]
    NotAntisymmetric { residue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a bona fide covariance matrix: spectral value {eigenvalue} lies outside [-1, 1]")]
    NotBonaFide { eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {value} is out of range {range}")]
    OutOfRange { value: f64, range: &'static str },

    #[error("overlap determinant {det:.3e} is negative")]
    NegativeDeterminant { det: f64 },

    #[error("state is pure along a direction (lambda = {lambda}); the Hamiltonian diverges")]
    SingularState { lambda: f64 },

    #[error("{n} modes exceeds the dense-oracle cap of {cap}")]
    TooManyModes { n: usize, cap: usize },

    #[error("index subset has odd size {len}")]
    OddSubset { len: usize },

    #[error("index {index} out of range for {dim} Majoranas")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("index subset must be strictly increasing")]
    UnsortedSubset,

    #[error("operation requires a ({expected_a}, {expected_b}) split, found ({found_a}, {found_b})")]
    WrongSplit {
        expected_a: usize,
        expected_b: usize,
        found_a: usize,
        found_b: usize,
    },

    #[error("query is not feasible; no extension can be built")]
    NotFeasible,

    #[error("solver stalled after {iterations} iterations (best margin {margin:.3e})")]
    SolverStalled { margin: f64, iterations: usize },

    #[error("one-sided inequality disagrees with the block formulation (min eigenvalue {min_eig:.3e})")]
    FormulationMismatch { min_eig: f64 },

    #[error("channel is not completely positive: I + iN - XX^T has eigenvalue {min_eig:.3e}")]
    NotCP { min_eig: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("eigen-decomposition failed to converge")]
    NoConvergence,
}
