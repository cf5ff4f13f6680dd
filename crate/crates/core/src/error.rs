use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dimension {dim} exceeds the dense eigensolver cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigenvalue iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("signature ({positive}, {negative}) exceeds the spin bound n = {bound}")]
    Signature { positive: usize, negative: usize, bound: usize },

    #[error("frame has linearly dependent columns")]
    RankDeficient,

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("operator is not self-adjoint for the indefinite inner product (defect {defect:.3e})")]
    NotKreinSelfAdjoint { defect: f64 },

    #[error("fermionic operator is not admissible: {0}")]
    Inadmissible(String),

    #[error("Neumann series diverges: |R dk| = {norm:.4} >= 1 at lambda = {lambda}")]
    NeumannDivergent { norm: f64, lambda: num_complex::Complex64 },

    #[error("spectral parameter {0} hits a pole of the resolvent")]
    ResolventPole(num_complex::Complex64),

    #[error("eigenvalue {eigenvalue} lies within {distance:.3e} of the integration contour")]
    ContourTooClose { eigenvalue: f64, distance: f64 },

    #[error("separation |xi^2| = {0:.3e} is too close to the light cone for the series expansion")]
    NearLightCone(f64),

    #[error("{modes} modes requested, above the cap of {cap}")]
    ModeCap { modes: usize, cap: usize },

    #[error("state violates the sea constraint (defect {defect:.3e}): {what}")]
    SeaConstraint { what: &'static str, defect: f64 },

    #[error("infeasible targets: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
