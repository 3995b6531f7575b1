use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular point: min-image distance {distance:e} is below the guard radius")]
    SingularPoint { distance: f64 },

    #[error("coincident points: particles {i} and {j} are {distance:e} apart")]
    CoincidentPoints { i: usize, j: usize, distance: f64 },

    #[error("two-dimensional limit energy requires equal masses (particle {index} has mass {mass}, expected {expected})")]
    UnequalMasses2D {
        index: usize,
        mass: f64,
        expected: f64,
    },

    #[error("balls {i} and {j} overlap or touch (clearance {clearance:e})")]
    OverlappingBalls { i: usize, j: usize, clearance: f64 },

    #[error("ball {index} has diameter {diameter} which is not below 1/2")]
    DiameterTooLarge { index: usize, diameter: f64 },

    #[error("fourier cutoff {cutoff} too small: truncation bound {bound:e} exceeds tolerance")]
    CutoffTooSmall { cutoff: usize, bound: f64 },

    #[error("no sign change of the splitting function on [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("{n} particles do not fit the {lattice} lattice on the unit torus: {reason}")]
    IncommensurateCount {
        n: usize,
        lattice: String,
        reason: String,
    },

    #[error("no restart reached the gradient tolerance (best gradient norm {:e})", best.grad_norm)]
    NoConvergence {
        best: Box<crate::optimize::OptimizationResult>,
    },

    #[error("not an admissible limit configuration: {0}")]
    NotAdmissible(String),

    #[error("invalid ewald parameters: {0}")]
    InvalidParameters(String),

    #[error("schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
