use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("basis of dimension {dimension} cannot host {requested} levels")]
    Dimension { dimension: usize, requested: usize },

    #[error("numeric failure on a {dimension}x{dimension} problem: {reason}")]
    Numeric { dimension: usize, reason: String },

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error("parity is undefined away from f = 1/2 (f = {f})")]
    ParityUndefined { f: f64 },

    #[error("parity of state {level} is not well defined (|<i|P|i>| = {expectation})")]
    ParityMixed { level: usize, expectation: f64 },

    #[error("argument out of the supported range: {0}")]
    Range(String),

    #[error("initial state is not normalized (norm^2 = {norm_sqr})")]
    Normalization { norm_sqr: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("need at least {needed} levels, got {got}")]
    Arity { needed: usize, got: usize },

    #[error("integrator step size underflow at t = {t}")]
    Stiffness { t: f64 },

    #[error("lambda_x = {lambda_x} couples excitation sectors; evolve the full model instead")]
    SectorViolation { lambda_x: f64 },

    #[error("outside the dispersive regime: |g1|/Delta = {ratio} (limit {limit})")]
    DispersiveRegime { ratio: f64, limit: f64 },

    #[error("dressed splitting vanishes (Omega_R = 0)")]
    DegenerateDressing,

    #[error("Fock cutoff {cutoff} leaks {tail_population:e} into the top levels; need cutoff >= {required}")]
    CutoffLeak {
        cutoff: usize,
        required: usize,
        tail_population: f64,
    },

    #[error("no oscillation above the detection floor")]
    NoOscillation,
}

pub type Result<T> = std::result::Result<T, Error>;
