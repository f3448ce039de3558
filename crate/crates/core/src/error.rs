use std::fmt;

use thiserror::Error;

/// Which hypothesis of the measurement reversal theorem was violated.
#[derive(Debug, Clone, PartialEq)]
pub enum Precondition {
    /// The initial density matrix is not the normalized identity.
    NonUniformInitialState { deviation: f64 },
    /// `π H π ≠ H`.
    HamiltonianNotSymmetric { deviation: f64 },
    /// The observable at `step` is not closed under the involution.
    NonCovariantObservable { step: usize, label: String },
    /// The pattern of time gaps is not a palindrome.
    AsymmetricSpacing,
    /// The sequence of observables is not a palindrome.
    AsymmetricObservables { step: usize },
}

impl fmt::Display for Precondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precondition::NonUniformInitialState { deviation } => {
                write!(f, "initial state is not I/d (max deviation {deviation:e})")
            }
            Precondition::HamiltonianNotSymmetric { deviation } => {
                write!(f, "πHπ ≠ H (max deviation {deviation:e})")
            }
            Precondition::NonCovariantObservable { step, label } => {
                write!(
                    f,
                    "observable at step {step} is not π-covariant (condition {label})"
                )
            }
            Precondition::AsymmetricSpacing => {
                write!(f, "time gaps are not symmetric under reversal")
            }
            Precondition::AsymmetricObservables { step } => {
                write!(f, "observable at step {step} differs from its mirror step")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("matrix is not unitary (max deviation of U†U from I is {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("basis map does not square to the identity (max deviation {deviation:e})")]
    NotInvolution { deviation: f64 },

    #[error("matrix is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state vector has zero norm")]
    ZeroNorm,

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("cluster tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("site {site} out of range for {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("{sites} sites exceeds the cap of {max} (dimension 2^{sites})")]
    DimensionCap { sites: usize, max: usize },

    #[error("observable is not closed under the involution: no counterpart for condition {label}")]
    PiNotCovariant { label: String },

    #[error("condition {label:?} does not exist at step {step}")]
    UnknownLabel { label: String, step: usize },

    #[error("trajectory has {found} labels but the schedule has {expected} steps")]
    TrajectoryLength { expected: usize, found: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("enumeration of {count} trajectories exceeds the cap of {cap}")]
    EnumerationCap { count: u128, cap: u64 },

    #[error("reversal theorem precondition violated: {0}")]
    PreconditionViolated(Precondition),

    #[error("ratio undefined: denominator probability {denominator:e} is zero")]
    UndefinedRatio { denominator: f64 },

    #[error("endpoints are unreachable (total weight {weight:e})")]
    EndpointsUnreachable { weight: f64 },

    #[error("conditioning event has zero probability")]
    ZeroProbabilityCondition,

    #[error("probability {value} lies outside [0, 1]")]
    ProbabilityOutOfRange { value: f64 },

    #[error("all outcome probabilities vanish at step {step}")]
    ZeroProbabilityStep { step: usize },

    #[error("invalid transition matrix: {0}")]
    NotStochastic(String),

    #[error("chain is reducible; communicating classes: {classes:?}")]
    ReducibleChain { classes: Vec<Vec<usize>> },

    #[error("stationary mass of state {state} is zero")]
    ZeroStationaryMass { state: usize },

    #[error("invalid potential form: {0}")]
    InvalidPotentialForm(String),

    #[error(
        "row {row} of the Gibbs chain has off-diagonal mass {sum}; scale Φ by at most {rescale}"
    )]
    RowSumOverflow { row: usize, sum: f64, rescale: f64 },

    #[error("map is not a bijection: {0}")]
    NotBijection(String),

    #[error("state map is not an involution: π(π({state})) ≠ {state}")]
    NotStateInvolution { state: usize },

    #[error("state {state} out of range for {size} states")]
    StateOutOfRange { state: usize, size: usize },

    #[error("macrostate is empty")]
    EmptyMacrostate,

    #[error("conditional probability undefined: {0}")]
    UndefinedConditional(String),
}

pub type Result<T> = std::result::Result<T, Error>;
