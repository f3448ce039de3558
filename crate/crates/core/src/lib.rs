//! Reversibility of repeated quantum measurements and of classical dynamics.
//!
//! * [`hilbert`]: dense complex linear algebra, unitary evolution and
//!   antiunitary time reversal.
//! * [`observables`]: spin observables and their spectral projectors.
//! * [`engine`]: exact trajectory probabilities, reversal and detailed-balance
//!   checks, two-time conditioning, collapse sampling and entropy traces.
//! * [`markov`]: stationary laws, Bayes reversal and detailed balance for
//!   finite Markov chains.
//! * [`dynamics`]: exact counting identities for finite reversible maps.

// NaN-rejecting checks are written as `!(x >= 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod engine;
pub mod error;
pub mod hilbert;
pub mod markov;
pub mod observables;
pub mod random;

pub use dynamics::{FiniteDynamicalSystem, Macrostate};
pub use engine::{MeasurementSchedule, TimeReversalReport, Trajectory, TrajectoryDistribution};
pub use error::{Error, Precondition, Result};
pub use hilbert::{
    AntiunitaryInvolution, CMatrix, CVector, DensityMatrix, HermitianOperator, StateVector,
    UnitaryOperator,
};
pub use markov::{MarkovChain, PotentialForm};
pub use observables::{ConditionReversalMap, ObservableDecomposition, Pauli};

pub use num_complex::Complex64;
