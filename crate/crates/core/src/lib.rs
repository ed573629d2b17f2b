//! Multipartite quantum mutual information.
//!
//! The crate is layered bottom-up:
//!
//! * [`linalg`] dense complex matrices and a Jacobi eigensolver,
//! * [`state`] / [`states`] density matrices, partial traces, fixtures and random ensembles,
//! * [`entropy`] von Neumann and Tsallis entropies with a marginal cache,
//! * [`partition`] the partition lattice and its coarsening moves,
//! * [`measure`] the six mutual-information functionals,
//! * [`verify`] checkers, sweeps, counterexample search and the evidence table.

pub mod entropy;
pub mod error;
pub mod linalg;
pub mod measure;
pub mod partition;
pub mod state;
pub mod states;
pub mod verify;

pub use entropy::{EntropySpec, Marginals, RelEntropy};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianEigen, C64};
pub use measure::{mqmi, MqmiKind, MqmiSpec, MqmiValue};
pub use partition::{CoarseningMove, MoveKind, Partition};
pub use state::{DensityMatrix, Party, StateFile, SubsystemLayout};

/// Largest total Hilbert-space dimension any constructor will produce.
pub const MAX_DIM: usize = 1024;

/// Validation tolerance for Hermiticity, trace and PSD checks on density matrices.
pub const STATE_TOL: f64 = 1e-10;

/// Eigenvalues in `[-CLAMP_TOL, 0)` are treated as rounding noise and set to zero.
pub const CLAMP_TOL: f64 = 1e-10;

/// Absolute tolerance for equalities and inequality slack in the checkers.
pub const CHECK_TOL: f64 = 1e-9;
