//! Hopfield-Bogoliubov analysis of quadratic bosonic Hamiltonians.
//!
//! * [`model`]: Hamiltonian data and constructors for the standard systems.
//! * [`hbmatrix`]: the 2N×2N dynamical matrix, its symmetry check and determinant.
//! * [`eigen`]: in-house complex QR eigensolver, ±E pairing and branch labels.
//! * [`phase`]: normal/superradiant classification, exceptional and degenerate points.
//! * [`gaussian`]: squeezed ground states in the number basis and their Fisher information.
//! * [`oracle`]: independent checks (closed-form roots, truncated Fock diagonalization).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod eigen;
pub mod error;
pub mod gaussian;
pub mod hbmatrix;
mod linalg;
pub mod model;
pub mod oracle;
pub mod phase;

pub use eigen::{PairedSpectrum, SolverOptions};
pub use error::{Error, ErrorClass, Result};
pub use hbmatrix::HBMatrix;
pub use model::{ModelSpec, QuadraticHamiltonian};
pub use phase::{CriticalKind, CriticalPoint, ParamPath, PhaseLabel, PhasePoint};
