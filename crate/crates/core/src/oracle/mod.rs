//! Exact reference dynamics on a truncated single-excitation basis.

mod basis;
mod lindblad;
mod operators;
mod trotter;

pub use basis::{TruncatedBasis, MAX_BASIS_DIM};
pub use lindblad::{DensitySample, DensityState, Oracle, EIGEN_CHECK_MAX_DIM, MAX_DENSITY_DIM, MAX_SUBSTEP_FS, SANITY_TOLERANCE};
pub use operators::{build_hamiltonian, lowering_entries, total_quanta, SparseMatrix};
pub use trotter::TrotterReference;
