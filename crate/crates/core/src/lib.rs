//! General Entanglement of multipartite pure states.

pub mod basis;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod measure;
pub mod oracle;
pub mod rng;
pub mod state;
pub mod suites;

pub use num_complex::Complex64 as C64;

pub use basis::{gell_mann_basis, gram_schmidt_orthonormalize, HermitianBasis};
pub use error::{GeError, Result};
pub use linalg::ComplexMatrix;
pub use measure::{general_entanglement, genuine_entanglement, Bipartition, GeReport};
pub use state::{DensityMatrix, MultipartiteState};
