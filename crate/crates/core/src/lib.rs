//! Generalized Walsh bases on the unit interval: construction, fast
//! transforms, uncertainty bounds, sparse recovery and compression.
//!
//! Signals live on the grid of `N^p` cells of `[0, 1)`. A generator is an
//! `N x N` unitary matrix whose first row is constant; its `p`-fold Kronecker
//! power (least significant digit first) is the transform matrix.

pub mod basis;
pub mod compression;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod recovery;
pub mod transform;
pub mod uncertainty;

pub use basis::{apply_s, apply_s_adjoint, walsh_eval, walsh_grid_vector, DigitWord, GridSignal};
pub use compression::{compress, kl_transform, CompressionReport, DenseTransform, OrthogonalTransform, WalshTransform};
pub use error::{Error, Result};
pub use linalg::{kron, kron_power, validate_walsh, ComplexMatrix, WalshMatrix};
pub use recovery::{puncture, recover, PuncturedSpectrum, Recovery};
pub use transform::{change_basis, op_count, ChangeOfBasis, Direction, TransformPlan};
pub use uncertainty::{alpha_of, check_uncertainty, mu_bounds, mu_bruteforce, UncertaintyProfile};

pub use num_complex::Complex64;
