//! Sparse nonnegative CP factorization of third-order tensors.
//!
//! A tensor is fitted by `U`, `V`, `W` with `x̂(q,p,s) = Σ_r U[q,r]V[p,r]W[s,r]`
//! under the full Euclidean loss, where absent cells count as zeros. The
//! main solver is saturating coordinate descent, which updates only the
//! factor elements whose estimated objective decrease is still growing.
//! A column-parallel variant, a plain coordinate-descent baseline and a
//! HALS baseline share the same kernels.

pub mod bench;
pub mod error;
pub mod eval;
pub mod io;
pub mod kernels;
pub mod matrix;
pub mod metrics;
pub mod oracle;
pub mod rng;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use matrix::{FactorMatrix, KruskalModel, Matrix};
pub use solver::{fit, FitReport, Solver, SolverConfig};
pub use tensor::{Entry, Mode, SparseTensor3};
