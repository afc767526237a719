//! Exact verification kernels for the cycle category A_{(p,q)}, its A∞-deformations,
//! and the mirror matrix-factorization and toric data.

pub mod ainfty;
pub mod category;
pub mod cover;
pub mod error;
pub mod exact;
pub mod hochschild;
pub mod mf;
pub mod tilde;
pub mod toric;
pub mod twisted;

pub use category::{BasisMorphism, Category, Chain, GradingData, HomElement, Kind, MultiDeg};
pub use error::{HmsError, Result};
pub use exact::{Field, Scalar, SparseMatrix, SparseVec};
