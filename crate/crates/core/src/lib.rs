//! Equations of secant varieties of Segre products.
//!
//! The crate is layered bottom-up:
//!
//! * [`arith`], [`linalg`]: exact scalars and linear algebra over `Q`, `F_p`
//! * [`symgroup`]: partitions and characters of `S_d`
//! * [`schur`]: isotypic decomposition of `S^d(A_1 ⊗ … ⊗ A_k)`, cubic counts,
//!   prolongation
//! * [`forms`]: products of minors (candidate highest weight vectors) and the
//!   catalog of named forms
//! * [`eval`]: symmetrized evaluation, homogeneity patterns, tensor networks
//! * [`secant`]: Terracini probe and the ideal scanner
//! * [`flatten`]: flattenings and the constructive σ₂ membership test
//! * [`reproduce`]: the expected-results manifest and case runner

pub mod arith;
pub mod error;
pub mod eval;
pub mod flatten;
pub mod forms;
pub mod linalg;
pub mod poly;
pub mod reproduce;
pub mod schur;
pub mod secant;
pub mod symgroup;
pub mod tensor;

pub use error::{Error, Result};
