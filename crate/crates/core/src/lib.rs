//! Block Jacobi matrices built from point-interaction models of Dirac and
//! Schrödinger type, with selfadjointness, discreteness and maximal
//! deficiency-index criteria and two numerical index estimators.

pub mod blockmat;
pub mod cli;
pub mod criteria;
pub mod generators;
pub mod indices;
pub mod jacobi;
pub mod sequences;
pub mod spectra;

pub use blockmat::{Block, BlockError, Real, Scaled};

/// Double precision block, the type used by every layer above `blockmat`.
pub type ComplexBlock = Block<f64>;
/// Double precision log-scaled block.
pub type ScaledBlock = Scaled<f64>;
/// Single precision block.
pub type ComplexBlockF32 = Block<f32>;
pub type ScaledBlockF32 = Scaled<f32>;

pub use num_complex::Complex64 as C64;
