//! Exact computation with quadratic lattices over the localization `Z_(p)`
//! at an odd prime, and with hereditary block orders inside `M_N(R)`.
//!
//! The crate is organized around an exact scalar kernel ([`plocal`],
//! [`matrix`]) and the lattice/order layers built on it:
//!
//! - [`lattice`]: Gram forms, coradicals, Jordan splitting, rational and
//!   integral isometry decisions, Hensel-lifted witnesses;
//! - [`refine`]: the dual-lattice refinement loop producing nearly
//!   unimodular lattices in a fixed rational class;
//! - [`orders`]: block orders, Jacobson radical powers, the `(*)`-property
//!   scan, residue unitary groups;
//! - [`transfer`]: the endomorphism-order transfer, morphism triples, and
//!   the integral-descent experiment;
//! - [`gamma`]: group-ring forms, the trace dictionary, equivariant
//!   coradicals and the split-abelian isometry decision.
//!
//! All arithmetic is exact; nothing in this crate uses floating point.

pub mod error;
pub mod gamma;
pub mod json;
pub mod lattice;
pub mod matrix;
pub mod orders;
pub mod plocal;
pub mod refine;
pub mod transfer;

pub use error::{Error, Result};
pub use matrix::{Matrix, SmithProfile, Snf};
pub use plocal::{Fp, PLocal, Valuation};

/// Matrix over the fraction field of `Z_(p)`.
pub type PMat = Matrix<PLocal>;
/// Matrix over the residue field `k = F_p`.
pub type FpMat = Matrix<Fp>;
/// Integer bound matrix (valuation floors for ideals of block orders).
pub type IMat = Matrix<i64>;
