//! Commuting dephasing channels and the equivalence of entangled and
//! sequential protocols.
//!
//! A choice of orthonormal basis gives a copy isometry `δ` (a classical
//! structure). Operators and channels that commute with `δ` (phase gates and
//! dephasing noise in that basis) can be applied either in parallel on an
//! entangled register or one after another on a single system, with identical
//! results. This crate builds those objects in concrete coordinates, checks
//! the identities numerically, and measures the quantum Fisher information of
//! the resulting metrology protocols.
//!
//! Modules, bottom-up:
//! - [`matrix`]: dense complex linear algebra.
//! - [`classical`]: classical structures and the state ↔ operator bijection.
//! - [`channels`]: Kraus channels and Schur-product (dephasing) channels.
//! - [`protocols`]: parallel vs sequential protocols.
//! - [`metrology`]: symmetric logarithmic derivative, QFI, bounds, scaling.
//! - [`cli`]: command-line front end.

pub mod channels;
pub mod classical;
pub mod cli;
pub mod error;
pub mod matrix;
pub mod metrology;
pub mod protocols;
pub mod random;

pub use error::{Error, Result};
