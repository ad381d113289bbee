//! Bound-state spectra of the central potentials `V(r) = -f(beta/r)/r`
//! (screened and truncated Coulomb) and numerical checks of the
//! Hellmann-Feynman relation `d(beta^2 E)/d beta = -<f(1/r)/r>`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod hft;
pub mod potential;
pub mod report;
pub mod shooting;
pub mod solver;
pub mod spectral;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
pub use potential::{Family, PotentialSpec};
pub use solver::{GridSpec, RadialProblem};
