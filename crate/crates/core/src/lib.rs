//! Numerical toolkit for spatio-spectral limiting operators `T = B_S P_F B_S`.
//!
//! * [`geometry`]: exact spatial and frequency domains, their measures and
//!   boundary regularity data.
//! * [`dyadic`]: maximal dyadic covers of a domain and the inner/outer
//!   approximations built from them.
//! * [`operator`]: Nyström discretization of `T`, dense spectra and the
//!   Schatten/counting primitives.
//! * [`bounds`]: explicit eigenvalue-distribution bounds and the inequality
//!   checks run against computed spectra.
//! * [`experiments`]: configuration-driven runner and report emitter.

pub mod bounds;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod operator;

pub use error::{Error, Result};
