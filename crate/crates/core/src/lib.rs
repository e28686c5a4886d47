//! Finite-element solver and verification harness for the stochastic
//! thin-film equation with quadratic mobility on a periodic rectangle.

pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod grid;
pub mod harness;
pub mod integrator;
pub mod io;
pub mod material;
pub mod noise;
#[cfg(feature = "verification")]
pub mod oracle;
pub mod scheme;

pub use error::{Error, Result};
pub use grid::{EdgeCoeffs, Field, Grid};
