//! Numerical laboratory for renormalization and rigidity of circle maps with a break point.
//!
//! Positions, derivatives and every derived statistic are carried in MPFR reals of a
//! configurable width; combinatorial data (partial quotients, return times, orbit indices)
//! is exact.

pub mod cli;
pub mod conjugacy;
pub mod error;
pub mod maps;
pub mod numerics;
pub mod partition;
pub mod renorm;
pub mod rotations;
pub mod zygmund;

pub use error::{Error, Result};
pub use numerics::{BigReal, Precision};
