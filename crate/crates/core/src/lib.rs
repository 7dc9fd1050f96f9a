//! Laguerre (complex Wishart) process: simulation, matrix-argument
//! hypergeometric functions, closed-form laws and Monte Carlo checks.

pub mod error;
pub mod hermitian;
pub mod laws;
pub mod mc;
pub mod numeric;
pub mod process;
pub mod quad;
pub mod specfun;
pub mod symfun;

pub use error::{Error, Result};
