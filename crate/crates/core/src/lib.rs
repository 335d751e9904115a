//! Independence tests for high-dimensional data built on the spectrum of
//! Kendall's rank correlation matrix.

pub mod cltmoments;
pub mod error;
pub mod func;
pub mod harness;
pub mod hdtests;
pub mod oracle;
pub(crate) mod quad;
pub mod rankcorr;
pub mod simgen;
pub mod spectra;

pub use error::{Error, Result};
pub use func::FunctionDescriptor;
