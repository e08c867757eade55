//! High-precision evaluation and verification of alternating infinite products.

pub mod accel;
pub mod constants;
pub mod error;
pub mod eulerfuncs;
pub mod exprlang;
pub mod harness;
pub mod numkernel;
pub mod products;
pub mod zetagamma;

pub use error::{Error, Result};
pub use numkernel::{BigRational, Real};
