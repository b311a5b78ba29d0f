#![no_std]
//! Whittle estimation for stationary time series and the hybrid
//! frequency-domain bootstrap for Whittle estimators.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bootstrap;
pub mod boundary;
pub mod error;
pub mod family;
pub mod fft;
pub mod linalg;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod simulation;
pub mod smoothing;
pub mod spectral;
pub mod whittle;
pub mod yule_walker;

pub use error::{Error, Result};
