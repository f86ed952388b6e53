pub mod analysis;
pub mod config;
pub mod error;
pub mod experiment;
pub mod hurst;
pub mod noise;
pub mod psi;
pub mod quadrature;
pub mod synthesis;
pub mod theory;
pub mod validate;
pub mod wavelet;

pub use error::{Error, Result};
