//! Statistical checks on synthesized paths and the truncated A_n, G_n sums.

pub mod covariance;
pub mod diagnostics;
pub mod holder;
pub mod oracle;
pub mod stats;
pub mod tangent;

pub use covariance::{fbm_covariance, variance_constant};
pub use diagnostics::{truncated_a_n, truncated_g_n};
pub use holder::{estimate_pointwise_holder, smoothness_exponent, SmoothnessReport, VariogramReport};
pub use oracle::oracle_fbm;
pub use tangent::{tangent_convergence, Process, TangentReport};
