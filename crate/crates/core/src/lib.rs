//! Weighted means of positive definite matrices: the α-z Bures–Wasserstein
//! right mean, power and Cartan means, the Wasserstein mean, the α-z
//! divergence, and a randomized harness that checks their known inequalities.

// Guards are written as `!(x > 0.0)` so that NaN is rejected along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod divergences;
pub mod error;
pub mod io;
pub mod linalg;
pub mod means;
pub mod rightmean;
pub mod solver;
pub mod structure;
pub mod verify;
pub mod wasserstein;

pub use divergences::{bures_wasserstein_distance, phi_alpha_z, AlphaZ};
pub use error::{Error, ErrorKind, Result};
pub use linalg::{Hermitian, PdMatrix, PdRng};
pub use means::{arithmetic_mean, cartan_mean, harmonic_mean, power_mean, PdTuple, WeightVector};
pub use rightmean::right_mean;
pub use solver::{SolverConfig, SolverReport, SolverStatus};
pub use wasserstein::wasserstein_mean;
