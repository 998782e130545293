//! Gaussian pure-state graph calculus and temporal-mode cluster-state circuits.

pub mod boundary;
pub mod circuits;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod rules;
pub mod samples;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ExactGraphF64 = gaussian::ExactGraph<f64>;
pub type ExactGraphF32 = gaussian::ExactGraph<f32>;
pub type SymplecticOpF64 = gaussian::SymplecticOp<f64>;
pub type SymplecticOpF32 = gaussian::SymplecticOp<f32>;
pub type SimplifiedGraphF64 = rules::SimplifiedGraph<f64>;
pub type SimplifiedGraphF32 = rules::SimplifiedGraph<f32>;
