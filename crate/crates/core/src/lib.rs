//! Exact finite-field laboratory for alternating trivectors in dimension up to ten.

pub mod checks;
pub mod divisor;
pub mod error;
pub mod estimators;
pub mod fibration;
pub mod field;
pub mod io;
pub mod loci;
pub mod matrix;
pub mod orbit;
pub mod poly;
pub mod report;
pub mod rng;
pub mod subspace;
pub mod trivector;

pub use error::{Error, Result};
pub use field::PrimeField;
pub use matrix::Matrix;
pub use subspace::{Flag, Subspace};
pub use trivector::{SkewForm, Trivector};
