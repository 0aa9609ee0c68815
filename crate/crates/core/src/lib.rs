//! Exact verification of genus-zero and genus-one Frobenius manifold
//! identities over truncated multivariate power series with rational
//! coefficients.

pub mod format;
pub mod frobenius;
pub mod genus1;
pub mod library;
pub mod linalg;
pub mod model;
pub mod report;
pub mod scalar;
pub mod series;
pub mod span;
pub mod suite;
