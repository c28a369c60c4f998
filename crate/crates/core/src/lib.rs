//! Quasi-reversibility reconstruction for the Cauchy problem of the Laplace
//! equation on the unit square.

pub mod basis;
pub mod data;
pub mod field;
pub mod forward_bvp;
pub mod metrics;
pub mod operators;
pub mod params;
pub mod qr_solver;

pub use basis::{LineFunction, Quadrature, SineCoeffs};
pub use data::{CauchyData, TestProblem};
pub use field::{Field, Grid};
pub use params::{NoiseMode, RegParams};
