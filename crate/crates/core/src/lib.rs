//! Mean-field Landau potentials for superradiant phase transitions in spin–boson models,
//! with an exact-diagonalization oracle and partition-function bounds.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod critical;
pub mod ed;
pub mod landau;
pub mod model;
pub mod numerics;
pub mod spinblock;

pub use error::{Result, SptError};
pub use landau::{grad_phi, minimize_global, phi, MinResult, OrderVector, ScanBudget};
pub use model::{reduce, Beta, Family, MeanRule, ModelSpec, PhysicalParams, ReducedParams, Violation, ViolationCode};
