//! Numerical laboratory for singular traces: logarithmic averages, zeta
//! residues and heat-kernel functionals of singular-value sequences, with
//! flat and noncommutative torus models to check them against.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimate;
pub mod harness;
pub mod maps;
pub mod models;
pub mod numerics;
pub mod seq;
pub mod trend;

pub use error::{Error, Result};
