//! Flat-torus lattice spectra, Fourier-multiplier matrix truncations and
//! the noncommutative torus coefficient algebra.

mod connes;
mod lattice;
mod matrix;
mod nctorus;

pub use connes::{connes_rhs, domination_check};
pub use lattice::{lattice_zeta, torus_spectrum, LatticeModel, DEFAULT_BUDGET_MB};
pub use matrix::{
    cantor_index, cube_points, eigenbasis_order, expectation_sequence, hermitian_decompose, matrix_bytes,
    model_eigenbasis, multiplication_matrix, multiplication_matrix_with_power, singular_values, singular_values_real,
    torus_expectation_sequence, FourierMultiplier, HermitianParts, TruncatedOperator,
};
pub use nctorus::{nc_laplacian_eigenvalues, nc_product, nc_star, nc_tau0, nc_torus_spectrum, NCTorusElement};
