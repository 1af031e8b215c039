//! Operator-valued harmonic analysis on the d-torus.
//!
//! Matrix-valued fields sampled on a uniform lattice with exact
//! trigonometric Fourier calculus, Littlewood-Paley square functions
//! (radial, conic, discrete, truncated), BMO and Carleson functionals,
//! Calderón companion pairs for radial test symbols, and the twisted
//! Fourier algebra of the quantum torus together with its clock-and-shift
//! transference to matrix fields.
//!
//! Everything is pure and deterministic: lattice reductions run in a fixed
//! chunk order so results are bit-identical with and without the
//! `parallel` feature.

pub mod bmo;
pub mod companion;
pub mod cone;
pub mod cubes;
pub mod error;
pub mod field;
pub mod grid;
pub mod hardy;
pub mod interp;
pub mod matrix;
pub mod par;
pub mod qtorus;
pub mod quad;
pub mod riesz;
pub mod scale;
pub mod scalefield;
pub mod square;
pub mod symbols;

pub use error::{Error, Result};

/// Complex double, the scalar type of every field in this crate.
pub type C64 = num_complex::Complex<f64>;

/// Matrix value attached to a lattice point: an element of M_n.
pub type MatrixValue = nalgebra::DMatrix<C64>;
