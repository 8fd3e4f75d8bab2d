//! Perturbative two-body parent Hamiltonians for projected entangled pair states.

pub mod decompose;
pub mod double_semion;
pub mod error;
pub mod gadget;
pub mod lattice;
pub mod linalg;
pub mod operator;
pub mod peps;
pub mod scalar;
pub mod sw_global;
pub mod sw_local;
pub mod toric;
pub mod words;

pub use error::{Error, Result};
pub use scalar::{Real, C, CMat, CVec};

pub type C64 = num_complex::Complex<f64>;
pub type Mat64 = CMat<f64>;
