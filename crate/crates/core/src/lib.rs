//! Exact symbolic kernel for super differential polynomials, Hamiltonian
//! superoperators and conformal superalgebras given by structure constants.

pub mod conformal;
pub mod diffop;
pub mod frontend;
pub mod scalar;
pub mod superpoly;
pub mod varcalc;
pub mod verdict;

pub use scalar::Scalar;
pub use superpoly::{Family, Generator, Monomial, Parity, PolyParity, SuperPoly};
