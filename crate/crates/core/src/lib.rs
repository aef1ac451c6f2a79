//! Complete sets of cyclic mutually unbiased bases in dimension `d = 2^m`.
//!
//! A symmetric `B ∈ M_m(F₂)` determines a symplectic `C = [[B, I], [I, 0]]` whose orbit
//! partitions the non-identity Pauli operators into `d + 1` commuting classes, and a
//! Clifford unitary `U` with exact entries in `ℤ[ζ₈, 1/√2]` whose powers give the bases.

pub mod certificate;
pub mod cyclo;
pub mod error;
pub mod fib;
pub mod gf2;
pub mod pauli;
pub mod poly;
pub mod search;
pub mod symplectic;
pub mod unitary;

pub use error::{Error, Result};
pub use gf2::BitMatrix;
pub use poly::Poly2;
