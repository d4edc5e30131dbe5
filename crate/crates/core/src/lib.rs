//! Discovery and certification of polynomial relaxed Lyapunov functions.
//!
//! The crate provides exact symbolic machinery for polynomial vector fields:
//! sparse rational-coefficient polynomials, Lie derivatives, Groebner bases
//! with membership certificates, a first-order formula layer over polynomial
//! constraints, real quantifier elimination by cylindrical decomposition, the
//! relaxed-Lyapunov search itself, and an independent floating-point
//! simulator for cross-checking certificates numerically.

pub mod dynamics;
pub mod ideals;
pub mod logic;
pub mod parse;
pub mod poly;
pub mod rational;
pub mod realqe;
pub mod rlfg;
pub mod simcheck;
