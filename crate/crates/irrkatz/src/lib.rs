//! Euler transforms of differential operators with unramified irregular
//! singularities and the Kac-Moody root lattice they act on.

pub mod scalar;
pub mod formal;
pub mod cli;
pub mod corpus;
pub mod exponents;
pub mod lattice;
pub mod reduce;
pub mod rootsys;
pub mod weylalg;
