//! The Weyl algebra engine.

pub mod local;
pub mod operator;
pub mod parse;
pub mod poly;
pub mod ratfunc;
pub mod transforms;

use thiserror::Error;

use crate::scalar::Rat;

pub use local::{
    char_poly, homogeneous_part, is_regular_singular, localize, newton_polygon, theta_expand,
    weight, Location, NewtonPolygon, ThetaExpansion,
};
pub use operator::DiffOperator;
pub use parse::{parse_operator, ParseError};
pub use poly::Poly;
pub use ratfunc::RatFunc;
pub use transforms::{ad_power, deg_of, euler, exp_twist, laplace, laplace_inv, prim};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeylError {
    #[error("zero operator")]
    ZeroOperator,
    #[error("coefficients are not Laurent polynomials at {0}")]
    NotLaurent(String),
    #[error("operation needs polynomial coefficients")]
    RationalCoefficients,
    #[error("Euler transform parameter {0} is an integer")]
    IntegerEulerParameter(Rat),
}
