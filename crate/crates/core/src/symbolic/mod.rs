//! Exact polynomial, rational-function and matrix arithmetic.

pub mod linalg;
pub mod matrix;
mod parse;
pub mod poly;
pub mod rational_fn;

pub use linalg::RatMatrix;
pub use matrix::{det_rational, PolyMatrix};
pub use poly::{fmt_rational, rat, ratio, Monomial, Poly, Rational, Vars};
pub use rational_fn::RationalFn;
