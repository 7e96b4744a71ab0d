//! Field-generic polynomial and q-series algebra.

mod bipoly;
mod perturbed;
mod poly;
mod qseries;
mod scalar;

pub use bipoly::{exact_bivariate_quotient, BiPoly};
pub use perturbed::{Embed, Perturbed};
pub use poly::{from_roots, poly_arith, PolyOp, UniPoly, FLOAT_DIVISIBILITY_TOL};
pub use qseries::{
    q_factorial, q_limit_at_one, q_normalize, FactorialConvention, HalfInt, QLaurent, QRational,
};
pub use scalar::{format_rational, max_norm, parse_rational, to_float_vec, Field, Rational};
