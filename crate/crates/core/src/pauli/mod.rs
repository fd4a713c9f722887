//! Exact Pauli-string operators with polynomial coefficients in `(u, v)`.

mod operator;
mod poly;
mod string;
mod text;

pub(crate) use operator::string_entries;
pub use operator::{PauliOperator, DENSE_DIM_LIMIT};
pub use poly::{BivariatePolynomial, GaussianRational, Variable, MAX_DEGREE};
pub use string::{Letter, PauliString, MAX_SITES};
pub use text::{format_operator, parse_operator, parse_polynomial};
