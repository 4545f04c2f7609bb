//! Numerical building blocks: quadrature, polynomials, special functions.

pub mod polynomial;
pub mod quadrature;
pub mod special;

pub use polynomial::Polynomial;
pub use quadrature::GaussLegendre;
