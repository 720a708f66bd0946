//! Exact polynomial algebra in five variables: coefficient fields, monomial
//! orders, and sparse polynomials.

mod field;
mod monomial;
mod poly;

pub use field::{CoefficientField, FieldDescriptor, PrimeField, Rationals};
pub use monomial::{ExponentVector, Grading, MonomialOrder, OrderKind, NVARS};
pub(crate) use poly::merge_sub_scaled;
pub use poly::{reduce_mod_p, Polynomial, PolynomialJson, Term, TermJson};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("modulus {0} is not an odd prime below 2^31")]
    InvalidModulus(u64),
    #[error("coefficient fields differ: {left} vs {right}")]
    FieldMismatch {
        left: FieldDescriptor,
        right: FieldDescriptor,
    },
    #[error("monomial orders differ")]
    OrderMismatch,
    #[error("cannot parse coefficient {0:?}")]
    CoefficientParse(String),
    #[error("the zero polynomial has no degree")]
    ZeroPolynomial,
    #[error("polynomial is not weighted homogeneous")]
    NotHomogeneous,
    #[error("monomial {mono} does not have weighted degree {expected}")]
    DegreeMismatch {
        mono: ExponentVector,
        expected: u64,
    },
    #[error("denominator vanishes mod {prime}")]
    DenominatorVanishes { prime: u64 },
}
