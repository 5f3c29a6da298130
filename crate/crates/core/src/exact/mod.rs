//! Exact coefficient arithmetic: rationals, polynomials, one quadratic radical.

pub mod linear;
pub mod poly;
pub mod quadratic;
pub mod radical;
pub mod rational;

pub use poly::{Monomial, Poly, VarSet, Vars};
pub use radical::{RadicalCtx, RadicalElement};
pub use rational::{q, qi, Q};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands use different variable lists")]
    VariableMismatch,
    #[error("operands use different defining squares")]
    RadicalMismatch,
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("divisor has zero norm")]
    ZeroNorm,
    #[error("derivative of the radical needs a nonzero defining square")]
    DegenerateRadical,
    #[error("a second independent radical sqrt({0}) is not supported")]
    SecondRadical(String),
    #[error("system is not triangular quadratic: {0}")]
    NotQuadratic(String),
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("matrix is singular")]
    Singular,
}

/// Commutative ring with rational scalars. Enough structure for generic
/// Lie brackets and polynomial evaluation.
pub trait Ring: Clone + std::fmt::Debug {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: &Q) -> Self;
    fn vanishes(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
}

impl Ring for Q {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn scale(&self, c: &Q) -> Self {
        self * c
    }
    fn vanishes(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn zero_like(&self) -> Self {
        <Q as num_traits::Zero>::zero()
    }
    fn one_like(&self) -> Self {
        <Q as num_traits::One>::one()
    }
}
