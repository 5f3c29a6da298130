use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::AlgebraError;

/// Exact rational scalar. Always kept in lowest terms with a positive denominator.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Parse `7`, `-3/4` or ` 19/103680 `.
pub fn parse_q(s: &str) -> Result<Q, AlgebraError> {
    let s = s.trim();
    let bad = || AlgebraError::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(AlgebraError::DivisionByZero);
    }
    Ok(Q::new(n, d))
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Rational square root when `x` is a perfect square.
pub fn sqrt_q(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

pub fn to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

/// Write |n| = k² t with t free of prime squares below the trial bound.
pub fn square_part(n: &BigInt) -> (BigInt, BigInt) {
    let mut t = n.abs();
    let mut k = BigInt::one();
    let mut p = BigInt::from(2);
    let bound = BigInt::from(1_000_000);
    while &p * &p <= t && p < bound {
        let p2 = &p * &p;
        while (&t % &p2).is_zero() {
            t /= &p2;
            k *= &p;
        }
        p += 1;
    }
    (k, t)
}
