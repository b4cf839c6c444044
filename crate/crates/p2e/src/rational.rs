//! Arbitrary-precision rational scalars and their canonical `p/q` text form.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::{Error, Result};

/// The scalar field: arbitrary-precision rationals.
pub type Q = BigRational;

/// Shorthand constructor from machine integers.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a rational.
pub fn qi(n: i64) -> Q {
    Q::from(BigInt::from(n))
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

/// Exact binomial coefficient `C(n, k)` for `n, k >= 0`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j);
        acc /= BigInt::from(j + 1);
    }
    acc
}

/// Canonical text form: reduced, sign on the numerator, always `p/q`.
pub fn format_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses the canonical `p/q` form (also accepts a bare integer).
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Format(format!("bad rational numerator in {s:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Format(format!("bad rational denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Format(format!("zero denominator in {s:?}")));
    }
    Ok(Q::new(n, d))
}

/// Decimal rendering with a fixed number of fractional digits (rendering only;
/// never used in exact computations).
pub fn decimal(x: &Q, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (x * Q::from(scale.clone())).round();
    let v = scaled.to_integer();
    let neg = v.is_negative();
    let abs = v.abs();
    let int = &abs / &scale;
    let frac = &abs % &scale;
    let mut frac_s = frac.to_string();
    while (frac_s.len() as u32) < digits {
        frac_s.insert(0, '0');
    }
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&int.to_string());
    if digits > 0 {
        out.push('.');
        out.push_str(&frac_s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        for (n, d) in [(3, 1), (-21, 4), (0, 1), (5, 7)] {
            let x = q(n, d);
            assert_eq!(parse_q(&format_q(&x)).unwrap(), x);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 1), BigInt::from(3));
        assert_eq!(binomial(4, 0), BigInt::from(1));
        assert_eq!(binomial(9, 2), BigInt::from(36));
        assert_eq!(binomial(2, 5), BigInt::zero());
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal(&q(-21, 4), 3), "-5.250");
        assert_eq!(decimal(&q(1, 3), 4), "0.3333");
    }
}
