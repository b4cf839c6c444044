//! Exact Laurent polynomials in `y^{1/2}` over the rationals.
//!
//! Half-integer exponents are stored doubled: the key `e` holds the
//! coefficient of `y^{e/2}`. The "bar" involution is `y^{1/2} -> y^{-1/2}`;
//! elements fixed by it are the symmetric (palindromic) ones, which is where
//! every refined invariant lives.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};

use crate::rational::{qi, Q};
use crate::{Error, Result};

/// Sparse Laurent polynomial in `y^{1/2}` with rational coefficients.
///
/// Invariant: no stored zero coefficients; iteration order is by exponent.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct YLaurent {
    /// doubled exponent -> coefficient of `y^{e/2}`
    terms: BTreeMap<i64, Q>,
}

impl YLaurent {
    pub fn zero() -> Self {
        YLaurent {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::monomial(0, qi(1))
    }

    /// `c * y^{e/2}` with `e` the doubled exponent.
    pub fn monomial(doubled_exp: i64, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(doubled_exp, c);
        }
        YLaurent { terms }
    }

    pub fn from_terms(pairs: impl IntoIterator<Item = (i64, Q)>) -> Self {
        let mut out = Self::zero();
        for (e, c) in pairs {
            out.add_term(e, c);
        }
        out
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(0, c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(0).is_one()
    }

    /// Coefficient of `y^{e/2}`.
    pub fn coeff(&self, doubled_exp: i64) -> Q {
        self.terms.get(&doubled_exp).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Q)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn min_doubled_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_doubled_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn add_term(&mut self, doubled_exp: i64, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(doubled_exp).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&doubled_exp);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        YLaurent {
            terms: self.terms.iter().map(|(&e, c)| (e, -c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &Q) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        YLaurent {
            terms: self.terms.iter().map(|(&e, c)| (e, c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }

    /// Multiplies by `y^{e/2}`.
    pub fn shift(&self, doubled_exp: i64) -> Self {
        YLaurent {
            terms: self
                .terms
                .iter()
                .map(|(&e, c)| (e + doubled_exp, c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// The bar involution `y^{1/2} -> y^{-1/2}`.
    pub fn bar(&self) -> Self {
        YLaurent {
            terms: self.terms.iter().map(|(&e, c)| (-e, c.clone())).collect(),
        }
    }

    /// True when fixed by the bar involution (Poincare-duality symmetry).
    pub fn is_symmetric(&self) -> bool {
        self == &self.bar()
    }

    /// Substitutes `y^{1/2} -> y^{l/2}`, i.e. scales all exponents by `l`.
    pub fn rescale_exponents(&self, l: i64) -> Self {
        assert!(l >= 1, "exponent rescale wants l >= 1");
        YLaurent {
            terms: self.terms.iter().map(|(&e, c)| (e * l, c.clone())).collect(),
        }
    }

    /// Sum of all coefficients, i.e. the value at `y = 1`.
    pub fn eval_one(&self) -> Q {
        let mut acc = Q::zero();
        for (_, c) in self.terms() {
            acc += c;
        }
        acc
    }

    /// Evaluates at `y = -1`, i.e. `y^{1/2} = i`, over the Gaussian rationals,
    /// returning `(real, imaginary)` parts.
    pub fn eval_minus_one_gaussian(&self) -> (Q, Q) {
        let mut re = Q::zero();
        let mut im = Q::zero();
        for (e, c) in self.terms() {
            // i^e cycles with period 4 in the doubled exponent
            match e.rem_euclid(4) {
                0 => re += c,
                1 => im += c,
                2 => re -= c,
                3 => im -= c,
                _ => unreachable!(),
            }
        }
        (re, im)
    }

    /// Evaluates at `y = -1` (`y^{1/2} = i`), requiring the imaginary part to
    /// vanish; guaranteed for symmetric input.
    pub fn eval_minus_one(&self) -> Result<Q> {
        let (re, im) = self.eval_minus_one_gaussian();
        if !im.is_zero() {
            return Err(Error::domain(format!(
                "evaluation at y = -1 has nonzero imaginary part {im} on non-symmetric input"
            )));
        }
        Ok(re)
    }

    /// Evaluates with the rational value `v` substituted for `y^{1/2}`.
    pub fn eval_sqrt(&self, v: &Q) -> Result<Q> {
        if v.is_zero() && self.min_doubled_exp().map(|e| e < 0).unwrap_or(false) {
            return Err(Error::domain("evaluation of a pole at y^{1/2} = 0"));
        }
        let mut acc = Q::zero();
        for (e, c) in self.terms() {
            acc += c * pow_q(v, e);
        }
        Ok(acc)
    }

    /// Exact division; `None` when `rhs` does not divide `self`.
    pub fn divide_exact(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let rl = rhs.min_doubled_exp().unwrap();
        let rh = rhs.max_doubled_exp().unwrap();
        let sl = self.min_doubled_exp().unwrap();
        let sh = self.max_doubled_exp().unwrap();
        if sh - sl < rh - rl {
            return None;
        }
        // An exact quotient has exponents confined to [sl - rl, sh - rh].
        let quot_min = sl - rl;
        let mut rem = self.clone();
        let mut quot = Self::zero();
        let lead = rhs.coeff(rh);
        while !rem.is_zero() {
            let top = rem.max_doubled_exp().unwrap();
            let shift = top - rh;
            if shift < quot_min {
                return None;
            }
            let factor = rem.coeff(top) / lead.clone();
            let term = Self::monomial(shift, factor);
            quot = quot.add(&term);
            rem = rem.sub(&term.mul(rhs));
        }
        Some(quot)
    }

    /// The quantum binomial `y^{l/2} - y^{-l/2}`.
    pub fn binomial(l: i64) -> Self {
        assert!(l != 0);
        Self::from_terms([(l, qi(1)), (-l, qi(-1))])
    }

    /// The symmetric quantum integer `[n]_y = (y^{n/2}-y^{-n/2})/(y^{1/2}-y^{-1/2})`.
    pub fn quantum_integer(n: i64) -> Self {
        assert!(n >= 0);
        let mut out = Self::zero();
        for j in 0..n {
            out.add_term(2 * j - (n - 1), qi(1));
        }
        out
    }

    /// `[n]_y` in the variable `y^{l/2}`: `(y^{ln/2}-y^{-ln/2})/(y^{l/2}-y^{-l/2})`.
    pub fn quantum_integer_rescaled(n: i64, l: i64) -> Self {
        Self::quantum_integer(n).rescale_exponents(l)
    }

    /// The polynomial `[n]'_y = 1 + y + ... + y^{n-1}` (integer exponents),
    /// used for the `[3d]_y` divisibility check.
    pub fn bracket_poly(n: i64) -> Self {
        let mut out = Self::zero();
        for j in 0..n {
            out.add_term(2 * j, qi(1));
        }
        out
    }

    /// Whether `[n]_y = 1 + y + ... + y^{n-1}` divides `self` up to a shift by
    /// a power of `y^{1/2}`, i.e. divisibility in the Laurent ring.
    pub fn divisible_by_bracket(&self, n: i64) -> bool {
        if self.is_zero() {
            return true;
        }
        let shifted = self.shift(-self.min_doubled_exp().unwrap());
        shifted.divide_exact(&Self::bracket_poly(n)).is_some()
    }
}

fn pow_q(v: &Q, e: i64) -> Q {
    let mut p = qi(1);
    for _ in 0..e.unsigned_abs() {
        p *= v;
    }
    if e < 0 {
        qi(1) / p
    } else {
        p
    }
}

impl fmt::Debug for YLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for YLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            if first {
                first = false;
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if e == 0 {
                write!(f, "{a}")?;
            } else {
                if !a.is_one() {
                    write!(f, "{a}*")?;
                }
                if e == 2 {
                    write!(f, "y")?;
                } else if e % 2 == 0 {
                    write!(f, "y^{}", e / 2)?;
                } else {
                    write!(f, "y^({e}/2)")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn sym3() -> YLaurent {
        // y^{-1} + 1 + y
        YLaurent::from_terms([(-2, qi(1)), (0, qi(1)), (2, qi(1))])
    }

    #[test]
    fn bar_is_involution_and_multiplicative() {
        let a = YLaurent::from_terms([(-3, q(1, 2)), (0, qi(2)), (1, qi(-1))]);
        let b = YLaurent::from_terms([(-1, qi(1)), (4, q(2, 3))]);
        assert_eq!(a.bar().bar(), a);
        assert_eq!(a.mul(&b).bar(), a.bar().mul(&b.bar()));
    }

    #[test]
    fn symmetry_predicate() {
        assert!(sym3().is_symmetric());
        assert!(!YLaurent::monomial(1, qi(1)).is_symmetric());
    }

    #[test]
    fn eval_points() {
        assert_eq!(sym3().eval_one(), qi(3));
        // oracle: i^{-2} + i^0 + i^2 = -1 + 1 - 1 = -1
        assert_eq!(sym3().eval_minus_one().unwrap(), qi(-1));
        // even-d shape vanishes at y = -1
        let even = YLaurent::from_terms([(-5, qi(1)), (-3, qi(1)), (-1, qi(1)), (1, qi(1)), (3, qi(1)), (5, qi(1))]);
        assert_eq!(even.eval_minus_one().unwrap(), qi(0));
        // generic rational point for y^{1/2}
        assert_eq!(sym3().eval_sqrt(&qi(2)).unwrap(), q(21, 4));
        // non-symmetric input with nonzero imaginary part is rejected
        assert!(YLaurent::monomial(1, qi(1)).eval_minus_one().is_err());
    }

    #[test]
    fn eval_one_is_ring_hom() {
        let a = YLaurent::from_terms([(-3, q(1, 2)), (2, qi(5))]);
        let b = YLaurent::from_terms([(1, qi(-2)), (2, q(7, 3))]);
        assert_eq!(a.mul(&b).eval_one(), a.eval_one() * b.eval_one());
        assert_eq!(a.add(&b).eval_one(), a.eval_one() + b.eval_one());
    }

    #[test]
    fn quantum_integers() {
        assert_eq!(YLaurent::quantum_integer(1), YLaurent::one());
        assert_eq!(YLaurent::quantum_integer(3), sym3());
        // defining property: [n]_y * (y^{1/2}-y^{-1/2}) = y^{n/2}-y^{-n/2}
        for n in 1..8 {
            assert_eq!(
                YLaurent::quantum_integer(n).mul(&YLaurent::binomial(1)),
                YLaurent::binomial(n)
            );
        }
    }

    #[test]
    fn exact_division() {
        let num = YLaurent::binomial(6);
        let den = YLaurent::binomial(2);
        let quot = num.divide_exact(&den).unwrap();
        assert_eq!(quot, YLaurent::quantum_integer_rescaled(3, 2));
        assert!(num.divide_exact(&YLaurent::binomial(4)).is_none());
    }

    #[test]
    fn bracket_divisibility() {
        // [3]_y | y^{-1}+1+y (it is y^{-1} * (1+y+y^2))
        assert!(sym3().divisible_by_bracket(3));
        assert!(!sym3().divisible_by_bracket(2));
    }
}
