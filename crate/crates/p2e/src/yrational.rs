//! Exact rational functions in `y^{1/2}`, kept in reduced canonical form.
//!
//! In practice every denominator that appears is a product of quantum
//! binomials `y^{l/2} - y^{-l/2}`; the representation does not assume it and
//! instead keeps `num/den` fully reduced (polynomial gcd) with the
//! denominator shifted to start at exponent zero and made monic. That makes
//! equality structural and serialized output byte-stable.

use std::fmt;

use num::Zero;

use crate::rational::{qi, Q};
use crate::ylaurent::YLaurent;
use crate::{Error, Result};

/// Reduced fraction of Laurent polynomials in `y^{1/2}`.
///
/// Invariants: `den` is nonzero, has lowest doubled exponent 0, leading
/// (highest) coefficient 1, and shares no polynomial factor with the shifted
/// numerator; zero is `0/1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct YRational {
    num: YLaurent,
    den: YLaurent,
}

impl Default for YRational {
    fn default() -> Self {
        Self::zero()
    }
}

/// Shift a Laurent element so its lowest doubled exponent is 0.
/// Returns the polynomial part and the shift that was removed.
fn shifted(v: &YLaurent) -> (YLaurent, i64) {
    match v.min_doubled_exp() {
        None => (YLaurent::zero(), 0),
        Some(e) => (v.shift(-e), e),
    }
}

/// Euclidean polynomial gcd on min-exponent-0 Laurent elements, normalized
/// monic in the highest coefficient. `gcd(x, 0) = monic(x)`.
fn poly_gcd(a: &YLaurent, b: &YLaurent) -> YLaurent {
    let mut a = a.clone();
    let mut b = b.clone();
    while !b.is_zero() {
        let r = poly_rem(&a, &b);
        a = b;
        b = shifted(&r).0;
    }
    if a.is_zero() {
        return a;
    }
    let lead = a.coeff(a.max_doubled_exp().unwrap());
    a.scale(&(qi(1) / lead))
}

/// Remainder of polynomial division of `a` by `b` (both min-exponent-0).
fn poly_rem(a: &YLaurent, b: &YLaurent) -> YLaurent {
    let bh = b.max_doubled_exp().expect("division by zero polynomial");
    let lead = b.coeff(bh);
    let mut rem = a.clone();
    while let Some(top) = rem.max_doubled_exp() {
        if top < bh {
            break;
        }
        let factor = rem.coeff(top) / lead.clone();
        let term = YLaurent::monomial(top - bh, factor);
        rem = rem.sub(&term.mul(b));
    }
    rem
}

impl YRational {
    pub fn zero() -> Self {
        YRational {
            num: YLaurent::zero(),
            den: YLaurent::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_laurent(YLaurent::one())
    }

    pub fn from_laurent(num: YLaurent) -> Self {
        YRational {
            num,
            den: YLaurent::one(),
        }
    }

    pub fn from_q(c: Q) -> Self {
        Self::from_laurent(YLaurent::constant(c))
    }

    /// `num / (y^{l/2} - y^{-l/2})`.
    pub fn kernel(num: YLaurent, l: i64) -> Self {
        assert!(l >= 1);
        Self::fraction(num, YLaurent::binomial(l))
    }

    /// General `num/den`, reduced to canonical form.
    pub fn fraction(num: YLaurent, den: YLaurent) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        YRational { num, den }.normalized()
    }

    fn normalized(self) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        let (dp, dshift) = shifted(&self.den);
        let (np, nshift) = shifted(&self.num);
        let g = poly_gcd(&np, &dp);
        let np = np.divide_exact(&g).expect("gcd divides");
        let dp = dp.divide_exact(&g).expect("gcd divides");
        // make the denominator monic; push the unit into the numerator
        let lead = dp.coeff(dp.max_doubled_exp().unwrap());
        let den = dp.scale(&(qi(1) / lead.clone()));
        let num = np.shift(nshift - dshift).scale(&(qi(1) / lead));
        YRational { num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numerator(&self) -> &YLaurent {
        &self.num
    }

    pub fn denominator(&self) -> &YLaurent {
        &self.den
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        YRational { num, den }.normalized()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        YRational {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        YRational {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
        .normalized()
    }

    pub fn mul_laurent(&self, other: &YLaurent) -> Self {
        YRational {
            num: self.num.mul(other),
            den: self.den.clone(),
        }
        .normalized()
    }

    pub fn scale(&self, s: &Q) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        YRational {
            num: self.num.scale(s),
            den: self.den.clone(),
        }
    }

    /// Divides by the binomial `y^{l/2} - y^{-l/2}` (negative `l` flips sign).
    pub fn div_binomial(&self, l: i64) -> Self {
        assert!(l != 0);
        let (l, num) = if l < 0 {
            (-l, self.num.neg())
        } else {
            (l, self.num.clone())
        };
        YRational {
            num,
            den: self.den.mul(&YLaurent::binomial(l)),
        }
        .normalized()
    }

    /// Divides by a Laurent element.
    pub fn div_laurent(&self, other: &YLaurent) -> Self {
        assert!(!other.is_zero());
        YRational {
            num: self.num.clone(),
            den: self.den.mul(other),
        }
        .normalized()
    }

    /// Substitutes `y^{1/2} -> y^{l/2}` throughout.
    pub fn rescale_exponents(&self, l: i64) -> Self {
        YRational {
            num: self.num.rescale_exponents(l),
            den: self.den.rescale_exponents(l),
        }
        .normalized()
    }

    /// Exact reduction to a Laurent element. Errors when a denominator
    /// remains; that always signals a wrong Hamiltonian normalization
    /// upstream.
    pub fn reduce_to_laurent(&self) -> Result<YLaurent> {
        if self.den.is_one() {
            Ok(self.num.clone())
        } else {
            Err(Error::integrity(format!(
                "denominator fails to cancel: {self}"
            )))
        }
    }

    /// Exact value at `y = 1` when finite (the representation being reduced,
    /// a vanishing denominator there means a genuine pole).
    pub fn eval_one(&self) -> Result<Q> {
        let d = self.den.eval_one();
        if d.is_zero() {
            return Err(Error::domain(format!(
                "value at y = 1 is not finite for {self}"
            )));
        }
        Ok(self.num.eval_one() / d)
    }

    /// `lim_{y->1} (y^{1/2}-y^{-1/2}) * self`: how a quantum wall coefficient
    /// compares with its classical counterpart.
    pub fn classical_limit(&self) -> Result<Q> {
        self.mul_laurent(&YLaurent::binomial(1)).eval_one()
    }

    pub fn bar(&self) -> Self {
        YRational {
            num: self.num.bar(),
            den: self.den.bar(),
        }
        .normalized()
    }
}

impl fmt::Display for YRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}
