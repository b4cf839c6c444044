//! Truncated series in `hbar` with exact rational coefficients and pole order
//! at most one.
//!
//! The substitution `y = e^{i hbar}` sends a symmetric Laurent object in
//! `y^{1/2}` to a real, even series; each quantum binomial
//! `y^{l/2}-y^{-l/2}` becomes `2i sin(l hbar / 2)`, so kernels contribute a
//! single `1/hbar` pole together with one factor of `i` that the callers
//! account for explicitly.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};

use crate::rational::{qi, Q};
use crate::ylaurent::YLaurent;
use crate::yrational::YRational;
use crate::{Error, Result};

/// Sparse truncated series `sum_n c_n hbar^n`, `n >= -1`, kept modulo
/// `hbar^{order+1}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HbarSeries {
    coeffs: BTreeMap<i64, Q>,
    order: i64,
}

impl HbarSeries {
    pub fn zero(order: i64) -> Self {
        HbarSeries {
            coeffs: BTreeMap::new(),
            order,
        }
    }

    pub fn constant(c: Q, order: i64) -> Self {
        let mut s = Self::zero(order);
        s.add_term(0, c);
        s
    }

    pub fn one(order: i64) -> Self {
        Self::constant(qi(1), order)
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn coeff(&self, n: i64) -> Q {
        self.coeffs.get(&n).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Q)> {
        self.coeffs.iter().map(|(&n, c)| (n, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, n: i64, c: Q) {
        assert!(n >= -1, "pole order above one is not supported");
        if n > self.order || c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(n).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&n);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.order = self.order.min(other.order);
        out.coeffs.retain(|&n, _| n <= out.order);
        for (n, c) in other.terms() {
            out.add_term(n, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        HbarSeries {
            coeffs: self.coeffs.iter().map(|(&n, c)| (n, -c.clone())).collect(),
            order: self.order,
        }
    }

    pub fn scale(&self, s: &Q) -> Self {
        if s.is_zero() {
            return Self::zero(self.order);
        }
        HbarSeries {
            coeffs: self.coeffs.iter().map(|(&n, c)| (n, c * s)).collect(),
            order: self.order,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut out = Self::zero(order);
        for (n1, c1) in self.terms() {
            for (n2, c2) in other.terms() {
                if n1 + n2 >= -1 {
                    out.add_term(n1 + n2, c1 * c2);
                } else {
                    // a double pole must cancel in any legal computation;
                    // surface it loudly if it does not
                    panic!("double pole produced in hbar arithmetic");
                }
            }
        }
        out
    }

    /// Substitutes `hbar -> l*hbar`.
    pub fn rescale(&self, l: i64) -> Self {
        assert!(l >= 1);
        let mut out = Self::zero(self.order);
        for (n, c) in self.terms() {
            let mut f = qi(1);
            if n >= 0 {
                for _ in 0..n {
                    f *= qi(l);
                }
            } else {
                f = qi(1) / qi(l);
            }
            out.add_term(n, c * f);
        }
        out
    }

    /// Multiplicative inverse for series whose lowest term has exponent 0 or 1.
    ///
    /// A series known modulo `hbar^{N+1}` with valuation `v` has an inverse
    /// known modulo `hbar^{N+1-2v}`; the result order reflects that.
    pub fn inv(&self) -> Result<Self> {
        let low = *self
            .coeffs
            .keys()
            .next()
            .ok_or_else(|| Error::domain("inverse of zero hbar series"))?;
        if low < 0 || low > 1 {
            return Err(Error::domain(format!(
                "inverse supported only for valuation 0 or 1, got {low}"
            )));
        }
        let out_order = self.order - 2 * low;
        let lead = self.coeff(low);
        // write self = lead * hbar^low * (1 + u), invert the unit part
        let unit_order = self.order - low;
        let mut u = Self::zero(unit_order);
        for (n, c) in self.terms() {
            if n != low {
                u.add_term(n - low, c / lead.clone());
            }
        }
        let mut geom = Self::one(unit_order);
        let mut pw = Self::one(unit_order);
        for _ in 0..(unit_order + 2).max(1) {
            pw = pw.mul(&u).neg();
            if pw.is_zero() {
                break;
            }
            geom = geom.add(&pw);
        }
        let mut out = Self::zero(out_order);
        for (n, c) in geom.terms() {
            out.add_term(n - low, c / lead.clone());
        }
        Ok(out)
    }

    /// Divides by `hbar^k`; errors if a pole of order above one appears.
    pub fn shifted_down(&self, k: i64) -> Result<Self> {
        let mut out = Self::zero(self.order - k);
        for (n, c) in self.terms() {
            if n - k < -1 {
                return Err(Error::domain(
                    "shift would create a pole of order above one",
                ));
            }
            out.add_term(n - k, c.clone());
        }
        Ok(out)
    }

    /// Restricts to terms of exponent at most `order`.
    pub fn truncated(&self, order: i64) -> Self {
        let mut out = Self::zero(order);
        for (n, c) in self.terms() {
            out.add_term(n, c.clone());
        }
        out
    }

    /// True when all odd-power coefficients vanish.
    pub fn is_even(&self) -> bool {
        self.terms().all(|(n, _)| n % 2 == 0)
    }

    /// `2 sin(l*hbar/2) / i` removed: the real series `2 sin(l*hbar/2)`.
    pub fn two_sin_half(l: i64, order: i64) -> Self {
        // 2 sin(l h / 2) = sum_{k>=0} (-1)^k (l/2)^{2k+1} 2 h^{2k+1} / (2k+1)!
        let mut out = Self::zero(order);
        let half_l = Q::new(l.into(), 2.into());
        let mut k: i64 = 0;
        loop {
            let n = 2 * k + 1;
            if n > order {
                break;
            }
            let mut c = qi(2);
            let mut p = qi(1);
            for _ in 0..n {
                p *= &half_l;
            }
            c *= p;
            let mut fact = qi(1);
            for j in 1..=n {
                fact *= qi(j);
            }
            c /= fact;
            if k % 2 == 1 {
                c = -c;
            }
            out.add_term(n, c);
            k += 1;
        }
        out
    }

    /// The real series `1 / (2 sin(l*hbar/2))`, pole order one.
    pub fn csc_half(l: i64, order: i64) -> Self {
        Self::two_sin_half(l, order + 2).inv().expect("sin has valuation 1")
    }

    /// Evaluates numerically (rendering/diagnostics only).
    pub fn eval_f64(&self, h: f64) -> f64 {
        let mut acc = 0.0;
        for (n, c) in self.terms() {
            let cf = rational_to_f64(c);
            acc += cf * h.powi(n as i32);
        }
        acc
    }
}

fn rational_to_f64(x: &Q) -> f64 {
    let n = x.numer();
    let d = x.denom();
    let nf: f64 = n.to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = d.to_string().parse().unwrap_or(f64::NAN);
    nf / df
}

impl fmt::Display for HbarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0 + O(h^{})", self.order + 1);
        }
        let mut first = true;
        for (n, c) in self.terms() {
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
            match n {
                0 => write!(f, "{a}")?,
                1 => {
                    if a.is_one() {
                        write!(f, "h")?
                    } else {
                        write!(f, "{a}*h")?
                    }
                }
                -1 => {
                    if a.is_one() {
                        write!(f, "1/h")?
                    } else {
                        write!(f, "{a}/h")?
                    }
                }
                _ => {
                    if a.is_one() {
                        write!(f, "h^{n}")?
                    } else {
                        write!(f, "{a}*h^{n}")?
                    }
                }
            }
        }
        write!(f, " + O(h^{})", self.order + 1)
    }
}

/// Expansion of a Laurent object under `y^{1/2} = e^{i hbar / 2}`, split into
/// real and imaginary parts (both real rational series).
pub fn expand_laurent(v: &YLaurent, order: i64) -> (HbarSeries, HbarSeries) {
    // y^{e/2} = e^{i e hbar / 2}: coefficient of hbar^n is (e/2)^n i^n / n!
    let mut re = HbarSeries::zero(order);
    let mut im = HbarSeries::zero(order);
    for (e, c) in v.terms() {
        let half_e = Q::new(e.into(), 2.into());
        let mut p = qi(1); // (e/2)^n / n!
        for n in 0..=order {
            if n > 0 {
                p = p * &half_e / qi(n);
            }
            let term = c * &p;
            match n.rem_euclid(4) {
                0 => re.add_term(n, term),
                1 => im.add_term(n, term),
                2 => re.add_term(n, -term),
                3 => im.add_term(n, -term),
                _ => unreachable!(),
            }
        }
    }
    (re, im)
}

/// Expansion of a bar-symmetric Laurent object: real and even by symmetry.
/// Errors on non-symmetric input.
pub fn expand_symmetric(v: &YLaurent, order: i64) -> Result<HbarSeries> {
    if !v.is_symmetric() {
        return Err(Error::domain(
            "hbar expansion of a non-symmetric Laurent object",
        ));
    }
    let (re, im) = expand_laurent(v, order);
    debug_assert!(im.is_zero());
    debug_assert!(re.is_even());
    Ok(re)
}

/// Real and imaginary parts of a complex hbar series.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexHbar {
    pub re: HbarSeries,
    pub im: HbarSeries,
}

impl ComplexHbar {
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

/// Expansion of a rational object under `y^{1/2} = e^{i hbar/2}`, as a
/// complex series with rational coefficients. The pole order at `y = 1`
/// must be at most one.
pub fn expand_rational(v: &YRational, order: i64) -> Result<ComplexHbar> {
    // valuation of the denominator expansion = pole order of the value
    let work = order + 4;
    let (dre, dim) = expand_laurent(v.denominator(), work);
    let dval = [&dre, &dim]
        .iter()
        .filter_map(|s| s.terms().next().map(|(n, _)| n))
        .min()
        .ok_or_else(|| Error::domain("zero denominator in hbar expansion"))?;
    if dval > 1 {
        return Err(Error::domain(format!(
            "pole order {dval} > 1 in hbar expansion of {v}"
        )));
    }
    let (nre, nim) = expand_laurent(v.numerator(), work);
    // multiply by the conjugate: num * conj(den) / |den|^2
    let conj_re = dre.clone();
    let conj_im = dim.neg();
    let pre = nre.mul(&conj_re).sub(&nim.mul(&conj_im));
    let pim = nre.mul(&conj_im).add(&nim.mul(&conj_re));
    let norm = dre.mul(&dre).add(&dim.mul(&dim)); // valuation 2*dval
    let unit = norm.shifted_down(2 * dval)?; // valuation 0, invertible
    let inv_unit = unit.inv()?;
    let re = pre.mul(&inv_unit).shifted_down(2 * dval)?;
    let im = pim.mul(&inv_unit).shifted_down(2 * dval)?;
    Ok(ComplexHbar {
        re: re.truncated(order),
        im: im.truncated(order),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn cosine_expansion() {
        // y^{-1}+1+y = 1 + 2cos(hbar) = 3 - h^2 + h^4/12 - h^6/360 ...
        let v = YLaurent::from_terms([(-2, qi(1)), (0, qi(1)), (2, qi(1))]);
        let s = expand_symmetric(&v, 6).unwrap();
        assert_eq!(s.coeff(0), qi(3));
        assert_eq!(s.coeff(2), qi(-1));
        assert_eq!(s.coeff(4), q(1, 12));
        assert_eq!(s.coeff(6), q(-1, 360));
        assert!(s.is_even());
        // independent factorial-sum oracle: coefficient of h^{2k} is
        // 2 * (-1)^k / (2k)!
        let mut fact = qi(1);
        for j in 1..=6i64 {
            fact *= qi(j);
        }
        assert_eq!(s.coeff(6), qi(-2) / fact);
    }

    #[test]
    fn one_expands_to_one() {
        let s = expand_symmetric(&YLaurent::one(), 8).unwrap();
        assert_eq!(s, HbarSeries::one(8));
    }

    #[test]
    fn csc_expansion() {
        // 1/(y^{1/2}-y^{-1/2}) = (1/i) * 1/(2 sin(h/2)): purely imaginary,
        // and i/(y^{1/2}-y^{-1/2}) = (1/h)(1 + h^2/24 + 7h^4/5760 + ...)
        let v = YRational::kernel(YLaurent::one(), 1);
        let c = expand_rational(&v, 3).unwrap();
        assert!(c.re.is_zero());
        // value = -i * csc_half, so the real series i*value is -im
        let s = c.im.neg();
        assert_eq!(s.coeff(-1), qi(1));
        assert_eq!(s.coeff(1), q(1, 24));
        assert_eq!(s.coeff(3), q(7, 5760));
        assert_eq!(s, HbarSeries::csc_half(1, 3));
        // numeric cross-check at hbar = 0.1 to 12 digits
        let c11 = expand_rational(&v, 11).unwrap();
        let num = c11.im.neg().eval_f64(0.1);
        let exact = 1.0 / (2.0 * (0.05f64).sin());
        assert!((num - exact).abs() < 1e-12, "{num} vs {exact}");
    }

    #[test]
    fn sin_ratio_is_even() {
        // 2sin(h/2)/2sin(l h/2) is an even series
        for l in 1..5 {
            let r = HbarSeries::two_sin_half(1, 9).mul(&HbarSeries::csc_half(l, 9));
            assert!(r.is_even(), "l = {l}: {r}");
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let s = HbarSeries::two_sin_half(3, 8);
        let prod = s.mul(&s.inv().unwrap());
        assert_eq!(prod.coeff(0), qi(1));
        for n in 1..=7 {
            assert!(prod.coeff(n).is_zero(), "n = {n}");
        }
    }
}
