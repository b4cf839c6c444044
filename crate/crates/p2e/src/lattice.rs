//! Rank-2 lattice classes `m = (a, b)`, the monomial exponents of the torus.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent of the torus monomial `z^{(a,b)}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeClass {
    pub a: i64,
    pub b: i64,
}

impl LatticeClass {
    pub const ZERO: LatticeClass = LatticeClass { a: 0, b: 0 };

    pub fn new(a: i64, b: i64) -> Self {
        LatticeClass { a, b }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn add(&self, o: &Self) -> Self {
        LatticeClass::new(self.a + o.a, self.b + o.b)
    }

    pub fn neg(&self) -> Self {
        LatticeClass::new(-self.a, -self.b)
    }

    pub fn scale(&self, l: i64) -> Self {
        LatticeClass::new(self.a * l, self.b * l)
    }

    /// Plain determinant pairing `a1*b2 - a2*b1` (unnormalized).
    pub fn det(&self, o: &Self) -> i64 {
        self.a * o.b - o.a * self.b
    }

    /// Unique decomposition `m = l * m0` with `m0` primitive and `l >= 1`.
    /// Zero has no primitive part.
    pub fn primitive_part(&self) -> Option<(Self, i64)> {
        if self.is_zero() {
            return None;
        }
        let g = gcd(self.a.unsigned_abs(), self.b.unsigned_abs()) as i64;
        Some((LatticeClass::new(self.a / g, self.b / g), g))
    }

    pub fn is_primitive(&self) -> bool {
        matches!(self.primitive_part(), Some((_, 1)))
    }

    /// True when `self` and `o` span the same oriented direction.
    pub fn same_direction(&self, o: &Self) -> bool {
        self.det(o) == 0 && self.a * o.a + self.b * o.b > 0
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// The normalized skew pairing `kappa * (a1*b2 - a2*b1)`; `kappa` is the
/// diagram-level lattice normalization (default 3).
pub fn skew_pair(kappa: i64, m1: &LatticeClass, m2: &LatticeClass) -> i64 {
    kappa * m1.det(m2)
}

impl fmt::Debug for LatticeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

impl fmt::Display for LatticeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skew_calibration() {
        let e1 = LatticeClass::new(1, 0);
        let e2 = LatticeClass::new(0, 1);
        assert_eq!(skew_pair(3, &e1, &e2), 3);
        assert_eq!(skew_pair(3, &e1, &e1), 0);
        let m = LatticeClass::new(-1, 1);
        assert_eq!(skew_pair(3, &e1, &m), 3);
        assert_eq!(skew_pair(3, &m, &e1), -3);
    }

    #[test]
    fn primitive_decomposition() {
        let m = LatticeClass::new(0, -4);
        let (m0, l) = m.primitive_part().unwrap();
        assert_eq!(m0, LatticeClass::new(0, -1));
        assert_eq!(l, 4);
        assert!(LatticeClass::new(2, -3).is_primitive());
        assert!(LatticeClass::ZERO.primitive_part().is_none());
    }
}
