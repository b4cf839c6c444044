//! Exact geometry of the region above the parabola `y = -x^2/2`, its band
//! decomposition, the piecewise-affine grading functions, the monodromy data
//! of the glued affine manifold, and the unit shear symmetry.

use std::fmt;


use crate::lattice::LatticeClass;
use crate::rational::{q, qi, Q};
use crate::{Error, Result};

/// A point of the plane with exact rational coordinates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct RationalPoint {
    pub x: Q,
    pub y: Q,
}

impl RationalPoint {
    pub fn new(x: Q, y: Q) -> Self {
        RationalPoint { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Self::new(qi(x), qi(y))
    }

    /// Membership in the closed region `y >= -x^2/2`.
    pub fn in_closed_region(&self) -> bool {
        self.y >= -(&self.x * &self.x) / qi(2)
    }

    /// Membership in the open region `y > -x^2/2`.
    pub fn in_open_region(&self) -> bool {
        self.y > -(&self.x * &self.x) / qi(2)
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The marked point `s_n = (n, -n^2/2)` on the parabola.
pub fn s_point(n: i64) -> RationalPoint {
    RationalPoint::new(qi(n), q(-n * n, 2))
}

/// Band `n`: the strip above the segment from `(n-1/2, -n(n-1)/2)` to
/// `(n+1/2, -n(n+1)/2)` between the two vertical half-lines at its ends.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Band {
    pub n: i64,
}

impl Band {
    pub fn corners(&self) -> (RationalPoint, RationalPoint) {
        let n = self.n;
        (
            RationalPoint::new(q(2 * n - 1, 2), q(-n * (n - 1), 2)),
            RationalPoint::new(q(2 * n + 1, 2), q(-n * (n + 1), 2)),
        )
    }

    /// The base segment has slope `-n`.
    pub fn base_slope(&self) -> Q {
        qi(-self.n)
    }

    /// Height of the base segment over abscissa `x` (valid on the band).
    pub fn base_y(&self, x: &Q) -> Q {
        // line through (n, -n^2/2) with slope -n
        let n = qi(self.n);
        -&n * x + &n * &n / qi(2)
    }
}

/// Location of a point in the band decomposition.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BandLocation {
    Interior(i64),
    /// On the shared vertical wall `x = n + 1/2` between bands `n` and `n+1`.
    Boundary(i64, i64),
}

/// Which band contains `p`; errors if `p` lies strictly below the band region.
pub fn band_of(p: &RationalPoint) -> Result<BandLocation> {
    // band index from x: n - 1/2 <= x <= n + 1/2
    let lower = ((&p.x * qi(2) - qi(1)) / qi(2)).ceil().to_integer();
    let n: i64 = i64::try_from(lower).map_err(|_| Error::domain("coordinate out of range"))?;
    let half = q(1, 2);
    let on_boundary_right = &p.x - qi(n) == half;
    let loc = if on_boundary_right {
        BandLocation::Boundary(n, n + 1)
    } else {
        BandLocation::Interior(n)
    };
    // check the point is on or above the base segment of its band(s)
    let check = |n: i64| -> bool { p.y >= (Band { n }).base_y(&p.x) };
    let ok = match loc {
        BandLocation::Interior(n) => check(n),
        BandLocation::Boundary(n, m) => check(n) && check(m),
    };
    if !ok {
        return Err(Error::domain(format!("{p} lies below the band region")));
    }
    Ok(loc)
}

/// Argument for the grading evaluation: a band or an exact point.
#[derive(Clone, Debug)]
pub enum PhiKind {
    Band(i64),
    Point(Q),
}

/// The differential grading of a monomial class: `-a n - b` on band `n`,
/// `-a x - b` at a point with abscissa `x`. The two agree when `x = n`.
pub fn phi_eval(kind: &PhiKind, m: &LatticeClass) -> Q {
    match kind {
        PhiKind::Band(n) => qi(-m.a * n - m.b),
        PhiKind::Point(x) => -qi(m.a) * x - qi(m.b),
    }
}

/// The piecewise-affine function `-n x - y + n^2/2` on band `n`.
pub fn phi_band_function(n: i64, p: &RationalPoint) -> Q {
    qi(-n) * &p.x - &p.y + q(n * n, 2)
}

/// 2x2 integer matrix.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MonodromyMatrix(pub [[i64; 2]; 2]);

impl MonodromyMatrix {
    pub fn mul(&self, o: &Self) -> Self {
        let a = &self.0;
        let b = &o.0;
        MonodromyMatrix([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn det(&self) -> i64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> i64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn is_identity(&self) -> bool {
        self.0 == [[1, 0], [0, 1]]
    }
}

impl fmt::Display for MonodromyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{},{}],[{},{}]]",
            self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]
        )
    }
}

/// The three gluing matrices of the singular affine structure, in the order
/// they compose around an anticlockwise loop.
pub fn gluing_matrices() -> [MonodromyMatrix; 3] {
    [
        MonodromyMatrix([[3, -4], [1, -1]]),
        MonodromyMatrix([[3, -1], [4, -1]]),
        MonodromyMatrix([[0, -1], [1, 2]]),
    ]
}

/// Product of the three gluing matrices: the total monodromy around a loop
/// encircling the three singular points.
pub fn monodromy_check() -> MonodromyMatrix {
    let [a, b, c] = gluing_matrices();
    a.mul(&b).mul(&c)
}

/// The unit shear `(x, y) -> (x+1, y-x-1/2)`, `(a, b) -> (a, b-a)`, iterated
/// `k` times (negative `k` inverts). It preserves the parabola `y = -x^2/2`,
/// maps `s_n` to `s_{n+k}`, and fixes every vertical class `(0, -d)`.
pub fn psi_shift(k: i64, p: &RationalPoint, m: &LatticeClass) -> (RationalPoint, LatticeClass) {
    (psi_shift_point(k, p), psi_shift_class(k, m))
}

pub fn psi_shift_point(k: i64, p: &RationalPoint) -> RationalPoint {
    // closed form of the k-th iterate
    let kq = qi(k);
    RationalPoint::new(&p.x + &kq, &p.y - &kq * &p.x - &kq * &kq / qi(2))
}

pub fn psi_shift_class(k: i64, m: &LatticeClass) -> LatticeClass {
    LatticeClass::new(m.a, m.b - k * m.a)
}

/// Direction of the two initial supports at `s_n`: the tangent line of the
/// parabola there has direction `(1, -n)`.
pub fn tangent_dir(n: i64) -> (i64, i64) {
    (1, -n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    #[test]
    fn region_membership() {
        assert!(RationalPoint::from_ints(0, 5).in_open_region());
        assert!(s_point(2).in_closed_region());
        assert!(!s_point(2).in_open_region());
        assert!(!RationalPoint::from_ints(0, -1).in_closed_region());
    }

    #[test]
    fn band_lookup() {
        assert_eq!(
            band_of(&RationalPoint::from_ints(0, 5)).unwrap(),
            BandLocation::Interior(0)
        );
        assert_eq!(
            band_of(&RationalPoint::new(q(1, 2), qi(3))).unwrap(),
            BandLocation::Boundary(0, 1)
        );
        // s_1 = (1, -1/2) sits at the bottom vertex of band 1
        assert_eq!(band_of(&s_point(1)).unwrap(), BandLocation::Interior(1));
        assert!(band_of(&RationalPoint::from_ints(0, -3)).is_err());
    }

    #[test]
    fn bands_tile_and_share_corners() {
        for n in -4..4 {
            let (_, right) = (Band { n }).corners();
            let (left_next, _) = (Band { n: n + 1 }).corners();
            assert_eq!(right, left_next);
            // the base segment touches the parabola exactly at s_n
            let sn = s_point(n);
            assert_eq!((Band { n }).base_y(&sn.x), sn.y);
            assert!(right.in_closed_region());
            assert_eq!((Band { n }).base_slope(), qi(-n));
        }
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi_eval(&PhiKind::Band(0), &LatticeClass::new(0, -1)), qi(1));
        assert_eq!(
            phi_eval(&PhiKind::Point(q(1, 2)), &LatticeClass::new(-1, 0)),
            q(1, 2)
        );
        // tangent classes have zero grade in their own band
        for n in -3..4 {
            assert_eq!(
                phi_eval(&PhiKind::Band(n), &LatticeClass::new(-1, n)),
                Q::zero()
            );
            assert_eq!(
                phi_eval(&PhiKind::Band(n), &LatticeClass::new(1, -n)),
                Q::zero()
            );
        }
        // band and point kinds agree when x = n
        let m = LatticeClass::new(2, -5);
        assert_eq!(
            phi_eval(&PhiKind::Band(3), &m),
            phi_eval(&PhiKind::Point(qi(3)), &m)
        );
    }

    #[test]
    fn phi_band_continuity() {
        // the band functions agree along the shared wall x = n + 1/2
        for n in -3..3 {
            let x = q(2 * n + 1, 2);
            for yy in 0..3 {
                let p = RationalPoint::new(x.clone(), qi(yy));
                assert_eq!(phi_band_function(n, &p), phi_band_function(n + 1, &p));
            }
        }
    }

    #[test]
    fn monodromy_product() {
        let total = monodromy_check();
        assert_eq!(total, MonodromyMatrix([[1, 9], [0, 1]]));
        for g in gluing_matrices() {
            assert_eq!(g.det(), 1);
            // each factor is conjugate to the standard unipotent:
            // trace 2 but not the identity
            assert_eq!(g.trace(), 2);
            assert!(!g.is_identity());
        }
    }

    #[test]
    fn shear_basics() {
        // s_0 -> s_1
        let (p, _) = psi_shift(1, &s_point(0), &LatticeClass::new(0, -1));
        assert_eq!(p, s_point(1));
        // class (1, -n) -> (1, -n-1)
        for n in -2..3 {
            let (_, m) = psi_shift(1, &s_point(0), &LatticeClass::new(1, -n));
            assert_eq!(m, LatticeClass::new(1, -n - 1));
        }
        // composition with the inverse is the identity
        let p0 = RationalPoint::new(q(3, 7), q(-2, 5));
        let m0 = LatticeClass::new(2, -3);
        let (p1, m1) = psi_shift(1, &p0, &m0);
        let (p2, m2) = psi_shift(-1, &p1, &m1);
        assert_eq!((p2, m2), (p0, m0));
        // s_n maps to s_{n+k}
        for k in [-2i64, 1, 3] {
            for n in -2..3 {
                assert_eq!(psi_shift_point(k, &s_point(n)), s_point(n + k));
            }
        }
        // vertical classes are fixed
        assert_eq!(
            psi_shift_class(5, &LatticeClass::new(0, -4)),
            LatticeClass::new(0, -4)
        );
    }

    #[test]
    fn shear_moves_vertical_lines_by_one() {
        let p = RationalPoint::new(q(-1, 2), qi(2));
        let q1 = psi_shift_point(1, &p);
        assert_eq!(q1.x, q(1, 2));
    }
}
