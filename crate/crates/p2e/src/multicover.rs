//! Triangular multicover transforms over divisor-indexed tables and their
//! exact inversions.
//!
//! Every transform here has the shape `raw(d) = sum_{l | d} K(l) bps(d/l)`
//! with a kernel-specific weight, possibly acting on values (rationals,
//! hbar series) that get rescaled by `l` along the way; inversion is
//! back-substitution in the divisor lattice, exact because the `l = 1`
//! weight is 1.

use std::collections::BTreeMap;

use num::Zero;

use crate::hbar::HbarSeries;
use crate::rational::{binomial, q, Q};
use crate::{Error, Result};

/// Divisors of `n` in increasing order.
pub fn divisors(n: i64) -> Vec<i64> {
    let mut out = Vec::new();
    for d in 1..=n {
        if n % d == 0 {
            out.push(d);
        }
    }
    out
}

/// The scalar multicover kernels.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ScalarKernel {
    /// weight `1/l^2`
    InverseSquare,
    /// weight `1/l^3`
    InverseCube,
}

impl ScalarKernel {
    fn weight(&self, l: i64) -> Q {
        match self {
            ScalarKernel::InverseSquare => q(1, l * l),
            ScalarKernel::InverseCube => q(1, l * l * l),
        }
    }
}

/// Forward transform: `out(d) = sum_{l|d} w(l) input(d/l)`.
pub fn scalar_forward(kernel: ScalarKernel, input: &BTreeMap<i64, Q>) -> Result<BTreeMap<i64, Q>> {
    let mut out = BTreeMap::new();
    for (&d, _) in input {
        let mut acc = Q::zero();
        for l in divisors(d) {
            let v = input
                .get(&(d / l))
                .ok_or_else(|| Error::domain(format!("missing divisor entry {}", d / l)))?;
            acc += kernel.weight(l) * v;
        }
        out.insert(d, acc);
    }
    Ok(out)
}

/// Inverse transform: recovers `input` from `scalar_forward` output.
pub fn scalar_invert(kernel: ScalarKernel, raw: &BTreeMap<i64, Q>) -> Result<BTreeMap<i64, Q>> {
    let mut out: BTreeMap<i64, Q> = BTreeMap::new();
    for (&d, v) in raw {
        let mut acc = v.clone();
        for l in divisors(d) {
            if l == 1 {
                continue;
            }
            let w = out
                .get(&(d / l))
                .ok_or_else(|| Error::domain(format!("missing divisor entry {}", d / l)))?;
            acc -= kernel.weight(l) * w;
        }
        out.insert(d, acc);
    }
    Ok(out)
}

/// The binomial-coefficient weight relating per-contact-point counts
/// `N_{0,d}^k` to the loop-quiver flavored invariants `m_{d,k}` along
/// `k | d' | d` with `l = d/d'`: `(1/l^2) C(l(3d'-1)-1, l-1)`.
pub fn binomial_weight(l: i64, d_prime: i64) -> Q {
    let c = binomial(l * (3 * d_prime - 1) - 1, l - 1);
    q(1, l * l) * Q::from(c)
}

/// Forward binomial transform for a fixed `k` on a table over multiples
/// of `k`.
pub fn binomial_forward(k: i64, input: &BTreeMap<i64, Q>) -> Result<BTreeMap<i64, Q>> {
    let mut out = BTreeMap::new();
    for (&d, _) in input {
        let mut acc = Q::zero();
        for dp in divisors(d) {
            if dp % k != 0 {
                continue;
            }
            let v = input
                .get(&dp)
                .ok_or_else(|| Error::domain(format!("missing divisor entry {dp}")))?;
            acc += binomial_weight(d / dp, dp) * v;
        }
        out.insert(d, acc);
    }
    Ok(out)
}

/// Inverts the binomial transform (the `l = 1` weight is `C(3d-2, 0) = 1`).
pub fn binomial_invert(k: i64, raw: &BTreeMap<i64, Q>) -> Result<BTreeMap<i64, Q>> {
    let mut out: BTreeMap<i64, Q> = BTreeMap::new();
    for (&d, v) in raw {
        if d % k != 0 {
            return Err(Error::domain(format!("entry {d} is not a multiple of {k}")));
        }
        let mut acc = v.clone();
        for dp in divisors(d) {
            if dp % k != 0 || dp == d {
                continue;
            }
            let w = out
                .get(&dp)
                .ok_or_else(|| Error::domain(format!("missing divisor entry {dp}")))?;
            acc -= binomial_weight(d / dp, dp) * w;
        }
        out.insert(d, acc);
    }
    Ok(out)
}

/// Forward sine-ratio transform on hbar series along `k | d' | d`:
/// `out(d) = sum (1/l) (2sin(h/2)/2sin(l h/2)) input(d')(l h)`, `l = d/d'`.
pub fn sin_forward(
    k: i64,
    input: &BTreeMap<i64, HbarSeries>,
    order: i64,
) -> Result<BTreeMap<i64, HbarSeries>> {
    let mut out = BTreeMap::new();
    for (&d, _) in input {
        if d % k != 0 {
            continue;
        }
        let mut acc = HbarSeries::zero(order);
        for dp in divisors(d) {
            if dp % k != 0 {
                continue;
            }
            let l = d / dp;
            let v = input
                .get(&dp)
                .ok_or_else(|| Error::domain(format!("missing divisor entry {dp}")))?;
            let ratio =
                HbarSeries::two_sin_half(1, order + 2).mul(&HbarSeries::csc_half(l, order + 1));
            let term = ratio.mul(&v.rescale(l)).scale(&q(1, l));
            acc = acc.add(&term);
        }
        out.insert(d, acc.truncated(order));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
    }

    #[test]
    fn inverse_square_example() {
        // raw(1) = 1, raw(2) = -3/4 inverts to bps(1) = 1, bps(2) = -1
        let raw = BTreeMap::from([(1, qi(1)), (2, q(-3, 4))]);
        let bps = scalar_invert(ScalarKernel::InverseSquare, &raw).unwrap();
        assert_eq!(bps[&1], qi(1));
        assert_eq!(bps[&2], qi(-1));
    }

    #[test]
    fn forward_invert_roundtrip() {
        // structured rational tables over d <= 12
        for kernel in [ScalarKernel::InverseSquare, ScalarKernel::InverseCube] {
            let mut input = BTreeMap::new();
            for d in 1..=12i64 {
                input.insert(d, q(7 * d * d - 5 * d + 3, d + 1));
            }
            let fwd = scalar_forward(kernel, &input).unwrap();
            let back = scalar_invert(kernel, &fwd).unwrap();
            assert_eq!(back, input);
        }
    }

    #[test]
    fn binomial_kernel_values() {
        // l = 2, d' = 1: (1/4) C(3, 1) = 3/4
        assert_eq!(binomial_weight(2, 1), q(3, 4));
        assert_eq!(binomial_weight(1, 5), qi(1));
    }

    #[test]
    fn binomial_example() {
        // k = 1: N(1) = 1, N(2) = 3/4 gives m(1) = 1, m(2) = 0
        let raw = BTreeMap::from([(1, qi(1)), (2, q(3, 4))]);
        let m = binomial_invert(1, &raw).unwrap();
        assert_eq!(m[&1], qi(1));
        assert_eq!(m[&2], qi(0));
        // k = 2: N(2) = 1 gives m(2) = 1
        let raw2 = BTreeMap::from([(2, qi(1))]);
        let m2 = binomial_invert(2, &raw2).unwrap();
        assert_eq!(m2[&2], qi(1));
    }

    #[test]
    fn binomial_roundtrip() {
        let mut input = BTreeMap::new();
        for d in (2..=12i64).step_by(2) {
            input.insert(d, q(3 * d - 1, d));
        }
        let fwd = binomial_forward(2, &input).unwrap();
        let back = binomial_invert(2, &fwd).unwrap();
        assert_eq!(back, input);
    }

    #[test]
    fn sin_kernel_at_l1_is_identity() {
        let mut input = BTreeMap::new();
        input.insert(1, HbarSeries::constant(qi(5), 8));
        let out = sin_forward(1, &input, 8).unwrap();
        assert_eq!(out[&1].coeff(0), qi(5));
        assert!(out[&1].coeff(2).is_zero());
    }
}
