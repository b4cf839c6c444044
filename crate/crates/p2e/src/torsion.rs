//! Torsion-point combinatorics of the contact points, by exhaustive
//! enumeration.
//!
//! For `x` in a finite abelian group with order divisible by 3 we write
//! `d(x)` for the smallest positive integer with `(3 d(x)) x = 0`. The counts
//! - `r_l`: elements of `Z/3l` with `d = l`,
//! - `s_{k,l}`: pairs `(a,b)` in `(Z/3k)^2` with `d((a,b)) = k`, `d(a) = l`,
//! - `a_k = |P_{d,k}|`: pairs in `(Z/3d)^2` with `d = k` (independent of the
//!   ambient `d` as long as `k | d`)
//! distribute the contact points among the vertical rays.

use std::collections::BTreeMap;

use crate::lattice::gcd;
use crate::multicover::divisors;
use crate::{Error, Result};

/// Exhaustive torsion statistics for all divisors of a given degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionStats {
    pub d: i64,
    /// `l -> r_l` for `l | d`
    pub r: BTreeMap<i64, i64>,
    /// `(k, l) -> s_{k,l}` for `l | k | d`
    pub s: BTreeMap<(i64, i64), i64>,
    /// `k -> |P_{d,k}|` for `k | d`
    pub a: BTreeMap<i64, i64>,
}

/// Additive order of `x` in `Z/m`.
fn ord_mod(x: i64, m: i64) -> i64 {
    m / (gcd(x.unsigned_abs(), m.unsigned_abs()) as i64)
}

/// `d(x)`: smallest positive `d` with `3 d x = 0` in `Z/m` (for `3 | m`).
fn d_of(ord: i64) -> i64 {
    // 3d must be a multiple of ord: d = ord / gcd(ord, 3)
    ord / (gcd(ord.unsigned_abs(), 3) as i64)
}

/// Brute-force enumeration over `Z/(3k)` and `(Z/(3k))^2` for all `k | d`,
/// verifying the order dichotomy for every element along the way:
/// `ord = 3 d(x)` when `3 | d(x)`, else `ord` is `d(x)` or `3 d(x)`.
pub fn torsion_stats(d: i64) -> Result<TorsionStats> {
    if d < 1 {
        return Err(Error::domain("degree must be positive"));
    }
    let mut r = BTreeMap::new();
    let mut s = BTreeMap::new();
    let mut a = BTreeMap::new();
    for k in divisors(d) {
        let m = 3 * k;
        // r_l over Z/3l needs its own modulus; fill r for l = k here
        let mut r_k = 0i64;
        for x in 0..m {
            let ord = ord_mod(x, m);
            let dx = d_of(ord);
            if dx % 3 == 0 {
                if ord != 3 * dx {
                    return Err(Error::integrity(format!(
                        "order dichotomy fails for {x} mod {m}: ord {ord}, d {dx}"
                    )));
                }
            } else if ord != 3 * dx && ord != dx {
                return Err(Error::integrity(format!(
                    "order dichotomy fails for {x} mod {m}: ord {ord}, d {dx}"
                )));
            }
            if dx == k {
                r_k += 1;
            }
        }
        r.insert(k, r_k);
        // pairs in (Z/3k)^2
        let mut a_k = 0i64;
        for x in 0..m {
            let dx = d_of(ord_mod(x, m));
            for y in 0..m {
                let dy = d_of(ord_mod(y, m));
                let dpair = lcm(dx, dy);
                if dpair == k {
                    a_k += 1;
                    *s.entry((k, dx)).or_insert(0) += 1;
                }
            }
        }
        a.insert(k, a_k);
    }
    Ok(TorsionStats { d, r, s, a })
}

fn lcm(a: i64, b: i64) -> i64 {
    a / (gcd(a.unsigned_abs(), b.unsigned_abs()) as i64) * b
}

impl TorsionStats {
    /// `sum_{k: l | k | d} s_{k,l} / r_l`, which must equal `3d` for every
    /// `l | d`.
    pub fn contact_sum(&self, l: i64) -> Result<i64> {
        let rl = *self
            .r
            .get(&l)
            .ok_or_else(|| Error::domain(format!("no r entry for {l}")))?;
        let mut acc = 0i64;
        for k in divisors(self.d) {
            if k % l != 0 {
                continue;
            }
            acc += self.s.get(&(k, l)).copied().unwrap_or(0);
        }
        if acc % rl != 0 {
            return Err(Error::integrity(format!(
                "sum of s_{{k,{l}}} = {acc} not divisible by r_{l} = {rl}"
            )));
        }
        Ok(acc / rl)
    }

    /// `sum_{k | d'} |P_{d,k}|`, which must equal `(3 d')^2` for `d' | d`.
    pub fn point_count(&self, d_prime: i64) -> i64 {
        divisors(d_prime)
            .into_iter()
            .map(|k| self.a.get(&k).copied().unwrap_or(0))
            .sum()
    }
}
