//! Invariant extraction: from vertical-ray Hamiltonians to every invariant
//! family, through the multicover kernels and the torsion-point counts.
//!
//! The vertical ray on the line `x = chi/d - 3/2` carries, in degree `d`,
//! - classical mode: `(-1)^{d-1} sum_{l | gcd(d,chi)} (1/l^2) Omega_{d/l, chi/l}`,
//! - quantum mode: `(-1)^{d-1} sum_{l | gcd(d,chi)} (1/l)
//!   Omega_{d/l, chi/l}(y^{l/2}) / (y^{l/2} - y^{-l/2})`,
//!
//! and the triangular inversion of these sums is exact. The quantum kernel
//! shape and its normalization are pinned by the degree-1 and degree-2
//! anchors (the symmetrized Poincare polynomials of the plane and of the
//! five-dimensional projective space); the calibration evidence is kept in
//! the table metadata.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use crate::engine::{Diagram, Mode, ScatteringDiagram};
use crate::hbar::{expand_symmetric, HbarSeries};
use crate::multicover::{binomial_invert, divisors, scalar_forward, sin_forward, ScalarKernel};
use crate::rational::{q, qi, Q};
use crate::torsion::torsion_stats;
use crate::ylaurent::YLaurent;
use crate::yrational::YRational;
use crate::{Error, Result};

/// Quantum multicover kernel choice; the per-degree binomial kernel is the
/// calibrated default, the plain inverse-square weighting is kept as the
/// rejected alternative for the record.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QuantumKernel {
    QuantumBinomial,
    InverseSquare,
}

impl std::fmt::Display for QuantumKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QuantumKernel::QuantumBinomial => write!(f, "quantum-binomial"),
            QuantumKernel::InverseSquare => write!(f, "inverse-square"),
        }
    }
}

/// Configuration fingerprint and calibration evidence for a table.
#[derive(Clone, Debug)]
pub struct TableMeta {
    pub mode: Mode,
    pub kappa: i64,
    pub order: i64,
    pub window: (i64, i64),
    pub kernel: QuantumKernel,
    pub calibration: Vec<String>,
}

/// Every invariant family extracted from one diagram.
#[derive(Clone, Debug, Default)]
pub struct InvariantTable {
    pub d_max: i64,
    /// raw refined values per extracted `(d, chi)` (quantum mode)
    pub omega_refined_raw: BTreeMap<(i64, i64), YLaurent>,
    /// deduplicated refined values keyed by `(d, chi mod d)` after the
    /// reflection `chi -> -chi`
    pub omega_refined: BTreeMap<(i64, i64), YLaurent>,
    /// raw classical values per extracted `(d, chi)`
    pub omega_classical: BTreeMap<(i64, i64), Q>,
    /// the chi-independent value per degree
    pub omega_p2: BTreeMap<i64, Q>,
    /// refined chi-averaged value per degree (equals every entry when the
    /// refined values are chi-independent, which holds in the checked range)
    pub omega_p2_refined: BTreeMap<i64, YLaurent>,
    /// `Omega_d^{rel} = Omega_d / 3d`
    pub omega_rel: BTreeMap<i64, Q>,
    /// `(d, k) -> N_{0,d}^k`
    pub n0k: BTreeMap<(i64, i64), Q>,
    /// `(d, k) -> m_{d,k}`
    pub m_dk: BTreeMap<(i64, i64), Q>,
    /// `d -> n_{0,d} = (3d)^2 Omega_d^{rel}`
    pub n0_rel_bps: BTreeMap<i64, Q>,
    /// `d -> N_{0,d}` summed over all contact points
    pub n0_rel_total: BTreeMap<i64, Q>,
    /// `d -> n_{0,d}` of the canonical bundle (genus-0 local BPS)
    pub gv_local: BTreeMap<i64, Q>,
    /// `d -> N_{0,d}` of the canonical bundle (genus-0 local GW)
    pub gw_local: BTreeMap<i64, Q>,
    /// `(g, d, k) -> N_{g,d}^k` from the hbar pipeline
    pub n_gdk: BTreeMap<(i64, i64, i64), Q>,
    /// `d -> Omega_d^{rel}(hbar)`, real and even
    pub omega_rel_hbar: BTreeMap<i64, HbarSeries>,
    pub meta: Option<TableMeta>,
}

/// Reduce `chi` to the canonical key `(d, chi mod d)` with the reflection
/// `chi -> -chi` folded in.
pub fn canonical_chi(d: i64, chi: i64) -> i64 {
    let r = chi.rem_euclid(d);
    r.min((d - r) % d)
}

fn sign_q(d: i64) -> Q {
    if (d - 1) % 2 == 0 {
        qi(1)
    } else {
        qi(-1)
    }
}

/// Inverts the classical vertical-ray sums into `Omega_{d,chi}` values.
pub fn extract_classical_omega(
    diagram: &Diagram<Q>,
    d_max: i64,
) -> Result<BTreeMap<(i64, i64), Q>> {
    let verts = diagram.vertical_rays(d_max)?;
    let mut omega: BTreeMap<(i64, i64), Q> = BTreeMap::new();
    let mut keys: Vec<(i64, i64)> = verts.keys().copied().collect();
    keys.sort();
    for (d, chi) in keys {
        let coeff = verts.get(&(d, chi)).cloned().unwrap_or_else(Q::zero);
        let mut acc = sign_q(d) * coeff;
        let gcd_dc = if chi == 0 { d } else { num::integer::gcd(d, chi.abs()) };
        for l in divisors(gcd_dc) {
            if l == 1 {
                continue;
            }
            let sub = omega
                .get(&(d / l, chi / l))
                .cloned()
                .unwrap_or_else(Q::zero);
            acc -= q(1, l * l) * sub;
        }
        omega.insert((d, chi), acc);
    }
    Ok(omega)
}

/// Inverts the quantum vertical-ray sums into refined `Omega_{d,chi}(y^{1/2})`
/// values; every entry must reduce to a bar-symmetric Laurent element.
pub fn extract_quantum_omega(
    diagram: &Diagram<YRational>,
    d_max: i64,
    kernel: QuantumKernel,
) -> Result<BTreeMap<(i64, i64), YLaurent>> {
    let verts = diagram.vertical_rays(d_max)?;
    let mut omega: BTreeMap<(i64, i64), YLaurent> = BTreeMap::new();
    let mut keys: Vec<(i64, i64)> = verts.keys().copied().collect();
    keys.sort();
    for (d, chi) in keys {
        let coeff = verts
            .get(&(d, chi))
            .cloned()
            .unwrap_or_else(YRational::zero);
        let mut acc = coeff.scale(&sign_q(d));
        let gcd_dc = if chi == 0 { d } else { num::integer::gcd(d, chi.abs()) };
        for l in divisors(gcd_dc) {
            if l == 1 {
                continue;
            }
            let sub = omega
                .get(&(d / l, chi / l))
                .cloned()
                .unwrap_or_else(YLaurent::zero);
            let term = match kernel {
                QuantumKernel::QuantumBinomial => {
                    YRational::kernel(sub.rescale_exponents(l), l).scale(&q(1, l))
                }
                QuantumKernel::InverseSquare => {
                    YRational::from_laurent(sub.rescale_exponents(l)).scale(&q(1, l * l))
                }
            };
            acc = acc.sub(&term);
        }
        let value = match kernel {
            QuantumKernel::QuantumBinomial => acc.mul_laurent(&YLaurent::binomial(1)),
            QuantumKernel::InverseSquare => acc,
        };
        let lau = value.reduce_to_laurent().map_err(|e| {
            Error::integrity(format!(
                "refined extraction at (d,chi)=({d},{chi}) with kernel {kernel}: {e}"
            ))
        })?;
        if !lau.is_symmetric() {
            return Err(Error::integrity(format!(
                "refined invariant at (d,chi)=({d},{chi}) is not bar-symmetric: {lau}"
            )));
        }
        omega.insert((d, chi), lau);
    }
    Ok(omega)
}

/// The refined degree-1 anchor: symmetrized Poincare polynomial of the plane.
pub fn anchor_degree_one() -> YLaurent {
    YLaurent::quantum_integer(3)
}

/// The refined degree-2 anchor: minus the symmetrized Poincare polynomial of
/// the five-dimensional projective space.
pub fn anchor_degree_two() -> YLaurent {
    YLaurent::quantum_integer(6).neg()
}

impl InvariantTable {
    /// Reads the vertical rays of a completed diagram and inverts the
    /// multicover sums; fails loudly when the degree-1 anchor is missed.
    pub fn extract(diagram: &ScatteringDiagram, d_max: i64) -> Result<Self> {
        let mut table = InvariantTable {
            d_max,
            ..Default::default()
        };
        let mut calibration = Vec::new();
        let kernel = QuantumKernel::QuantumBinomial;
        match diagram {
            ScatteringDiagram::Classical(d) => {
                table.omega_classical = extract_classical_omega(d, d_max)?;
            }
            ScatteringDiagram::Quantum(d) => {
                // record the rejected alternative once, on the lowest degrees
                match extract_quantum_omega(d, d_max.min(2), QuantumKernel::InverseSquare) {
                    Ok(alt) => {
                        let anchor_ok = alt
                            .iter()
                            .filter(|((dd, _), _)| *dd == 1)
                            .all(|(_, v)| *v == anchor_degree_one());
                        calibration.push(format!(
                            "inverse-square kernel: reduces but anchor match = {anchor_ok}"
                        ));
                    }
                    Err(e) => calibration.push(format!("inverse-square kernel rejected: {e}")),
                }
                let refined = extract_quantum_omega(d, d_max, kernel)?;
                for ((dd, chi), v) in &refined {
                    table
                        .omega_classical
                        .insert((*dd, *chi), v.eval_one());
                }
                table.omega_refined_raw = refined;
            }
        }
        // degree-1 calibration gate
        for ((dd, chi), v) in &table.omega_classical {
            if *dd == 1 && v != &qi(3) {
                return Err(Error::integrity(format!(
                    "calibration self-test failed: Omega_(1,{chi}) = {v}, expected 3"
                )));
            }
        }
        for ((dd, chi), v) in &table.omega_refined_raw {
            if *dd == 1 && *v != anchor_degree_one() {
                return Err(Error::integrity(format!(
                    "calibration self-test failed: refined Omega_(1,{chi}) = {v}"
                )));
            }
        }
        calibration.push("degree-1 anchor reproduced".into());
        // chi-independence of the classical values is proved; assert it hard
        let mut per_d: BTreeMap<i64, Q> = BTreeMap::new();
        for ((dd, chi), v) in &table.omega_classical {
            match per_d.get(dd) {
                None => {
                    per_d.insert(*dd, v.clone());
                }
                Some(w) => {
                    if w != v {
                        return Err(Error::integrity(format!(
                            "chi-independence fails at d = {dd}: {w} vs {v} (chi = {chi})"
                        )));
                    }
                }
            }
        }
        table.omega_p2 = per_d;
        // gcd-only dependence of the refined values is proved; assert it hard
        let mut per_gcd: BTreeMap<(i64, i64), YLaurent> = BTreeMap::new();
        for ((dd, chi), v) in &table.omega_refined_raw {
            let g = if *chi == 0 { *dd } else { num::integer::gcd(*dd, chi.abs()) };
            match per_gcd.get(&(*dd, g)) {
                None => {
                    per_gcd.insert((*dd, g), v.clone());
                }
                Some(w) => {
                    if w != v {
                        return Err(Error::integrity(format!(
                            "gcd-dependence fails at d = {dd}, gcd = {g}: {w} vs {v}"
                        )));
                    }
                }
            }
        }
        // dedup by (d, chi mod d) with the reflection folded in
        for ((dd, chi), v) in &table.omega_refined_raw {
            table
                .omega_refined
                .insert((*dd, canonical_chi(*dd, *chi)), v.clone());
        }
        // refined chi-averaged value per degree
        for dd in 1..=d_max {
            let vals: Vec<&YLaurent> = table
                .omega_refined_raw
                .iter()
                .filter(|((d2, _), _)| *d2 == dd)
                .map(|(_, v)| v)
                .collect();
            if vals.is_empty() {
                continue;
            }
            let mut acc = YLaurent::zero();
            // average once per residue class mod d
            let mut seen: BTreeMap<i64, &YLaurent> = BTreeMap::new();
            for ((d2, chi), v) in &table.omega_refined_raw {
                if *d2 == dd {
                    seen.entry(chi.rem_euclid(dd)).or_insert(v);
                }
            }
            for (_, v) in &seen {
                acc = acc.add(v);
            }
            let avg = acc.scale(&(qi(1) / qi(seen.len() as i64)));
            table.omega_p2_refined.insert(dd, avg);
        }
        table.meta = Some(TableMeta {
            mode: diagram.mode(),
            kappa: diagram.kappa(),
            order: diagram.order(),
            window: diagram.window(),
            kernel,
            calibration,
        });
        Ok(table)
    }

    /// Looks up a refined value for arbitrary `chi` through the periodicity
    /// and reflection reductions.
    pub fn omega_refined_at(&self, d: i64, chi: i64) -> Option<&YLaurent> {
        self.omega_refined.get(&(d, canonical_chi(d, chi)))
    }

    /// Fills the relative BPS family: `Omega_d^{rel}`, `N_{0,d}^k`,
    /// `m_{d,k}`, and the BPS total `n_{0,d}`.
    pub fn relative_bps(&mut self) -> Result<()> {
        for (&d, v) in &self.omega_p2 {
            let rel = v / qi(3 * d);
            if !rel.denom().is_one() {
                return Err(Error::integrity(format!(
                    "Omega_{d} = {v} is not divisible by 3d = {}",
                    3 * d
                )));
            }
            // sign (-1)^{d-1}
            if rel.signum() != sign_q(d) {
                return Err(Error::integrity(format!(
                    "Omega_{d}^rel = {rel} has the wrong sign"
                )));
            }
            self.omega_rel.insert(d, rel.clone());
            self.n0_rel_bps.insert(d, qi(9 * d * d) * rel);
        }
        // N_{0,d}^k = (-1)^{d-1} sum_{k | d' | d} (1/(d/d')^2) Omega_{d'}^{rel}
        for d in 1..=self.d_max {
            if !self.omega_rel.contains_key(&d) {
                continue;
            }
            for k in divisors(d) {
                let mut acc = Q::zero();
                for dp in divisors(d) {
                    if dp % k != 0 {
                        continue;
                    }
                    let l = d / dp;
                    let rel = self
                        .omega_rel
                        .get(&dp)
                        .ok_or_else(|| Error::domain(format!("missing Omega_{dp}^rel")))?;
                    acc += q(1, l * l) * rel;
                }
                self.n0k.insert((d, k), sign_q(d) * acc);
            }
        }
        // m_{d,k} through the binomial kernel, one divisor chain per k
        for k in 1..=self.d_max {
            let mut raw = BTreeMap::new();
            for ((d, kk), v) in &self.n0k {
                if *kk == k {
                    raw.insert(*d, v.clone());
                }
            }
            if raw.is_empty() {
                continue;
            }
            let m = binomial_invert(k, &raw)?;
            for (d, v) in m {
                self.m_dk.insert((d, k), v);
            }
        }
        Ok(())
    }

    /// Fills the local genus-0 family and checks the local-relative relation
    /// `N_{0,d} = (-1)^{d-1} 3d N_{0,d}^{K}` exactly.
    pub fn local_gv(&mut self) -> Result<()> {
        if self.omega_rel.is_empty() {
            return Err(Error::domain("relative table must be filled first"));
        }
        // n_{0,d}^K = Omega_d; N_{0,d}^K by the inverse-cube forward sum
        for (&d, v) in &self.omega_p2 {
            self.gv_local.insert(d, v.clone());
        }
        self.gw_local = scalar_forward(ScalarKernel::InverseCube, &self.gv_local)?;
        // total relative count: sum over contact points, |P_{d,k}| copies of
        // N_{0,d}^k
        for d in 1..=self.d_max {
            if !self.omega_rel.contains_key(&d) {
                continue;
            }
            let stats = torsion_stats(d)?;
            let mut acc = Q::zero();
            for k in divisors(d) {
                let a = stats.a[&k];
                let nk = self
                    .n0k
                    .get(&(d, k))
                    .ok_or_else(|| Error::domain(format!("missing N_(0,{d})^{k}")))?;
                acc += qi(a) * nk;
            }
            self.n0_rel_total.insert(d, acc.clone());
            let local = self
                .gw_local
                .get(&d)
                .ok_or_else(|| Error::domain(format!("missing local count at {d}")))?;
            let expect = sign_q(d) * qi(3 * d) * local;
            if acc != expect {
                return Err(Error::integrity(format!(
                    "local-relative relation fails at d = {d}: {acc} vs {expect}"
                )));
            }
        }
        Ok(())
    }

    /// Fills the higher-genus counts `N_{g,d}^k` from the refined values via
    /// `y = e^{i hbar}`; needs a quantum extraction.
    pub fn higher_genus(&mut self, g_max: i64) -> Result<()> {
        if self.omega_p2_refined.is_empty() {
            return Err(Error::domain(
                "higher-genus pipeline needs a quantum (refined) extraction",
            ));
        }
        let order = 2 * g_max + 2;
        // Omega_d^{rel}(hbar), real and even
        for (&d, v) in &self.omega_p2_refined {
            let s = expand_symmetric(v, order)?;
            if !s.is_even() {
                return Err(Error::integrity(format!(
                    "hbar expansion at d = {d} has odd terms"
                )));
            }
            self.omega_rel_hbar.insert(d, s.scale(&q(1, 3 * d)));
        }
        let two_sin = HbarSeries::two_sin_half(1, order + 2);
        for k in 1..=self.d_max {
            let raw = sin_forward(k, &self.omega_rel_hbar, order)?;
            for (d, bar) in raw {
                if d % k != 0 {
                    continue;
                }
                // sum_g N_{g,d}^k hbar^{2g-1} = (-1)^{d-1} bar / (2 sin(h/2))
                let series = bar.scale(&sign_q(d)).mul(&two_sin.inv()?);
                for (n, c) in series.terms() {
                    if n % 2 == 0 {
                        if !c.is_zero() {
                            return Err(Error::integrity(format!(
                                "even hbar power {n} after division at (d,k)=({d},{k})"
                            )));
                        }
                        continue;
                    }
                    let g = (n + 1) / 2;
                    if g >= 0 && g <= g_max {
                        self.n_gdk.insert((g, d, k), c.clone());
                    }
                }
            }
        }
        Ok(())
    }

    /// `N_{g,d}` summed over all contact points.
    pub fn n_g_total(&self, g: i64, d: i64) -> Result<Q> {
        let stats = torsion_stats(d)?;
        let mut acc = Q::zero();
        for k in divisors(d) {
            let nk = self
                .n_gdk
                .get(&(g, d, k))
                .ok_or_else(|| Error::domain(format!("missing N_({g},{d})^{k}")))?;
            acc += qi(stats.a[&k]) * nk;
        }
        Ok(acc)
    }
}

/// One coefficient comparison in the generating-series identity.
#[derive(Clone, Debug, PartialEq)]
pub struct NsCoefficient {
    pub g: i64,
    pub d: i64,
    pub sheaf_side: Q,
    pub gw_side: Q,
}

/// Builds both `Q`-series families to the given orders and compares them
/// coefficient by coefficient.
///
/// The sheaf side expands `i sum_{d,l} (1/l^2) Omega_d(y^{l/2}) /
/// (y^{l/2}-y^{-l/2}) Q^{ld}` with `y = e^{i hbar}` and reads the `(-1)^g
/// hbar^{2g-1}` coefficients; the other side is `(-1)^{g+d-1} N_{g,d} / 3d`.
/// The `1/l^2` multicover weight is the one under which the two families
/// agree; it is forced by the degree-2 coefficient already.
pub fn ns_series(table: &InvariantTable, d_max: i64, g_max: i64) -> Result<Vec<NsCoefficient>> {
    if table.omega_p2_refined.is_empty() || table.n_gdk.is_empty() {
        return Err(Error::domain(
            "generating-series comparison needs refined and higher-genus tables",
        ));
    }
    let order = 2 * g_max + 2;
    let mut out = Vec::new();
    for dd in 1..=d_max {
        // sheaf side coefficient of Q^dd as an hbar series
        let mut f = HbarSeries::zero(order);
        for l in divisors(dd) {
            let d0 = dd / l;
            let omega = table
                .omega_p2_refined
                .get(&d0)
                .ok_or_else(|| Error::domain(format!("missing refined value at {d0}")))?;
            // i/(y^{l/2}-y^{-l/2}) = 1/(2 sin(l hbar/2))
            let part = expand_symmetric(&omega.rescale_exponents(l), order + 1)?
                .mul(&HbarSeries::csc_half(l, order + 1))
                .scale(&q(1, l * l));
            f = f.add(&part.truncated(order));
        }
        for g in 0..=g_max {
            let sheaf = f.coeff(2 * g - 1) * if g % 2 == 0 { qi(1) } else { qi(-1) };
            let n_total = table.n_g_total(g, dd)?;
            let gw = n_total * sign_q(dd + g) / qi(3 * dd);
            out.push(NsCoefficient {
                g,
                d: dd,
                sheaf_side: sheaf,
                gw_side: gw,
            });
        }
    }
    Ok(out)
}
