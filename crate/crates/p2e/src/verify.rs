//! Named checks for every desk-checkable identity, theorem instance, and
//! conjecture instance, with machine-readable reports.
//!
//! Proved statements are hard assertions: a failure is an implementation bug
//! and aborts with a nonzero exit through the CLI. Conjectural statements are
//! soft, except where low-degree cases are established (refined
//! chi-independence and bracket divisibility up to degree 4).

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num::{One, Signed, Zero};

use crate::affine::{monodromy_check, MonodromyMatrix, RationalPoint};
use crate::engine::{
    auto_window, initial_diagram, CompletionConfig, Diagram, Mode, Region, ScatteringDiagram,
};
use crate::invariants::{ns_series, InvariantTable};
use crate::multicover::divisors;
use crate::rational::{q, qi, Q};
use crate::torsion::torsion_stats;
use crate::torus::{series_exp, Grading, TorusSeries};
use crate::ylaurent::YLaurent;
use crate::{Error, Result};

/// All check identifiers in canonical order.
pub const ALL_CHECKS: &[&str] = &[
    "monodromy",
    "exp-identity",
    "torsion",
    "table1",
    "chi-indep",
    "div3d",
    "takahashi",
    "local-rel",
    "gcd-dep",
    "refined-chi",
    "bracket-div",
    "even-vanish",
    "psi-sym",
    "ns-eq",
];

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CheckStatus {
    ProvedPass,
    ProvedFail,
    ConjecturePass,
    ConjectureFail,
    Skipped,
}

impl CheckStatus {
    pub fn is_fatal(&self) -> bool {
        matches!(self, CheckStatus::ProvedFail)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::ProvedPass => "proved-assert-pass",
            CheckStatus::ProvedFail => "proved-assert-FAIL",
            CheckStatus::ConjecturePass => "conjecture-pass",
            CheckStatus::ConjectureFail => "conjecture-FAIL",
            CheckStatus::Skipped => "skipped",
        }
    }
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

/// One check outcome with its witness payload.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub id: String,
    pub status: CheckStatus,
    pub witness: String,
    pub runtime_ms: u128,
    pub fingerprint: String,
}

/// Verification parameters.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub d_max: i64,
    pub g_max: i64,
    pub kappa: i64,
    /// Diagram order; defaults to `d_max`.
    pub order: Option<i64>,
    pub parallel: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            d_max: 4,
            g_max: 3,
            kappa: 3,
            order: None,
            parallel: false,
        }
    }
}

/// Shared state across checks: diagrams and tables are built once.
pub struct VerifyContext {
    pub config: VerifyConfig,
    classical: Option<(ScatteringDiagram, InvariantTable)>,
    quantum: Option<(ScatteringDiagram, InvariantTable)>,
    /// A preloaded diagram (from a file) that checks may reuse when its
    /// configuration matches.
    pub preloaded: Option<ScatteringDiagram>,
}

impl VerifyContext {
    pub fn new(config: VerifyConfig) -> Self {
        VerifyContext {
            config,
            classical: None,
            quantum: None,
            preloaded: None,
        }
    }

    fn order(&self) -> i64 {
        self.config.order.unwrap_or(self.config.d_max)
    }

    fn completion(&self) -> CompletionConfig {
        CompletionConfig {
            parallel: self.config.parallel,
            ..Default::default()
        }
    }

    fn build(&mut self, mode: Mode) -> Result<&(ScatteringDiagram, InvariantTable)> {
        let slot = match mode {
            Mode::Classical => &mut self.classical,
            Mode::Quantum => &mut self.quantum,
        };
        if slot.is_none() {
            let order = self.config.order.unwrap_or(self.config.d_max);
            let completion = CompletionConfig {
                parallel: self.config.parallel,
                ..Default::default()
            };
            let mut diagram = match &self.preloaded {
                Some(d)
                    if d.mode() == mode
                        && d.order() >= order
                        && d.kappa() == self.config.kappa
                        && d.is_consistent() =>
                {
                    d.clone()
                }
                _ => {
                    let region = Region::standard();
                    let window = auto_window(order, &region, &completion.pad);
                    let mut d = initial_diagram(mode, self.config.kappa, order, window, region)?;
                    d.complete(&completion)?;
                    d
                }
            };
            if !diagram.is_consistent() {
                diagram.complete(&completion)?;
            }
            let mut table = InvariantTable::extract(&diagram, self.config.d_max)?;
            table.relative_bps()?;
            table.local_gv()?;
            if mode == Mode::Quantum {
                table.higher_genus(self.config.g_max)?;
            }
            let slot = match mode {
                Mode::Classical => &mut self.classical,
                Mode::Quantum => &mut self.quantum,
            };
            *slot = Some((diagram, table));
        }
        Ok(match mode {
            Mode::Classical => self.classical.as_ref().unwrap(),
            Mode::Quantum => self.quantum.as_ref().unwrap(),
        })
    }

    fn fingerprint(&self, mode: &str) -> String {
        format!(
            "mode={mode} kappa={} order={} d_max={} g_max={} kernel=quantum-binomial",
            self.config.kappa,
            self.order(),
            self.config.d_max,
            self.config.g_max
        )
    }
}

/// Expected relative BPS values for low degrees.
pub fn reference_relative_bps() -> BTreeMap<i64, Q> {
    [
        (1, 1),
        (2, -1),
        (3, 3),
        (4, -16),
        (5, 113),
        (6, -948),
        (7, 8974),
        (8, -92840),
        (9, 1027737),
        (10, -12000405),
    ]
    .into_iter()
    .map(|(d, v)| (d, qi(v)))
    .collect()
}

type CheckOutcome = (CheckStatus, String);

fn check_monodromy(_ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    let total = monodromy_check();
    let expect = MonodromyMatrix([[1, 9], [0, 1]]);
    if total == expect {
        Ok((CheckStatus::ProvedPass, format!("product = {total}")))
    } else {
        Ok((
            CheckStatus::ProvedFail,
            format!("product = {total}, expected {expect}"),
        ))
    }
}

fn check_exp_identity(_ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    // exp(sum_l (-1)^{l-1}/l z^{lm}) = 1 + z^m for a vertical class, checked
    // through the truncated series machinery
    let m = crate::lattice::LatticeClass::new(0, -1);
    let grading = Grading::at_x(q(1, 3));
    let cutoff = qi(6);
    let mut h: TorusSeries<Q> = TorusSeries::zero();
    for l in 1..=6 {
        let sign = if (l - 1) % 2 == 0 { 1 } else { -1 };
        h.add_term(m.scale(l), q(sign, l));
    }
    let e = series_exp(&h, 3, &grading, &cutoff)?;
    let mut expect: TorusSeries<Q> = TorusSeries::one();
    expect.add_term(m, qi(1));
    if e == expect {
        Ok((
            CheckStatus::ProvedPass,
            "exp(log series) = 1 + z^m to order 6".into(),
        ))
    } else {
        Ok((CheckStatus::ProvedFail, format!("got {e:?}")))
    }
}

fn check_torsion(ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    let d_max = ctx.config.d_max.max(12);
    for d in 1..=d_max {
        let t = torsion_stats(d)?; // enumeration itself checks the dichotomy
        for l in divisors(d) {
            let s = t.contact_sum(l)?;
            if s != 3 * d {
                return Ok((
                    CheckStatus::ProvedFail,
                    format!("sum_k s(k,{l})/r_{l} = {s} != {} at d = {d}", 3 * d),
                ));
            }
        }
        for dp in divisors(d) {
            let c = t.point_count(dp);
            if c != 9 * dp * dp {
                return Ok((
                    CheckStatus::ProvedFail,
                    format!("sum_k |P({d},k)| over k|{dp} = {c} != {}", 9 * dp * dp),
                ));
            }
        }
    }
    Ok((
        CheckStatus::ProvedPass,
        format!("contact sums, point counts and order dichotomy hold for d <= {d_max}"),
    ))
}

fn check_table1(ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    let d_max = ctx.config.d_max;
    let (_, table) = ctx.build(Mode::Classical)?;
    let reference = reference_relative_bps();
    let mut seen = Vec::new();
    for d in 1..=d_max {
        let got = table
            .omega_rel
            .get(&d)
            .ok_or_else(|| Error::domain(format!("no relative value at d = {d}")))?;
        match reference.get(&d) {
            Some(expect) if expect == got => seen.push(format!("{got}")),
            Some(expect) => {
                return Ok((
                    CheckStatus::ProvedFail,
                    format!("relative BPS at d = {d}: got {got}, expected {expect}"),
                ))
            }
            None => seen.push(format!("{got} (unreferenced)")),
        }
    }
    Ok((
        CheckStatus::ProvedPass,
        format!("relative BPS d <= {d_max}: {}", seen.join(", ")),
    ))
}

fn check_chi_indep(ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    // the extraction hard-asserts it; re-derive the witness here
    let (_, table) = ctx.build(Mode::Classical)?;
    let mut per_d: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for ((d, chi), _) in &table.omega_classical {
        per_d.entry(*d).or_default().push(*chi);
    }
    for ((d, chi), v) in &table.omega_classical {
        if v != &table.omega_p2[d] {
            return Ok((
                CheckStatus::ProvedFail,
                format!("Omega_({d},{chi}) = {v} != {}", table.omega_p2[d]),
            ));
        }
    }
    let counts: Vec<String> = per_d
        .iter()
        .map(|(d, chis)| format!("d={d}: {} values of chi agree", chis.len()))
        .collect();
    Ok((CheckStatus::ProvedPass, counts.join("; ")))
}

fn check_div3d(ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    let (_, table) = ctx.build(Mode::Classical)?;
    let mut witness = Vec::new();
    for (d, v) in &table.omega_p2 {
        let rel = v / qi(3 * d);
        if !rel.denom().is_one() {
            return Ok((
                CheckStatus::ProvedFail,
                format!("3d does not divide Omega_{d} = {v}"),
            ));
        }
        if rel.signum() != if (d - 1) % 2 == 0 { qi(1) } else { qi(-1) } {
            return Ok((
                CheckStatus::ProvedFail,
                format!("sign of Omega_{d}^rel = {rel} is wrong"),
            ));
        }
        witness.push(format!("{v}/{} = {rel}", 3 * d));
    }
    Ok((CheckStatus::ProvedPass, witness.join(", ")))
}

fn check_takahashi(ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    let (_, table) = ctx.build(Mode::Classical)?;
    let n21 = table
        .n0k
        .get(&(2, 1))
        .ok_or_else(|| Error::domain("missing N_(0,2)^1"))?;
    let m21 = table.m_dk.get(&(2, 1)).cloned().unwrap_or_else(Q::zero);
    let m22 = table.m_dk.get(&(2, 2)).cloned().unwrap_or_else(Q::zero);
    if n21 == &q(3, 4) && m21.is_zero() && m22.is_one() {
        Ok((
            CheckStatus::ProvedPass,
            "N_(0,2)^1 = 3/4, m_(2,1) = 0, m_(2,2) = 1".into(),
        ))
    } else {
        Ok((
            CheckStatus::ProvedFail,
            format!("N_(0,2)^1 = {n21}, m_(2,1) = {m21}, m_(2,2) = {m22}"),
        ))
    }
}

fn check_local_rel(ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    // local_gv hard-asserts the relation; recompute the d = 2 worked value
    let (_, table) = ctx.build(Mode::Classical)?;
    let total2 = table
        .n0_rel_total
        .get(&2)
        .ok_or_else(|| Error::domain("missing total at d = 2"))?;
    if total2 != &q(135, 4) {
        return Ok((
            CheckStatus::ProvedFail,
            format!("N_(0,2) = {total2}, expected 135/4"),
        ));
    }
    for (d, total) in &table.n0_rel_total {
        let local = &table.gw_local[d];
        let sign = if (d - 1) % 2 == 0 { qi(1) } else { qi(-1) };
        if total != &(sign * qi(3 * d) * local) {
            return Ok((
                CheckStatus::ProvedFail,
                format!("local-relative mismatch at d = {d}"),
            ));
        }
    }
    Ok((
        CheckStatus::ProvedPass,
        format!("N_(0,d) = (-1)^(d-1) 3d N_(0,d)^K for all computed d; N_(0,2) = {total2}"),
    ))
}

fn check_gcd_dep(ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    // extraction hard-asserts it; witness the classes compared
    let (_, table) = ctx.build(Mode::Quantum)?;
    let mut groups: BTreeMap<(i64, i64), Vec<i64>> = BTreeMap::new();
    for ((d, chi), _) in &table.omega_refined_raw {
        let g = if *chi == 0 {
            *d
        } else {
            num::integer::gcd(*d, chi.abs())
        };
        groups.entry((*d, g)).or_default().push(*chi);
    }
    for ((d, g), chis) in &groups {
        let mut vals = chis
            .iter()
            .map(|chi| table.omega_refined_raw[&(*d, *chi)].clone());
        let first = vals.next().unwrap();
        if !vals.all(|v| v == first) {
            return Ok((
                CheckStatus::ProvedFail,
                format!("values differ within gcd class (d,gcd)=({d},{g})"),
            ));
        }
    }
    Ok((
        CheckStatus::ProvedPass,
        format!("{} gcd classes internally equal", groups.len()),
    ))
}

fn check_refined_chi(ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    let d_max = ctx.config.d_max;
    let (_, table) = ctx.build(Mode::Quantum)?;
    let mut failures = Vec::new();
    for d in 1..=d_max {
        let vals: Vec<(&i64, &YLaurent)> = table
            .omega_refined_raw
            .iter()
            .filter(|((dd, _), _)| *dd == d)
            .map(|((_, chi), v)| (chi, v))
            .collect();
        if let Some((_, first)) = vals.first() {
            for (chi, v) in &vals {
                if v != first {
                    failures.push((d, **chi));
                }
            }
        }
    }
    if failures.is_empty() {
        return Ok((
            CheckStatus::ConjecturePass,
            format!("refined values chi-independent for d <= {d_max}"),
        ));
    }
    // established for d <= 4: failures there are implementation bugs
    let low: Vec<_> = failures.iter().filter(|(d, _)| *d <= 4).collect();
    if !low.is_empty() {
        return Ok((
            CheckStatus::ProvedFail,
            format!("refined chi-independence broken in the established range: {low:?}"),
        ));
    }
    Ok((
        CheckStatus::ConjectureFail,
        format!("refined chi-independence fails at {failures:?}"),
    ))
}

fn check_bracket_div(ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    let (_, table) = ctx.build(Mode::Quantum)?;
    let mut failures = Vec::new();
    let mut checked = 0;
    for (d, v) in &table.omega_p2_refined {
        checked += 1;
        if !v.divisible_by_bracket(3 * d) {
            failures.push(*d);
        }
    }
    if failures.is_empty() {
        return Ok((
            CheckStatus::ConjecturePass,
            format!("[3d]_y divides the refined value for all {checked} computed degrees"),
        ));
    }
    if failures.iter().any(|d| *d <= 4) {
        return Ok((
            CheckStatus::ProvedFail,
            format!("bracket divisibility broken in the established range at d in {failures:?}"),
        ));
    }
    Ok((
        CheckStatus::ConjectureFail,
        format!("bracket divisibility fails at d in {failures:?}"),
    ))
}

fn check_even_vanish(ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    let (_, table) = ctx.build(Mode::Quantum)?;
    let mut checked = 0;
    for ((d, chi), v) in &table.omega_refined_raw {
        if d % 2 == 0 {
            checked += 1;
            let at = v.eval_minus_one()?;
            if !at.is_zero() {
                return Ok((
                    CheckStatus::ProvedFail,
                    format!("Omega_({d},{chi}) at y = -1 is {at}, expected 0"),
                ));
            }
        }
    }
    Ok((
        CheckStatus::ProvedPass,
        format!("{checked} even-degree refined values vanish at y = -1"),
    ))
}

fn check_psi_sym(ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    // completed diagram commutes with the unit shear, ray by ray, at a
    // reduced order to keep the double completion cheap
    let order = ctx.order().min(3);
    let completion = ctx.completion();
    let region = Region::standard();
    let window = auto_window(order, &region, &completion.pad);
    let mut d1: Diagram<Q> = Diagram::initial(ctx.config.kappa, order, window, region.clone());
    d1.complete(&completion)?;
    let shifted_region = Region::new(&region.x0 + qi(1), &region.x1 + qi(1), region.y_max.clone());
    let mut d2: Diagram<Q> = Diagram::initial(
        ctx.config.kappa,
        order,
        (window.0 + 1, window.1 + 1),
        shifted_region,
    );
    d2.complete(&completion)?;
    let mut image = d1.psi_shifted(1);
    image.sort_canonical();
    let mut d2s = d2;
    d2s.sort_canonical();
    // compare scattered rays whose base lies in both unpadded zones
    let in_zone = |p: &RationalPoint, diag_region: &Region| -> bool {
        diag_region.contains(p) && p.in_open_region()
    };
    let pick = |diag: &Diagram<Q>| -> Vec<crate::engine::Ray<Q>> {
        diag.rays
            .iter()
            .filter(|r| {
                !r.is_initial()
                    && in_zone(&r.base, &diag.region)
                    && in_zone(&crate::affine::psi_shift_point(-1, &r.base), &region)
            })
            .cloned()
            .collect()
    };
    let a = pick(&image);
    let b = pick(&d2s);
    if a == b {
        Ok((
            CheckStatus::ProvedPass,
            format!(
                "shear-equivariant at order {order}: {} scattered rays match",
                a.len()
            ),
        ))
    } else {
        Ok((
            CheckStatus::ProvedFail,
            format!("ray sets differ: {} vs {}", a.len(), b.len()),
        ))
    }
}

fn check_ns_eq(ctx: &mut VerifyContext) -> Result<CheckOutcome> {
    let d_max = ctx.config.d_max;
    let g_max = ctx.config.g_max;
    let (_, table) = ctx.build(Mode::Quantum)?;
    let report = ns_series(table, d_max, g_max)?;
    let mut count = 0;
    for c in &report {
        if c.sheaf_side != c.gw_side {
            return Ok((
                CheckStatus::ProvedFail,
                format!(
                    "coefficient (g,d)=({},{}) differs: {} vs {}",
                    c.g, c.d, c.sheaf_side, c.gw_side
                ),
            ));
        }
        count += 1;
    }
    Ok((
        CheckStatus::ProvedPass,
        format!("{count} generating-series coefficients agree (d <= {d_max}, g <= {g_max})"),
    ))
}

/// Runs the requested checks (all of them for an empty suite), in canonical
/// order, against one shared context.
pub fn run_checks(suite: &[String], ctx: &mut VerifyContext) -> Result<Vec<CheckReport>> {
    let selected: Vec<&str> = if suite.is_empty() {
        ALL_CHECKS.to_vec()
    } else {
        let mut sel = Vec::new();
        for s in suite {
            if !ALL_CHECKS.contains(&s.as_str()) {
                return Err(Error::domain(format!(
                    "unknown check {s:?}; known: {}",
                    ALL_CHECKS.join(", ")
                )));
            }
            sel.push(s.as_str());
        }
        // canonical execution order regardless of request order
        ALL_CHECKS
            .iter()
            .copied()
            .filter(|c| sel.contains(c))
            .collect()
    };
    let mut out = Vec::new();
    for id in selected {
        let t0 = Instant::now();
        let run: fn(&mut VerifyContext) -> Result<CheckOutcome> = match id {
            "monodromy" => check_monodromy,
            "exp-identity" => check_exp_identity,
            "torsion" => check_torsion,
            "table1" => check_table1,
            "chi-indep" => check_chi_indep,
            "div3d" => check_div3d,
            "takahashi" => check_takahashi,
            "local-rel" => check_local_rel,
            "gcd-dep" => check_gcd_dep,
            "refined-chi" => check_refined_chi,
            "bracket-div" => check_bracket_div,
            "even-vanish" => check_even_vanish,
            "psi-sym" => check_psi_sym,
            "ns-eq" => check_ns_eq,
            _ => unreachable!(),
        };
        let mode = match id {
            "gcd-dep" | "refined-chi" | "bracket-div" | "even-vanish" | "ns-eq" => "quantum",
            "monodromy" | "exp-identity" | "torsion" => "none",
            _ => "classical",
        };
        let (status, witness) = match run(ctx) {
            Ok(r) => r,
            Err(e) => (CheckStatus::ProvedFail, format!("errored: {e}")),
        };
        out.push(CheckReport {
            id: id.to_string(),
            status,
            witness,
            runtime_ms: t0.elapsed().as_millis(),
            fingerprint: ctx.fingerprint(mode),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_checks_pass() {
        let mut ctx = VerifyContext::new(VerifyConfig {
            d_max: 2,
            g_max: 1,
            ..Default::default()
        });
        let suite = vec![
            "monodromy".to_string(),
            "exp-identity".to_string(),
            "torsion".to_string(),
        ];
        let reports = run_checks(&suite, &mut ctx).unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert_eq!(r.status, CheckStatus::ProvedPass, "{}: {}", r.id, r.witness);
        }
        assert!(reports[0].witness.contains("[[1,9],[0,1]]"));
    }

    #[test]
    fn unknown_check_rejected() {
        let mut ctx = VerifyContext::new(VerifyConfig::default());
        assert!(run_checks(&["nope".to_string()], &mut ctx).is_err());
    }

    #[test]
    fn classical_suite_degree_two() {
        let mut ctx = VerifyContext::new(VerifyConfig {
            d_max: 2,
            g_max: 1,
            ..Default::default()
        });
        let suite = vec![
            "table1".to_string(),
            "chi-indep".to_string(),
            "div3d".to_string(),
            "takahashi".to_string(),
            "local-rel".to_string(),
        ];
        let reports = run_checks(&suite, &mut ctx).unwrap();
        for r in &reports {
            assert_eq!(r.status, CheckStatus::ProvedPass, "{}: {}", r.id, r.witness);
        }
    }
}
