//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! C1  classical relative BPS integers for d <= 4 through the real CLI,
//!     within the single-threaded budget
//! C2  refined anchors at degrees 1 and 2 (kernel calibration gate)
//! C3  proved identities at y = 1, exact
//! C4  conjecture instances pinned hard in the established range d <= 4
//! C5  torsion combinatorics by exhaustive enumeration, and the monodromy
//!     product
//! C6  engine properties: shear equivariance, window stability, schedule
//!     determinism, classical limit, post-hoc loop audit
//! C7  higher-genus structure and the generating-series identity

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use num::{One, Signed, Zero};

use p2e::affine::monodromy_check;
use p2e::engine::{
    auto_window, initial_diagram, CompletionConfig, Diagram, Mode, Region, Schedule,
    ScatteringDiagram,
};
use p2e::invariants::{anchor_degree_one, anchor_degree_two, ns_series, InvariantTable};
use p2e::multicover::divisors;
use p2e::rational::{q, qi, Q};
use p2e::torsion::torsion_stats;
use p2e::ylaurent::YLaurent;

fn pass(name: &str, detail: &str) {
    println!("{name} ... pass ({detail})");
}

fn completed(mode: Mode, order: i64) -> ScatteringDiagram {
    let region = Region::standard();
    let completion = CompletionConfig::default();
    let window = auto_window(order, &region, &completion.pad);
    let mut d = initial_diagram(mode, 3, order, window, region).unwrap();
    d.complete(&completion).unwrap();
    d
}

fn full_table(mode: Mode, order: i64, d_max: i64, g_max: Option<i64>) -> InvariantTable {
    let diagram = completed(mode, order);
    let mut table = InvariantTable::extract(&diagram, d_max).unwrap();
    table.relative_bps().unwrap();
    table.local_gv().unwrap();
    if let Some(g) = g_max {
        table.higher_genus(g).unwrap();
    }
    table
}

#[test]
fn c1_classical_table_via_cli() {
    let t0 = Instant::now();
    let dir = std::env::temp_dir().join(format!("p2e-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("classical-order4.json");
    let bin = env!("CARGO_BIN_EXE_p2e");
    let scatter = Command::new(bin)
        .args([
            "scatter",
            "--mode",
            "classical",
            "--order",
            "4",
            "--no-cache",
            "--out",
        ])
        .arg(&out)
        .output()
        .expect("scatter runs");
    assert!(
        scatter.status.success(),
        "scatter failed: {}",
        String::from_utf8_lossy(&scatter.stderr)
    );
    let inv = Command::new(bin)
        .args(["invariants", "--dmax", "4", "--table", "omega-rel", "--in"])
        .arg(&out)
        .output()
        .expect("invariants runs");
    assert!(
        inv.status.success(),
        "invariants failed: {}",
        String::from_utf8_lossy(&inv.stderr)
    );
    let stdout = String::from_utf8_lossy(&inv.stdout);
    let mut got = Vec::new();
    for line in stdout.lines().skip(1) {
        let mut it = line.split_whitespace();
        let d: i64 = it.next().unwrap().parse().unwrap();
        let v = it.next().unwrap().to_string();
        got.push((d, v));
    }
    assert_eq!(
        got,
        vec![
            (1, "1/1".to_string()),
            (2, "-1/1".to_string()),
            (3, "3/1".to_string()),
            (4, "-16/1".to_string()),
        ]
    );
    let elapsed = t0.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "budget exceeded: {elapsed:?} (limit 60s single-threaded)"
    );
    pass(
        "C1 classical relative BPS 1,-1,3,-16 via CLI",
        &format!("{elapsed:.2?}"),
    );
}

#[test]
fn c2_quantum_anchors() {
    let table = full_table(Mode::Quantum, 2, 2, None);
    let mut counted = [0usize; 2];
    for ((d, chi), v) in &table.omega_refined_raw {
        match d {
            1 => {
                assert_eq!(v, &anchor_degree_one(), "(d,chi)=({d},{chi})");
                counted[0] += 1;
            }
            2 => {
                assert_eq!(v, &anchor_degree_two(), "(d,chi)=({d},{chi})");
                counted[1] += 1;
            }
            _ => unreachable!(),
        }
    }
    assert!(counted[0] >= 2 && counted[1] >= 3, "anchor coverage {counted:?}");
    let meta = table.meta.as_ref().unwrap();
    assert!(meta
        .calibration
        .iter()
        .any(|s| s.contains("degree-1 anchor reproduced")));
    pass(
        "C2 refined anchors (kernel calibration gate)",
        &format!(
            "{} + {} chi-values against the two anchors, kernel {}",
            counted[0], counted[1], meta.kernel
        ),
    );
}

#[test]
fn c3_proved_identities_exact() {
    let table = full_table(Mode::Classical, 4, 4, None);
    // chi-independence at y = 1 (asserted in extraction; witness the counts)
    let mut chis_per_d: BTreeMap<i64, usize> = BTreeMap::new();
    for ((d, _), v) in &table.omega_classical {
        assert_eq!(v, &table.omega_p2[d]);
        *chis_per_d.entry(*d).or_default() += 1;
    }
    assert_eq!(chis_per_d[&4], 5);
    // integrality, sign, and divisibility by 3d
    for (d, v) in &table.omega_p2 {
        let rel = &table.omega_rel[d];
        assert!(rel.denom().is_one(), "3*{d} divides {v}");
        assert_eq!(rel.signum(), if (d - 1) % 2 == 0 { qi(1) } else { qi(-1) });
    }
    // per-contact-point worked values
    assert_eq!(table.n0k[&(1, 1)], qi(1));
    assert_eq!(table.n0k[&(2, 1)], q(3, 4));
    assert_eq!(table.m_dk[&(2, 1)], qi(0));
    assert_eq!(table.m_dk[&(2, 2)], qi(1));
    // local-relative relation with the worked degree-2 value
    assert_eq!(table.n0_rel_total[&2], q(135, 4));
    for (d, total) in &table.n0_rel_total {
        let sign = if (d - 1) % 2 == 0 { qi(1) } else { qi(-1) };
        assert_eq!(total, &(sign * qi(3 * d) * &table.gw_local[d]));
    }
    // even-degree vanishing at y^{1/2} = i and gcd-dependence live on the
    // refined side
    let refined = full_table(Mode::Quantum, 4, 4, None);
    for ((d, chi), v) in &refined.omega_refined_raw {
        if d % 2 == 0 {
            assert_eq!(
                v.eval_minus_one().unwrap(),
                Q::zero(),
                "(d,chi)=({d},{chi})"
            );
        }
        let g = if *chi == 0 { *d } else { num::integer::gcd(*d, chi.abs()) };
        assert_eq!(
            v,
            refined
                .omega_refined_raw
                .get(&(*d, *d + g))
                .unwrap_or(v),
            "gcd-dependence at ({d},{chi})"
        );
    }
    pass(
        "C3 proved identities at y = 1",
        "chi-independence, 3d-divisibility, signs, 3/4 and 135/4 worked values, even-degree vanishing",
    );
}

#[test]
fn c4_conjectures_pinned_low_degree() {
    let table = full_table(Mode::Quantum, 4, 4, None);
    // refined chi-independence holds exactly for d <= 4
    for d in 1..=4i64 {
        let vals: Vec<&YLaurent> = table
            .omega_refined_raw
            .iter()
            .filter(|((dd, _), _)| *dd == d)
            .map(|(_, v)| v)
            .collect();
        assert!(vals.len() >= 2);
        for v in &vals {
            assert_eq!(*v, vals[0], "refined chi-independence at d = {d}");
        }
        // [3d]_y divides the refined value
        assert!(
            vals[0].divisible_by_bracket(3 * d),
            "[3d]_y divisibility at d = {d}: {}",
            vals[0]
        );
    }
    pass(
        "C4 refined chi-independence and bracket divisibility for d <= 4",
        "hard in the established range",
    );
}

#[test]
fn c5_torsion_and_monodromy() {
    let t0 = Instant::now();
    for d in 1..=12i64 {
        let t = torsion_stats(d).unwrap(); // enumeration checks the dichotomy
        for l in divisors(d) {
            assert_eq!(t.contact_sum(l).unwrap(), 3 * d, "d={d} l={l}");
        }
        for dp in divisors(d) {
            assert_eq!(t.point_count(dp), 9 * dp * dp, "d={d} d'={dp}");
        }
    }
    let enumeration = t0.elapsed();
    assert!(enumeration.as_secs() < 1, "enumeration too slow: {enumeration:?}");
    let m = monodromy_check();
    assert_eq!(m.0, [[1, 9], [0, 1]]);
    pass(
        "C5 torsion identities d <= 12 and monodromy product",
        &format!("enumeration {enumeration:.2?}, product {m}"),
    );
}

#[test]
fn c6_engine_properties() {
    // shear equivariance at order 3, ray by ray on serialized form
    let order = 3;
    let completion = CompletionConfig::default();
    let region = Region::standard();
    let window = auto_window(order, &region, &completion.pad);
    let mut d1: Diagram<Q> = Diagram::initial(3, order, window, region.clone());
    d1.complete(&completion).unwrap();
    let shifted = Region::new(&region.x0 + qi(1), &region.x1 + qi(1), region.y_max.clone());
    let mut d2: Diagram<Q> =
        Diagram::initial(3, order, (window.0 + 1, window.1 + 1), shifted.clone());
    d2.complete(&completion).unwrap();
    let mut image = d1.psi_shifted(1);
    image.sort_canonical();
    d2.sort_canonical();
    let zone = |r: &p2e::engine::Ray<Q>| -> bool {
        !r.is_initial()
            && shifted.contains(&r.base)
            && region.contains(&p2e::affine::psi_shift_point(-1, &r.base))
            && r.base.in_open_region()
    };
    let a: Vec<_> = image.rays.iter().filter(|r| zone(r)).cloned().collect();
    let b: Vec<_> = d2.rays.iter().filter(|r| zone(r)).cloned().collect();
    assert!(!a.is_empty());
    assert_eq!(a, b, "shear equivariance");

    // window stability: enlarging the window does not change in-region rays
    let wider = (window.0 - 2, window.1 + 2);
    let mut d3: Diagram<Q> = Diagram::initial(3, order, wider, region.clone());
    d3.complete(&completion).unwrap();
    let in_region = |diag: &Diagram<Q>| -> Vec<p2e::engine::Ray<Q>> {
        let mut v: Vec<_> = diag
            .rays
            .iter()
            .filter(|r| !r.is_initial() && region.contains(&r.base))
            .cloned()
            .collect();
        v.sort_by(|x, y| x.base.cmp(&y.base).then(x.class0.cmp(&y.class0)));
        v
    };
    assert_eq!(in_region(&d1), in_region(&d3), "window stability");

    // schedule determinism: three shuffles give byte-identical serialization
    let reference = {
        let mut d = initial_diagram(Mode::Classical, 3, order, window, region.clone()).unwrap();
        d.complete(&completion).unwrap();
        p2e::io::serialize_diagram(&d)
    };
    for seed in [7u64, 1234, 987654321] {
        let mut d = initial_diagram(Mode::Classical, 3, order, window, region.clone()).unwrap();
        d.complete(&CompletionConfig {
            schedule: Schedule::Shuffled(seed),
            ..CompletionConfig::default()
        })
        .unwrap();
        assert_eq!(
            p2e::io::serialize_diagram(&d),
            reference,
            "schedule determinism at seed {seed}"
        );
    }

    // classical diagram = classical limit of the quantum diagram, ray by ray
    let mut dq: Diagram<p2e::YRational> = Diagram::initial(3, order, window, region.clone());
    dq.complete(&completion).unwrap();
    let mut dc = d1.clone();
    dc.sort_canonical();
    dq.sort_canonical();
    let scattered_c: Vec<_> = dc.rays.iter().filter(|r| !r.is_initial()).collect();
    let scattered_q: Vec<_> = dq.rays.iter().filter(|r| !r.is_initial()).collect();
    assert_eq!(scattered_c.len(), scattered_q.len());
    let mut compared = 0usize;
    for (rc, rq) in scattered_c.iter().zip(&scattered_q) {
        assert_eq!(rc.base, rq.base);
        assert_eq!(rc.class0, rq.class0);
        for (l, cq) in &rq.ham {
            let limit = cq.classical_limit().unwrap();
            let cc = rc.ham.get(l).cloned().unwrap_or_else(Q::zero);
            assert_eq!(limit, cc, "classical limit at {} l={l}", rc.base);
            compared += 1;
        }
    }
    assert!(compared > 10);

    // parallel evaluation agrees with the single-threaded reference path
    let mut dp = initial_diagram(Mode::Classical, 3, order, window, region).unwrap();
    dp.complete(&CompletionConfig {
        parallel: true,
        ..CompletionConfig::default()
    })
    .unwrap();
    assert_eq!(p2e::io::serialize_diagram(&dp), reference, "parallel = serial");

    // post-hoc loop audit at every candidate point
    let audited = d1.audit(&completion).unwrap();
    assert!(audited > 50);
    pass(
        "C6 engine properties",
        &format!(
            "shear equivariance ({} rays), window stability, 3 schedules byte-identical, \
             classical limit ({compared} coefficients), parallel = serial, {audited} points re-audited",
            a.len()
        ),
    );
}

#[test]
fn c7_higher_genus_structure() {
    let g_max = 5;
    let table = full_table(Mode::Quantum, 4, 4, Some(g_max));
    // real and even to hbar^10
    for (d, s) in &table.omega_rel_hbar {
        assert!(s.is_even(), "evenness at d = {d}");
        assert!(s.order() >= 10);
    }
    // genus-0 coefficients equal the direct genus-0 pipeline for all d <= 4
    for ((d, k), v) in &table.n0k {
        assert_eq!(&table.n_gdk[&(0, *d, *k)], v, "(d,k)=({d},{k})");
    }
    // generating-series identity per coefficient for d <= 4, g <= 3
    let report = ns_series(&table, 4, 3).unwrap();
    assert_eq!(report.len(), 16);
    for c in &report {
        assert_eq!(
            c.sheaf_side, c.gw_side,
            "series coefficient (g,d)=({},{})",
            c.g, c.d
        );
    }
    pass(
        "C7 higher-genus structure",
        &format!(
            "even hbar expansions to order 10, genus-0 match on {} pairs, {} series coefficients equal",
            table.n0k.len(),
            report.len()
        ),
    );
}
