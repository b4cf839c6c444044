//! Construction and consistent completion of the scattering diagram.
//!
//! The initial diagram has two rays per integer `n` in the window, based at
//! `s_n = (n, -n^2/2)` along the tangent line of the parabola. Completion
//! walks the intersection points inside a processing region, measures the
//! failure of the path-ordered product of wall automorphisms around each
//! point, and inserts the outgoing rays that cancel it, order by order in the
//! local grading, until every point is consistent up to the requested order.
//!
//! Truncation uses the point-local grading `grade((a,b)) = -a x - b` at a
//! scattering point with abscissa `x`: it is positive on every wall monomial
//! away from the initial base points, additive, and grows along supports, so
//! a diagram completed at order `N` has exact vertical-ray coefficients in
//! degrees `<= N`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::Zero;
use rayon::prelude::*;

fn q0() -> Q {
    <Q as Zero>::zero()
}

use crate::affine::{psi_shift_class, psi_shift_point, s_point, RationalPoint};
use crate::lattice::LatticeClass;
use crate::rational::{q, qi, Q};
use crate::torus::{apply_wall, Coeff, Grading, TorusSeries, WallHamiltonian};
use crate::yrational::YRational;
use crate::{Error, Result};

/// Classical (commutative, Poisson) or quantum (torus-twisted) mode.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Classical,
    Quantum,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Classical => write!(f, "classical"),
            Mode::Quantum => write!(f, "quantum"),
        }
    }
}

/// Where a ray came from.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RayOrigin {
    /// Initial ray at `s_n`; `plus` selects the support direction `(1, -n)`,
    /// otherwise `(-1, n)`.
    Initial { n: i64, plus: bool },
    Scattered { at: RationalPoint },
}

/// A ray: base point, primitive support direction, primitive monomial class
/// (support direction is `-class0`), and the attached Hamiltonian as a series
/// in `z^{l class0}`.
#[derive(Clone, PartialEq, Debug)]
pub struct Ray<C: Coeff> {
    pub base: RationalPoint,
    pub dir: LatticeClass,
    pub class0: LatticeClass,
    /// `l ->` coefficient of `z^{l class0}`; initial rays extend this lazily.
    pub ham: BTreeMap<i64, C>,
    pub origin: RayOrigin,
}

impl<C: Coeff> Ray<C> {
    pub fn initial(n: i64, plus: bool) -> Self {
        let dir = if plus {
            LatticeClass::new(1, -n)
        } else {
            LatticeClass::new(-1, n)
        };
        Ray {
            base: s_point(n),
            dir,
            class0: dir.neg(),
            ham: BTreeMap::new(),
            origin: RayOrigin::Initial { n, plus },
        }
    }

    pub fn is_initial(&self) -> bool {
        matches!(self.origin, RayOrigin::Initial { .. })
    }

    /// Parameter `t >= 0` with `p = base + t * dir`, when `p` lies on the
    /// support.
    pub fn param_at(&self, p: &RationalPoint) -> Option<Q> {
        let dx = &p.x - &self.base.x;
        let dy = &p.y - &self.base.y;
        // collinearity: dx * dir.b == dy * dir.a
        if &dx * qi(self.dir.b) != &dy * qi(self.dir.a) {
            return None;
        }
        let t = if self.dir.a != 0 {
            dx / qi(self.dir.a)
        } else {
            dy / qi(self.dir.b)
        };
        if t >= q0() {
            Some(t)
        } else {
            None
        }
    }

    pub fn contains(&self, p: &RationalPoint) -> bool {
        self.param_at(p).is_some()
    }

    /// Hamiltonian coefficients up to `l_max`, generating initial-ray
    /// coefficients on demand.
    pub fn wall_ham(&self, l_max: i64) -> WallHamiltonian<C> {
        let mut w = WallHamiltonian::new(self.class0);
        match self.origin {
            RayOrigin::Initial { .. } => {
                for l in 1..=l_max.max(0) {
                    w.add_coeff(l, C::initial_ham(l));
                }
            }
            RayOrigin::Scattered { .. } => {
                for (&l, c) in &self.ham {
                    if l <= l_max {
                        w.add_coeff(l, c.clone());
                    }
                }
            }
        }
        w
    }
}

/// Axis-aligned extraction region `x in [x0, x1], y <= y_max` (bounded below
/// by the parabola).
#[derive(Clone, PartialEq, Debug)]
pub struct Region {
    pub x0: Q,
    pub x1: Q,
    pub y_max: Q,
}

impl Region {
    pub fn new(x0: Q, x1: Q, y_max: Q) -> Self {
        Region { x0, x1, y_max }
    }

    /// One shear-fundamental domain: `x in [-1/2, 1/2], y <= 1`.
    pub fn standard() -> Self {
        Region::new(q(-1, 2), q(1, 2), qi(1))
    }

    pub fn contains(&self, p: &RationalPoint) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y <= self.y_max
    }

    /// Enlarged by `pad` in every free direction.
    pub fn padded(&self, pad: &Q) -> Self {
        Region {
            x0: &self.x0 - pad,
            x1: &self.x1 + pad,
            y_max: &self.y_max + pad,
        }
    }
}

/// Processing order of the inconsistent points inside one generation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Schedule {
    /// Sorted by (lowest inconsistent grade, y, x).
    Canonical,
    /// Deterministic pseudo-random permutation of the canonical order.
    Shuffled(u64),
}

/// Completion parameters.
#[derive(Clone, Debug)]
pub struct CompletionConfig {
    pub schedule: Schedule,
    /// Evaluate per-point consistency checks in parallel.
    pub parallel: bool,
    /// Extra margin around the extraction region processed for cascades.
    pub pad: Q,
    pub max_rounds: usize,
}

impl Default for CompletionConfig {
    fn default() -> Self {
        CompletionConfig {
            schedule: Schedule::Canonical,
            parallel: false,
            pad: qi(1),
            max_rounds: 200,
        }
    }
}

/// The diagram state for one coefficient ring.
#[derive(Clone, Debug)]
pub struct Diagram<C: Coeff> {
    pub kappa: i64,
    pub order: i64,
    pub window: (i64, i64),
    pub region: Region,
    pub rays: Vec<Ray<C>>,
    /// Points processed during completion with the order they were settled at.
    pub processed: Vec<(RationalPoint, Q)>,
    pub consistent: bool,
}

/// The public diagram: classical or quantum coefficients.
#[derive(Clone, Debug)]
pub enum ScatteringDiagram {
    Classical(Diagram<Q>),
    Quantum(Diagram<YRational>),
}

impl ScatteringDiagram {
    pub fn mode(&self) -> Mode {
        match self {
            ScatteringDiagram::Classical(_) => Mode::Classical,
            ScatteringDiagram::Quantum(_) => Mode::Quantum,
        }
    }

    pub fn kappa(&self) -> i64 {
        match self {
            ScatteringDiagram::Classical(d) => d.kappa,
            ScatteringDiagram::Quantum(d) => d.kappa,
        }
    }

    pub fn order(&self) -> i64 {
        match self {
            ScatteringDiagram::Classical(d) => d.order,
            ScatteringDiagram::Quantum(d) => d.order,
        }
    }

    pub fn window(&self) -> (i64, i64) {
        match self {
            ScatteringDiagram::Classical(d) => d.window,
            ScatteringDiagram::Quantum(d) => d.window,
        }
    }

    pub fn region(&self) -> &Region {
        match self {
            ScatteringDiagram::Classical(d) => &d.region,
            ScatteringDiagram::Quantum(d) => &d.region,
        }
    }

    pub fn is_consistent(&self) -> bool {
        match self {
            ScatteringDiagram::Classical(d) => d.consistent,
            ScatteringDiagram::Quantum(d) => d.consistent,
        }
    }

    pub fn num_rays(&self) -> usize {
        match self {
            ScatteringDiagram::Classical(d) => d.rays.len(),
            ScatteringDiagram::Quantum(d) => d.rays.len(),
        }
    }

    pub fn complete(&mut self, config: &CompletionConfig) -> Result<()> {
        match self {
            ScatteringDiagram::Classical(d) => d.complete(config),
            ScatteringDiagram::Quantum(d) => d.complete(config),
        }
    }

    pub fn audit(&self, config: &CompletionConfig) -> Result<usize> {
        match self {
            ScatteringDiagram::Classical(d) => d.audit(config),
            ScatteringDiagram::Quantum(d) => d.audit(config),
        }
    }
}

/// The initial diagram: two rays per `n` in the window.
pub fn initial_diagram(
    mode: Mode,
    kappa: i64,
    order: i64,
    window: (i64, i64),
    region: Region,
) -> Result<ScatteringDiagram> {
    if window.0 > window.1 {
        return Err(Error::domain("empty window"));
    }
    Ok(match mode {
        Mode::Classical => {
            ScatteringDiagram::Classical(Diagram::initial(kappa, order, window, region))
        }
        Mode::Quantum => {
            ScatteringDiagram::Quantum(Diagram::initial(kappa, order, window, region))
        }
    })
}

/// Window wide enough that every tangent line meeting the padded processing
/// region is present, with the `|n| <= order + 1` floor.
pub fn auto_window(order: i64, region: &Region, pad: &Q) -> (i64, i64) {
    let proc = region.padded(pad);
    let floor = order + 1;
    let mut lo = -floor;
    let mut hi = floor;
    // include n when the tangent line y = -n x + n^2/2 dips below y_max over
    // [x0, x1]; the minimum of a linear function sits at an endpoint
    let reaches = |n: i64| -> bool {
        let line = |x: &Q| -> Q { qi(-n) * x + q(n * n, 2) };
        line(&proc.x0).min(line(&proc.x1)) <= proc.y_max
    };
    let mut n = lo - 1;
    while reaches(n) {
        lo = n;
        n -= 1;
    }
    let mut n = hi + 1;
    while reaches(n) {
        hi = n;
        n += 1;
    }
    (lo, hi)
}

impl<C: Coeff> Diagram<C> {
    pub fn initial(kappa: i64, order: i64, window: (i64, i64), region: Region) -> Self {
        let mut rays = Vec::new();
        for n in window.0..=window.1 {
            rays.push(Ray::initial(n, true));
            rays.push(Ray::initial(n, false));
        }
        Diagram {
            kappa,
            order,
            window,
            region,
            rays,
            processed: Vec::new(),
            consistent: false,
        }
    }

    /// All pairwise support intersections inside `proc` and strictly above
    /// the parabola.
    fn candidate_points(&self, proc: &Region) -> BTreeSet<RationalPoint> {
        let mut out = BTreeSet::new();
        for (i, r1) in self.rays.iter().enumerate() {
            for r2 in self.rays.iter().skip(i + 1) {
                let den = r1.dir.det(&r2.dir);
                if den == 0 {
                    continue;
                }
                let dx = &r2.base.x - &r1.base.x;
                let dy = &r2.base.y - &r1.base.y;
                // t1 = cross(delta, d2) / cross(d1, d2), and symmetrically
                let t1 = (&dx * qi(r2.dir.b) - &dy * qi(r2.dir.a)) / qi(den);
                let t2 = (&dx * qi(r1.dir.b) - &dy * qi(r1.dir.a)) / qi(den);
                if t1 < q0() || t2 < q0() {
                    continue;
                }
                let p = RationalPoint::new(
                    &r1.base.x + &t1 * qi(r1.dir.a),
                    &r1.base.y + &t1 * qi(r1.dir.b),
                );
                if p.in_open_region() && proc.contains(&p) {
                    out.insert(p);
                }
            }
        }
        out
    }

    /// Angular events at `p`: one entry per crossed half-line.
    fn events_at(&self, p: &RationalPoint) -> Vec<(LatticeClass, i8, WallHamiltonian<C>)> {
        let grading = Grading::at_x(p.x.clone());
        let cutoff = qi(self.order);
        // merge per (half-line direction, sign); all walls sharing a
        // direction have parallel classes, so they commute and the order
        // within one direction is immaterial
        let mut merged: BTreeMap<(LatticeClass, i8), WallHamiltonian<C>> = BTreeMap::new();
        for ray in &self.rays {
            let Some(t) = ray.param_at(p) else { continue };
            let g0 = grading.grade(&ray.class0);
            if g0 <= q0() {
                // only possible for an initial ray exactly at its tangency
                // base; inert there
                continue;
            }
            let lmax = i64::try_from((&cutoff / &g0).floor().to_integer()).unwrap_or(0);
            let ham = ray.wall_ham(lmax);
            if ham.is_zero() {
                continue;
            }
            let mut push = |dir: LatticeClass, sign: i8| {
                let entry = merged
                    .entry((dir, sign))
                    .or_insert_with(|| WallHamiltonian::new(ham.class0));
                debug_assert_eq!(entry.class0, ham.class0);
                for (&l, c) in &ham.coeffs {
                    entry.add_coeff(l, c.clone());
                }
            };
            push(ray.dir, 1);
            if t > q0() {
                push(ray.dir.neg(), -1);
            }
        }
        let mut events: Vec<(LatticeClass, i8, WallHamiltonian<C>)> = merged
            .into_iter()
            .map(|((dir, sign), ham)| (dir, sign, ham))
            .collect();
        events.sort_by(|a, b| angular_order(&a.0, &b.0).then(a.1.cmp(&b.1)));
        events
    }

    /// Lowest-grade deviation of the loop composite at `p`, or `None` when
    /// consistent up to the order.
    pub fn loop_deviation(
        &self,
        p: &RationalPoint,
    ) -> Result<Option<(Q, Vec<(LatticeClass, C)>)>> {
        let events = self.events_at(p);
        lowest_deviation(&events, p, self.kappa, self.order)
    }

    /// Inserts the outgoing rays at `p` cancelling the deviation, iterating
    /// until the point is consistent up to the order. Returns the number of
    /// (class, grade) corrections applied.
    pub fn local_scatter(&mut self, p: &RationalPoint) -> Result<usize> {
        let mut corrections = 0usize;
        let mut last_grade: Option<Q> = None;
        for _ in 0..512 {
            let events = self.events_at(p);
            let Some((grade, slice)) = lowest_deviation(&events, p, self.kappa, self.order)?
            else {
                return Ok(corrections);
            };
            if let Some(g) = &last_grade {
                if &grade <= g {
                    return Err(Error::integrity(format!(
                        "local scattering at {p} did not raise the deviation grade ({g} -> {grade})"
                    )));
                }
            }
            last_grade = Some(grade.clone());
            for (cls, coeff) in slice {
                let (c0, l) = cls
                    .primitive_part()
                    .ok_or_else(|| Error::integrity("deviation with zero class"))?;
                // new outgoing ray of class c0 based at p; Hamiltonians merge
                let existing = self
                    .rays
                    .iter_mut()
                    .find(|r| r.base == *p && r.class0 == c0 && !r.is_initial());
                let target = match existing {
                    Some(r) => r,
                    None => {
                        self.rays.push(Ray {
                            base: p.clone(),
                            dir: c0.neg(),
                            class0: c0,
                            ham: BTreeMap::new(),
                            origin: RayOrigin::Scattered { at: p.clone() },
                        });
                        self.rays.last_mut().unwrap()
                    }
                };
                let add = coeff.neg();
                match target.ham.get_mut(&l) {
                    Some(e) => {
                        let s = e.add(&add);
                        if s.is_zero() {
                            target.ham.remove(&l);
                        } else {
                            *e = s;
                        }
                    }
                    None => {
                        target.ham.insert(l, add);
                    }
                }
                corrections += 1;
            }
            // prune rays whose Hamiltonian cancelled away entirely
            self.rays.retain(|r| r.is_initial() || !r.ham.is_empty());
        }
        Err(Error::integrity(format!(
            "local scattering at {p} exceeded the iteration guard"
        )))
    }

    /// Runs the completion loop inside the padded region.
    pub fn complete(&mut self, config: &CompletionConfig) -> Result<()> {
        let proc = self.region.padded(&config.pad);
        for _round in 0..config.max_rounds {
            let cands: Vec<RationalPoint> = self.candidate_points(&proc).into_iter().collect();
            let graded: Vec<(Q, RationalPoint)> = if config.parallel {
                cands
                    .par_iter()
                    .map(|p| self.loop_deviation(p).map(|d| d.map(|(g, _)| (g, p.clone()))))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .flatten()
                    .collect()
            } else {
                let mut v = Vec::new();
                for p in &cands {
                    if let Some((g, _)) = self.loop_deviation(p)? {
                        v.push((g, p.clone()));
                    }
                }
                v
            };
            if graded.is_empty() {
                self.consistent = true;
                return Ok(());
            }
            let mut order: Vec<(Q, RationalPoint)> = graded;
            order.sort_by(|a, b| {
                a.0.cmp(&b.0)
                    .then(a.1.y.cmp(&b.1.y))
                    .then(a.1.x.cmp(&b.1.x))
            });
            if let Schedule::Shuffled(seed) = config.schedule {
                shuffle(&mut order, seed);
            }
            for (_, p) in order {
                // the point may have become consistent through earlier
                // insertions in this round; local_scatter rechecks first
                let n = self.local_scatter(&p)?;
                if n > 0 {
                    match self.processed.iter_mut().find(|(pp, _)| pp == &p) {
                        Some((_, gr)) => *gr = qi(self.order),
                        None => self.processed.push((p.clone(), qi(self.order))),
                    }
                }
            }
        }
        Err(Error::integrity(
            "completion exceeded the round guard; raise max_rounds or lower the order",
        ))
    }

    /// Re-audits consistency at every candidate point with a fresh pass;
    /// returns the number of points checked.
    pub fn audit(&self, config: &CompletionConfig) -> Result<usize> {
        let proc = self.region.padded(&config.pad);
        let cands = self.candidate_points(&proc);
        let n = cands.len();
        for p in cands {
            if let Some((g, slice)) = self.loop_deviation(&p)? {
                return Err(Error::integrity(format!(
                    "audit found inconsistency at {p}, grade {g}, classes {:?}",
                    slice.iter().map(|(m, _)| *m).collect::<Vec<_>>()
                )));
            }
        }
        Ok(n)
    }

    /// Sum of ray Hamiltonians per vertical line: map `(d, chi) ->`
    /// coefficient of `z^{(0,-d)}` on the line `x = chi/d - 3/2` inside the
    /// extraction region.
    pub fn vertical_rays(&self, d_max: i64) -> Result<BTreeMap<(i64, i64), C>> {
        if d_max > self.order {
            return Err(Error::domain(format!(
                "requested degree {d_max} exceeds the truncation order {}",
                self.order
            )));
        }
        let vertical = LatticeClass::new(0, -1);
        let mut per_line: BTreeMap<Q, BTreeMap<i64, C>> = BTreeMap::new();
        for ray in &self.rays {
            if ray.class0 != vertical {
                continue;
            }
            let line = per_line.entry(ray.base.x.clone()).or_default();
            for (&l, c) in &ray.ham {
                match line.get_mut(&l) {
                    Some(e) => *e = e.add(c),
                    None => {
                        line.insert(l, c.clone());
                    }
                }
            }
        }
        let mut out = BTreeMap::new();
        for (x, coeffs) in per_line {
            if x < self.region.x0 || x > self.region.x1 {
                continue;
            }
            for d in 1..=d_max {
                // chi = d(x + 3/2) must be an integer on a legal line
                let chi_q = qi(d) * (&x + q(3, 2));
                if !chi_q.is_integer() {
                    continue;
                }
                let chi = i64::try_from(chi_q.to_integer())
                    .map_err(|_| Error::domain("chi out of range"))?;
                if let Some(c) = coeffs.get(&d) {
                    if !c.is_zero() {
                        out.insert((d, chi), c.clone());
                    }
                }
            }
        }
        Ok(out)
    }

    /// The image of the diagram under the `k`-fold unit shear.
    pub fn psi_shifted(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.window = (self.window.0 + k, self.window.1 + k);
        out.region = Region {
            x0: &self.region.x0 + qi(k),
            x1: &self.region.x1 + qi(k),
            y_max: self.region.y_max.clone(),
        };
        out.processed = self
            .processed
            .iter()
            .map(|(p, g)| (psi_shift_point(k, p), g.clone()))
            .collect();
        out.rays = self
            .rays
            .iter()
            .map(|r| {
                let origin = match &r.origin {
                    RayOrigin::Initial { n, plus } => RayOrigin::Initial {
                        n: n + k,
                        plus: *plus,
                    },
                    RayOrigin::Scattered { at } => RayOrigin::Scattered {
                        at: psi_shift_point(k, at),
                    },
                };
                Ray {
                    base: psi_shift_point(k, &r.base),
                    dir: psi_shift_class(k, &r.dir),
                    class0: psi_shift_class(k, &r.class0),
                    ham: r.ham.clone(),
                    origin,
                }
            })
            .collect();
        out
    }

    /// Canonical ray order for serialization and comparison.
    pub fn sort_canonical(&mut self) {
        self.rays.sort_by(|a, b| {
            a.base
                .cmp(&b.base)
                .then(a.class0.cmp(&b.class0))
                .then(a.dir.cmp(&b.dir))
        });
    }
}

/// Anticlockwise angular order of primitive directions starting at `(1, 0)`.
fn angular_order(u: &LatticeClass, v: &LatticeClass) -> std::cmp::Ordering {
    let sector = |w: &LatticeClass| -> u8 {
        if w.b > 0 || (w.b == 0 && w.a > 0) {
            0
        } else {
            1
        }
    };
    sector(u)
        .cmp(&sector(v))
        .then_with(|| 0i64.cmp(&(u.a * v.b - v.a * u.b)))
}

/// Composite of wall crossings around an anticlockwise loop, returned as the
/// lowest-grade deviation from the identity (class slice at that grade).
fn lowest_deviation<C: Coeff>(
    events: &[(LatticeClass, i8, WallHamiltonian<C>)],
    p: &RationalPoint,
    kappa: i64,
    order: i64,
) -> Result<Option<(Q, Vec<(LatticeClass, C)>)>> {
    if events.len() < 2 {
        return Ok(None);
    }
    let grading = Grading::at_x(p.x.clone());
    let cutoff = qi(order);
    let tests = [LatticeClass::new(1, 0), LatticeClass::new(0, 1)];
    let mut images = Vec::with_capacity(2);
    for e in tests {
        let mut image = TorusSeries::monomial(e, C::one());
        for (_, sign, ham) in events {
            image = apply_wall(ham, *sign, &image, kappa, &grading, &e, &cutoff)?;
        }
        images.push(image);
    }
    // candidate deviation grades
    let mut min_grade: Option<Q> = None;
    for (i, e) in tests.iter().enumerate() {
        for (m, _) in images[i].terms() {
            if m == e {
                continue;
            }
            let c = m.add(&e.neg());
            let g = grading.grade(&c);
            if g <= q0() {
                return Err(Error::integrity(format!(
                    "deviation class {c} with non-positive grade {g} at {p}"
                )));
            }
            if g <= cutoff {
                min_grade = Some(match min_grade {
                    None => g,
                    Some(mg) => mg.min(g),
                });
            }
        }
    }
    let Some(grade) = min_grade else {
        return Ok(None);
    };
    // reconstruct the deviation Hamiltonian slice at that grade; the series
    // coefficient of z^{c+e} is d_c * wall_mult(1, w) * twist(w), w = k<c,e>
    let mut seen_from: BTreeMap<LatticeClass, [Option<C>; 2]> = BTreeMap::new();
    for (i, e) in tests.iter().enumerate() {
        for (m, coeff) in images[i].terms() {
            if m == e {
                continue;
            }
            let c = m.add(&e.neg());
            if grading.grade(&c) != grade {
                continue;
            }
            let w = kappa * c.det(e);
            if w == 0 {
                continue;
            }
            let d = coeff.mul(&C::twist(-w)).div_wall_mult(w);
            seen_from.entry(c).or_insert([None, None])[i] = Some(d);
        }
    }
    let mut slice: Vec<(LatticeClass, C)> = Vec::new();
    for (c, pair) in seen_from {
        let d = match pair {
            [Some(a), Some(b)] => {
                if a != b {
                    return Err(Error::integrity(format!(
                        "deviation reconstruction mismatch at {p} for class {c}: {a:?} vs {b:?}"
                    )));
                }
                a
            }
            [Some(a), None] => a,
            [None, Some(b)] => b,
            [None, None] => continue,
        };
        if !d.is_zero() {
            slice.push((c, d));
        }
    }
    if slice.is_empty() {
        return Ok(None);
    }
    Ok(Some((grade, slice)))
}

/// Deterministic permutation from a seed (splitmix64-driven Fisher-Yates).
fn shuffle<T>(v: &mut [T], seed: u64) {
    let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
    let mut next = || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    for i in (1..v.len()).rev() {
        let j = (next() % (i as u64 + 1)) as usize;
        v.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classical_diagram(order: i64, window: (i64, i64)) -> Diagram<Q> {
        Diagram::initial(3, order, window, Region::standard())
    }

    fn quantum_diagram(order: i64, window: (i64, i64)) -> Diagram<YRational> {
        Diagram::initial(3, order, window, Region::standard())
    }

    #[test]
    fn initial_window_zero() {
        let d = classical_diagram(2, (0, 0));
        assert_eq!(d.rays.len(), 2);
        // both rays run along y = 0 with wall function 1 + z^{class}
        for r in &d.rays {
            assert_eq!(r.base, s_point(0));
            assert_eq!(r.class0, r.dir.neg());
            let h = r.wall_ham(3);
            assert_eq!(h.coeffs[&1], qi(1));
            assert_eq!(h.coeffs[&2], q(-1, 4));
            assert_eq!(h.coeffs[&3], q(1, 9));
        }
        assert!(initial_diagram(Mode::Classical, 3, 2, (3, 1), Region::standard()).is_err());
    }

    #[test]
    fn initial_window_pair_intersection() {
        let d = classical_diagram(2, (0, 1));
        assert_eq!(d.rays.len(), 4);
        let p = RationalPoint::new(q(1, 2), qi(0));
        let through: Vec<_> = d.rays.iter().filter(|r| r.contains(&p)).collect();
        assert_eq!(through.len(), 2);
        let proc = d.region.padded(&qi(1));
        assert!(d.candidate_points(&proc).contains(&p));
    }

    #[test]
    fn single_ray_loop_is_consistent() {
        let d = classical_diagram(3, (0, 0));
        // a point in the interior of the eastward support
        let p = RationalPoint::new(q(1, 3), qi(0));
        assert!(d.loop_deviation(&p).unwrap().is_none());
    }

    #[test]
    fn two_wall_deviation_leading_class() {
        let d = classical_diagram(2, (0, 1));
        let p = RationalPoint::new(q(1, 2), qi(0));
        let (grade, slice) = d.loop_deviation(&p).unwrap().expect("inconsistent");
        assert_eq!(grade, qi(1));
        assert_eq!(slice.len(), 1);
        let (cls, coeff) = &slice[0];
        assert_eq!(*cls, LatticeClass::new(0, -1));
        // the inserted Hamiltonian is -coeff, so the deviation itself is -3
        assert_eq!(coeff.clone(), qi(-3));
    }

    #[test]
    fn local_scatter_produces_vertical_ray() {
        let mut d = classical_diagram(2, (0, 1));
        let p = RationalPoint::new(q(1, 2), qi(0));
        d.local_scatter(&p).unwrap();
        let vert: Vec<_> = d
            .rays
            .iter()
            .filter(|r| r.class0 == LatticeClass::new(0, -1))
            .collect();
        assert_eq!(vert.len(), 1);
        let v = vert[0];
        assert_eq!(v.base, p);
        assert_eq!(v.dir, LatticeClass::new(0, 1));
        assert_eq!(v.ham[&1], qi(3));
        // degree-2 coefficient: -(Omega_{2,4} + Omega_{1,2}/4) = -(-6 + 3/4)
        assert_eq!(v.ham[&2], q(21, 4));
        // the point is now consistent
        assert!(d.loop_deviation(&p).unwrap().is_none());
    }

    #[test]
    fn quantum_local_scatter_anchor() {
        let mut d = quantum_diagram(2, (0, 1));
        let p = RationalPoint::new(q(1, 2), qi(0));
        d.local_scatter(&p).unwrap();
        let v = d
            .rays
            .iter()
            .find(|r| r.class0 == LatticeClass::new(0, -1))
            .expect("vertical ray");
        // kernel form: Omega_{1,2}(y^{1/2}) / (y^{1/2}-y^{-1/2}) with
        // Omega = y^{-1} + 1 + y
        let omega = v.ham[&1]
            .mul_laurent(&crate::ylaurent::YLaurent::binomial(1))
            .reduce_to_laurent()
            .unwrap();
        assert_eq!(omega, crate::ylaurent::YLaurent::quantum_integer(3));
    }

    #[test]
    fn completion_small_window() {
        let mut d = classical_diagram(2, (0, 1));
        // shrink the region to the single crossing for this test
        d.region = Region::new(qi(0), qi(1), qi(1));
        d.complete(&CompletionConfig {
            pad: q(1, 4),
            ..CompletionConfig::default()
        })
        .unwrap();
        assert!(d.consistent);
        let verts = d.vertical_rays(2).unwrap();
        // x = 1/2 carries (1,2) and (2,4)
        assert_eq!(verts[&(1, 2)], qi(3));
        assert_eq!(verts[&(2, 4)], q(21, 4));
    }

    #[test]
    fn vertical_rays_rejects_high_degree() {
        let d = classical_diagram(2, (0, 1));
        assert!(d.vertical_rays(5).is_err());
    }

    #[test]
    fn angular_order_is_anticlockwise() {
        let e = LatticeClass::new(1, 0);
        let n = LatticeClass::new(0, 1);
        let w = LatticeClass::new(-1, 0);
        let s = LatticeClass::new(0, -1);
        let mut dirs = vec![s, w, n, e];
        dirs.sort_by(angular_order);
        assert_eq!(dirs, vec![e, n, w, s]);
    }

    #[test]
    fn auto_window_covers_order() {
        let (lo, hi) = auto_window(2, &Region::standard(), &qi(1));
        assert!(lo <= -3 && hi >= 3);
    }
}
