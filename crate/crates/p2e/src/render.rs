//! Deterministic SVG rendering of a diagram: ray supports clipped to the
//! region, stroke weight decreasing with the ray's leading grade, the
//! parabola drawn exactly as a quadratic Bezier, and optional vertical-ray
//! labels.

use num::Zero;

fn q0() -> Q {
    <Q as Zero>::zero()
}

use crate::engine::{Diagram, Region, ScatteringDiagram};
use crate::rational::{decimal, q, qi, Q};
use crate::torus::{Coeff, Grading};
use crate::{Error, Result};

/// Rendering options.
#[derive(Clone, Debug)]
pub struct RenderStyle {
    /// Pixels per plane unit.
    pub scale: f64,
    /// Hide rays whose leading grade is `>= min_grade` when set.
    pub min_grade: Option<i64>,
    /// Label vertical rays with their `(d, chi)` pairs.
    pub labels: bool,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            scale: 240.0,
            min_grade: None,
            labels: false,
        }
    }
}

const DIGITS: u32 = 4;

struct Frame {
    x0: Q,
    x1: Q,
    y0: Q,
    y1: Q,
    scale: f64,
    margin: f64,
}

impl Frame {
    fn px(&self, x: &Q) -> String {
        let v = (x - &self.x0) * Q::from_float(self.scale).unwrap();
        format!("{}", decimal(&(v + Q::from_float(self.margin).unwrap()), DIGITS))
    }
    fn py(&self, y: &Q) -> String {
        // SVG grows downward
        let v = (&self.y1 - y) * Q::from_float(self.scale).unwrap();
        format!("{}", decimal(&(v + Q::from_float(self.margin).unwrap()), DIGITS))
    }
    fn width(&self) -> f64 {
        rational_f64(&(&self.x1 - &self.x0)) * self.scale + 2.0 * self.margin
    }
    fn height(&self) -> f64 {
        rational_f64(&(&self.y1 - &self.y0)) * self.scale + 2.0 * self.margin
    }
}

fn rational_f64(x: &Q) -> f64 {
    let n: f64 = x.numer().to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = x.denom().to_string().parse().unwrap_or(f64::NAN);
    n / d
}

/// Renders the diagram clipped to `region`.
pub fn render_svg(
    diagram: &ScatteringDiagram,
    region: &Region,
    style: &RenderStyle,
) -> Result<String> {
    if region.x0 >= region.x1 {
        return Err(Error::domain("empty region"));
    }
    match diagram {
        ScatteringDiagram::Classical(d) => render_generic(d, region, style),
        ScatteringDiagram::Quantum(d) => render_generic(d, region, style),
    }
}

fn render_generic<C: Coeff>(
    diagram: &Diagram<C>,
    region: &Region,
    style: &RenderStyle,
) -> Result<String> {
    // vertical extent: from the parabola minimum on the x-range up to y_max
    let corner = rational_f64(&region.x0)
        .abs()
        .max(rational_f64(&region.x1).abs());
    let y_low = -(corner * corner) / 2.0 - 0.1;
    let frame = Frame {
        x0: region.x0.clone(),
        x1: region.x1.clone(),
        y0: Q::from_float(y_low).unwrap_or_else(|| qi(-1)),
        y1: region.y_max.clone(),
        scale: style.scale,
        margin: 24.0,
    };
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" \
         viewBox=\"0 0 {:.0} {:.0}\">\n",
        frame.width(),
        frame.height(),
        frame.width(),
        frame.height()
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // the parabola y = -x^2/2 as an exact quadratic Bezier: the control
    // point is the intersection of the endpoint tangents
    let (a, b) = (&frame.x0, &frame.x1);
    let pa = RegionPoint::on_parabola(a);
    let pb = RegionPoint::on_parabola(b);
    let ctrl_x = (a + b) / qi(2);
    let ctrl_y = -(a * b) / qi(2);
    out.push_str(&format!(
        "<path d=\"M {} {} Q {} {} {} {}\" fill=\"none\" stroke=\"#c23616\" \
         stroke-width=\"1.0\" stroke-dasharray=\"6 3\"/>\n",
        frame.px(&pa.x),
        frame.py(&pa.y),
        frame.px(&ctrl_x),
        frame.py(&ctrl_y),
        frame.px(&pb.x),
        frame.py(&pb.y)
    ));
    // rays, canonically ordered
    let mut sorted = diagram.clone();
    sorted.sort_canonical();
    let mut labels = String::new();
    for ray in &sorted.rays {
        let grade = leading_grade(ray);
        if let Some(k) = style.min_grade {
            if grade >= q(k, 1) {
                continue;
            }
        }
        let Some((p1, p2)) = clip_ray(ray, &frame) else {
            continue;
        };
        let gf = rational_f64(&grade);
        let width = 2.0 / (1.0 + gf);
        let opacity = (1.0 / (1.0 + 0.45 * gf)).max(0.25);
        let color = if ray.is_initial() { "#111111" } else { "#0b5394" };
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" \
             stroke-width=\"{width:.3}\" stroke-opacity=\"{opacity:.3}\"/>\n",
            frame.px(&p1.x),
            frame.py(&p1.y),
            frame.px(&p2.x),
            frame.py(&p2.y)
        ));
        if style.labels && ray.class0 == crate::lattice::LatticeClass::new(0, -1) {
            // label (d, chi) for the lowest degree on the line
            if let Some((&l, _)) = ray.ham.iter().next() {
                let chi = qi(l) * (&ray.base.x + q(3, 2));
                if chi.is_integer() {
                    labels.push_str(&format!(
                        "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#0b5394\">({},{})</text>\n",
                        frame.px(&ray.base.x),
                        frame.py(&frame.y1.clone()),
                        l,
                        chi.to_integer()
                    ));
                }
            }
        }
    }
    out.push_str(&labels);
    out.push_str("</svg>\n");
    Ok(out)
}

struct RegionPoint {
    x: Q,
    y: Q,
}

impl RegionPoint {
    fn on_parabola(x: &Q) -> Self {
        RegionPoint {
            x: x.clone(),
            y: -(x * x) / qi(2),
        }
    }
}

/// Grade of the lowest Hamiltonian term at the ray's own base (0 for initial
/// rays by tangency).
fn leading_grade<C: Coeff>(ray: &crate::engine::Ray<C>) -> Q {
    if ray.is_initial() {
        return q0();
    }
    let grading = Grading::at_x(ray.base.x.clone());
    let g0 = grading.grade(&ray.class0);
    match ray.ham.keys().next() {
        Some(&l) => g0 * qi(l),
        None => g0,
    }
}

/// Clips the support half-line to the frame box; `None` when disjoint.
fn clip_ray<C: Coeff>(
    ray: &crate::engine::Ray<C>,
    frame: &Frame,
) -> Option<(RegionPoint, RegionPoint)> {
    // parametrize p = base + t dir and intersect the t-intervals cut out by
    // the four box sides
    let mut ok = true;
    let mut t_lo = q0();
    let mut t_hi: Option<Q> = None;
    let mut side = |den: i64, num: Q, upper: bool| {
        if den == 0 {
            if (upper && num < q0()) || (!upper && num > q0()) {
                ok = false;
            }
            return;
        }
        let bound = num / qi(den);
        let effective_upper = (den > 0) == upper;
        if effective_upper {
            t_hi = Some(match &t_hi {
                None => bound,
                Some(t) => t.clone().min(bound),
            });
        } else {
            t_lo = t_lo.clone().max(bound);
        }
    };
    side(ray.dir.a, &frame.x1 - &ray.base.x, true);
    side(ray.dir.a, &frame.x0 - &ray.base.x, false);
    side(ray.dir.b, &frame.y1 - &ray.base.y, true);
    side(ray.dir.b, &frame.y0 - &ray.base.y, false);
    if !ok {
        return None;
    }
    // x bounds when dir.a == 0: base.x must lie inside
    if ray.dir.a == 0 && (ray.base.x < frame.x0 || ray.base.x > frame.x1) {
        return None;
    }
    if ray.dir.b == 0 && (ray.base.y < frame.y0 || ray.base.y > frame.y1) {
        return None;
    }
    let hi = t_hi?;
    if hi < t_lo {
        return None;
    }
    let p = |t: &Q| RegionPoint {
        x: &ray.base.x + t * qi(ray.dir.a),
        y: &ray.base.y + t * qi(ray.dir.b),
    };
    Some((p(&t_lo), p(&hi)))
}
