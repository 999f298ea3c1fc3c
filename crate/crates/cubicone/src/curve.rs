//! Real plane-curve machinery for the cubic family and its Hessian:
//! inflexions, asymptotes, branch tracing, component counting, tangents
//! through a point, and line-cubic intersections.
//!
//! Every smooth family member crosses the line at infinity z = 0 exactly at
//! the three inflexions B1 = (0:1:0), B2 = (1:0:0), B3 = (1:-1:0), so each
//! unbounded affine branch joins two inflexion directions. Branches are named
//! by that pair (`Arc12`, `Arc23`, `Arc31`) plus `Oval` for the bounded
//! component of a two-component curve. The Hessian locus of `F_k` is traced
//! as the family member at the dual parameter `k'`.

use std::fmt;

use num::{BigRational, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::forms::{hesse_param_dual, regime_of, Cubic, ParamCubic, Regime, TrilinearForm, Vec3};
use crate::poly::{float_roots_in, RatPoly};
use crate::scalar::{ratio_i64, Scalar};

/// Line `l x + m y + n z = 0`, stored up to scale with the first nonzero
/// coefficient positive (and equal to one on the exact path).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub coeffs: [Scalar; 3],
}

impl Line {
    pub fn new(l: impl Into<Scalar>, m: impl Into<Scalar>, n: impl Into<Scalar>) -> Self {
        let mut line = Line {
            coeffs: [l.into(), m.into(), n.into()],
        };
        line.normalize();
        line
    }

    fn normalize(&mut self) {
        assert!(
            self.coeffs.iter().any(|c| !c.is_zero_value()),
            "line coefficients all zero"
        );
        if self.coeffs.iter().all(|c| c.is_exact()) {
            let first = self
                .coeffs
                .iter()
                .find(|c| !c.is_zero_value())
                .unwrap()
                .clone();
            let inv = first.recip();
            for c in &mut self.coeffs {
                *c = &*c * &inv;
            }
        } else {
            let v: Vec<f64> = self.coeffs.iter().map(|c| c.to_f64()).collect();
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let first = v.iter().find(|c| **c != 0.0).unwrap();
            let s = first.signum() / norm;
            for (c, val) in self.coeffs.iter_mut().zip(v) {
                *c = Scalar::Float(val * s);
            }
        }
    }

    pub fn eval(&self, p: &Vec3) -> Scalar {
        &self.coeffs[0] * &p.x + &self.coeffs[1] * &p.y + &self.coeffs[2] * &p.z
    }

    pub fn contains(&self, p: &Vec3, eps: f64) -> bool {
        let v = self.eval(p).to_f64();
        let scale: f64 = self
            .coeffs
            .iter()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
            * p.to_f64().iter().map(|c| c.abs()).fold(0.0, f64::max).max(1.0);
        v.abs() <= eps * scale.max(1.0)
    }

    pub fn projectively_equal(&self, other: &Line, eps: f64) -> bool {
        let a = self.coeffs.iter().map(|c| c.to_f64()).collect::<Vec<_>>();
        let b = other.coeffs.iter().map(|c| c.to_f64()).collect::<Vec<_>>();
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        cross.iter().all(|c| c.abs() <= eps)
    }

    /// Two independent points spanning the line.
    pub fn spanning_points(&self) -> (Vec3, Vec3) {
        let [l, m, n] = &self.coeffs;
        let candidates = [
            Vec3::new(Scalar::zero(), n.clone(), -m),
            Vec3::new(-n, Scalar::zero(), l.clone()),
            Vec3::new(m.clone(), -l, Scalar::zero()),
        ];
        let mut best: Vec<&Vec3> = candidates.iter().filter(|v| !v.is_zero()).collect();
        assert!(best.len() >= 2, "degenerate line");
        // Any two of the nonzero cross products are independent for a valid
        // line unless proportional; the three candidates pairwise span unless
        // one is zero, so take the first two and fall back on the third.
        let p = best.remove(0).clone();
        for q in best {
            let cx = &p.y * &q.z - &p.z * &q.y;
            let cy = &p.z * &q.x - &p.x * &q.z;
            let cz = &p.x * &q.y - &p.y * &q.x;
            if !(cx.is_zero_value() && cy.is_zero_value() && cz.is_zero_value()) {
                return (p, q.clone());
            }
        }
        unreachable!("line has rank-2 coefficient span");
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x + {}y + {}z = 0",
            self.coeffs[0], self.coeffs[1], self.coeffs[2]
        )
    }
}

/// Which curve of the pair a branch belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveKind {
    Cubic,
    Hessian,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::Cubic => "cubic",
            CurveKind::Hessian => "hessian",
        })
    }
}

/// Affine branch, named by its pair of inflexion directions at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchLabel {
    /// From the B1 direction to the B2 direction.
    Arc12,
    /// From the B2 direction to the B3 direction.
    Arc23,
    /// From the B3 direction to the B1 direction.
    Arc31,
    /// Bounded component (only two-component curves).
    Oval,
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchLabel::Arc12 => "B1B2",
            BranchLabel::Arc23 => "B2B3",
            BranchLabel::Arc31 => "B3B1",
            BranchLabel::Oval => "oval",
        })
    }
}

/// Branch of the cubic or of its Hessian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchId {
    pub curve: CurveKind,
    pub label: BranchLabel,
}

impl BranchId {
    pub fn new(curve: CurveKind, label: BranchLabel) -> Self {
        BranchId { curve, label }
    }

    /// The distinguished cubic branch of the hybrid cone (`C1`): the branch
    /// of `F_k = 0` joining the B1 and B2 directions.
    pub fn c1() -> Self {
        BranchId::new(CurveKind::Cubic, BranchLabel::Arc12)
    }

    /// The distinguished Hessian branch of the hybrid cone (`C2`).
    pub fn c2() -> Self {
        BranchId::new(CurveKind::Hessian, BranchLabel::Arc12)
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.curve, self.label)
    }
}

/// The three real inflexion points, on the line z = 0.
pub fn inflexion_points() -> [Vec3; 3] {
    [
        Vec3::new(0, 1, 0),
        Vec3::new(1, 0, 0),
        Vec3::new(1, -1, 0),
    ]
}

/// Tangent lines to the cubic at the inflexions:
/// `x = -1/(k-1)`, `y = -1/(k-1)`, `x + y = k/(k-1)`.
pub fn asymptotes(k: &Scalar) -> Result<[Line; 3], Error> {
    let km1 = k - Scalar::one();
    if km1.is_zero_value() {
        return Err(Error::DegenerateParameter {
            k: k.to_string(),
            context: "the cubic splits into lines; no affine asymptote data".into(),
        });
    }
    Ok([
        Line::new(km1.clone(), Scalar::zero(), Scalar::one()),
        Line::new(Scalar::zero(), km1.clone(), Scalar::one()),
        Line::new(km1.clone(), km1, -k),
    ])
}

/// Tangent line at a point on the curve: coefficients are the gradient.
pub fn tangent_line_at<C: Cubic + ?Sized>(cubic: &C, p: &Vec3, eps: f64) -> Result<Line, Error> {
    let value = cubic.eval(p).to_f64();
    let scale = p
        .to_f64()
        .iter()
        .map(|c| c.abs())
        .fold(0.0, f64::max)
        .max(1.0)
        .powi(3)
        * form_scale(cubic.form_ref());
    if value.abs() > eps.max(1e-7) * scale {
        return Err(Error::precondition(format!(
            "point {p} is not on the curve (value {value})"
        )));
    }
    let g = cubic.gradient(p);
    if g.to_f64().iter().all(|c| c.abs() <= eps * scale) {
        return Err(Error::SingularPoint(
            p.x.to_string(),
            p.y.to_string(),
            p.z.to_string(),
        ));
    }
    Ok(Line::new(g.x, g.y, g.z))
}

fn form_scale(form: &TrilinearForm) -> f64 {
    form.mu_values()
        .iter()
        .map(|m| m.to_f64().abs())
        .fold(0.0, f64::max)
        .max(1.0)
}

/// Real intersection point of a line with a cubic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveIntersection {
    pub point: Vec3,
    pub multiplicity: usize,
    /// Exact multiplicity versus float cluster heuristic.
    pub confident: bool,
}

/// Real intersections of a line with a cubic, with multiplicity.
///
/// The restriction to the line is a univariate cubic; rational inputs go
/// through exact Sturm isolation, floats through bracketed bisection with a
/// cluster heuristic for repeated contact (clusters closer than the cube
/// root of the refinement tolerance merge, flagged as unconfident).
pub fn line_cubic_intersections(
    line: &Line,
    form: &TrilinearForm,
) -> Result<Vec<CurveIntersection>, Error> {
    let (p, q) = line.spanning_points();
    let three = Scalar::int(3);
    let c0 = form.contract(&p, &p, &p);
    let c1 = &three * form.contract(&p, &p, &q);
    let c2 = &three * form.contract(&p, &q, &q);
    let c3 = form.contract(&q, &q, &q);
    let coeffs = [c0, c1, c2, c3];
    if coeffs.iter().all(|c| c.is_zero_value()) {
        return Err(Error::precondition("line is a component of the cubic"));
    }
    let mut out = vec![];
    let exact = coeffs.iter().all(|c| c.is_exact()) && p.is_exact() && q.is_exact();
    // Intersection at the parametrization's point at infinity (the point Q)
    // shows up as degree drop.
    let inf_mult = coeffs
        .iter()
        .rev()
        .take_while(|c| c.is_zero_value())
        .count();
    if inf_mult > 0 {
        out.push(CurveIntersection {
            point: q.projective_normalize(),
            multiplicity: inf_mult,
            confident: exact,
        });
    }
    if exact {
        let rp = RatPoly::new(
            coeffs
                .iter()
                .map(|c| c.as_exact().unwrap().clone())
                .collect(),
        );
        if rp.degree() >= 1 || !rp.coeffs[0].is_zero() {
            for (root, mult) in rp.real_roots(&ratio_i64(1, 1i64 << 52)) {
                let root = snap_rational_root(&rp, root);
                let t = Scalar::Exact(root);
                let pt = p.add(&q.scale(&t));
                out.push(CurveIntersection {
                    point: pt.projective_normalize(),
                    multiplicity: mult,
                    confident: true,
                });
            }
        }
    } else {
        let fc: Vec<f64> = coeffs.iter().map(|c| c.to_f64()).collect();
        let bound = 1.0
            + fc.iter().map(|c| c.abs()).fold(0.0, f64::max)
                / fc.iter().rev().find(|c| **c != 0.0).unwrap().abs();
        let tol = 1e-12;
        let roots = float_roots_in(&fc, -bound, bound, 512, tol);
        let cluster_eps = tol.cbrt();
        let mut i = 0;
        while i < roots.len() {
            let mut j = i + 1;
            while j < roots.len() && roots[j] - roots[j - 1] < cluster_eps {
                j += 1;
            }
            let mult = j - i;
            let t = Scalar::Float(roots[(i + j - 1) / 2]);
            let pt = p.add(&q.scale(&t));
            out.push(CurveIntersection {
                point: pt.projective_normalize(),
                multiplicity: mult,
                confident: mult == 1,
            });
            i = j;
        }
    }
    Ok(out)
}

/// If the isolated root is within the isolation limit of a nearby "nice"
/// rational obtained from the gcd of the polynomial and its derivative (a
/// repeated root) keep the exact value; otherwise return the midpoint as is.
fn snap_rational_root(p: &RatPoly, approx: BigRational) -> BigRational {
    let g = p.gcd(&p.derivative());
    if g.degree() == 1 {
        let exact = -&g.coeffs[0] / &g.coeffs[1];
        if (&exact - &approx).abs() < ratio_i64(1, 1 << 20) {
            return exact;
        }
    }
    // Simple rational roots of small height are recovered exactly so that
    // tangency points come out as closed-form coordinates.
    for den in 1i64..=64 {
        let num = (&approx * ratio_i64(den, 1)).round();
        let cand = BigRational::new(num.numer().clone(), den.into());
        if (&cand - &approx).abs() < ratio_i64(1, 1 << 26) && p.eval(&cand).is_zero() {
            return cand;
        }
    }
    approx
}

/// Traced affine branch. Interior entries are affine points (z = 1); an
/// unbounded branch begins and ends with a direction entry (z = 0).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Polyline {
    pub branch: BranchId,
    /// Parameter of the traced family member (the dual parameter for
    /// Hessian branches).
    pub kappa: f64,
    pub points: Vec<[f64; 3]>,
    /// Arclength-monotone parameter aligned with `points`.
    pub params: Vec<f64>,
    pub closed: bool,
}

impl Polyline {
    /// Indices of the affine entries.
    fn affine_range(&self) -> std::ops::Range<usize> {
        let a = usize::from(self.points.first().map_or(false, |p| p[2] == 0.0));
        let b = usize::from(self.points.last().map_or(false, |p| p[2] == 0.0));
        a..self.points.len() - b
    }

    pub fn affine_points(&self) -> &[[f64; 3]] {
        &self.points[self.affine_range()]
    }

    pub fn start_direction(&self) -> Option<[f64; 2]> {
        self.points
            .first()
            .filter(|p| p[2] == 0.0)
            .map(|p| [p[0], p[1]])
    }

    pub fn end_direction(&self) -> Option<[f64; 2]> {
        self.points
            .last()
            .filter(|p| p[2] == 0.0)
            .map(|p| [p[0], p[1]])
    }

    /// Affine point at an arclength parameter, linearly interpolated.
    pub fn point_at(&self, t: f64) -> [f64; 2] {
        let r = self.affine_range();
        let pts = &self.points[r.clone()];
        let params = &self.params[r];
        let t = t.clamp(params[0], params[params.len() - 1]);
        let idx = params.partition_point(|p| *p <= t).min(params.len() - 1);
        if idx == 0 {
            return [pts[0][0], pts[0][1]];
        }
        let (t0, t1) = (params[idx - 1], params[idx]);
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        [
            pts[idx - 1][0] + w * (pts[idx][0] - pts[idx - 1][0]),
            pts[idx - 1][1] + w * (pts[idx][1] - pts[idx - 1][1]),
        ]
    }

    /// Parameter of the point of the polyline closest to a target point,
    /// projecting onto segments.
    pub fn nearest_param(&self, xy: [f64; 2]) -> f64 {
        let r = self.affine_range();
        let mut best = (f64::MAX, self.params[r.start]);
        for i in r.clone() {
            if i + 1 >= r.end {
                break;
            }
            let a = self.points[i];
            let b = self.points[i + 1];
            let ab = [b[0] - a[0], b[1] - a[1]];
            let len2 = ab[0] * ab[0] + ab[1] * ab[1];
            let t = if len2 > 0.0 {
                (((xy[0] - a[0]) * ab[0] + (xy[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let px = a[0] + t * ab[0];
            let py = a[1] + t * ab[1];
            let d = (px - xy[0]).powi(2) + (py - xy[1]).powi(2);
            if d < best.0 {
                best = (d, self.params[i] + t * (self.params[i + 1] - self.params[i]));
            }
        }
        best.1
    }

    /// CSV export: `#` metadata header then `x,y` rows.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# branch={} k={}\nx,y\n", self.branch, self.kappa);
        for p in self.affine_points() {
            s.push_str(&format!("{},{}\n", p[0], p[1]));
        }
        s
    }
}

/// Inflexion direction for an end of a labelled arc, as a unit-free vector.
fn end_directions(label: BranchLabel) -> Option<([f64; 2], [f64; 2])> {
    // Directions up to sign; the actual sign is fixed by the trace.
    match label {
        BranchLabel::Arc12 => Some(([0.0, 1.0], [1.0, 0.0])),
        BranchLabel::Arc23 => Some(([1.0, 0.0], [1.0, -1.0])),
        BranchLabel::Arc31 => Some(([1.0, -1.0], [0.0, 1.0])),
        BranchLabel::Oval => None,
    }
}

fn dir_matches(d: [f64; 2], axis: [f64; 2]) -> bool {
    let cross = d[0] * axis[1] - d[1] * axis[0];
    let n = (d[0] * d[0] + d[1] * d[1]).sqrt() * (axis[0] * axis[0] + axis[1] * axis[1]).sqrt();
    cross.abs() <= 0.2 * n
}

struct AffineCurve {
    kappa: f64,
}

impl AffineCurve {
    fn eval(&self, x: f64, y: f64) -> f64 {
        let w = 1.0 - x - y;
        -x * x * x - y * y * y - w * w * w + 3.0 * self.kappa * x * y * w
    }

    fn scale(&self, x: f64, y: f64) -> f64 {
        let w = 1.0 - x - y;
        (x.abs().powi(3) + y.abs().powi(3) + w.abs().powi(3) + (3.0 * self.kappa * x * y * w).abs())
            .max(1.0)
    }

    fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        let w = 1.0 - x - y;
        [
            -3.0 * x * x + 3.0 * w * w + 3.0 * self.kappa * y * (w - x),
            -3.0 * y * y + 3.0 * w * w + 3.0 * self.kappa * x * (w - y),
        ]
    }

    /// Newton-correct a point onto the curve along the gradient.
    fn correct(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let mut p = p;
        for _ in 0..25 {
            let f = self.eval(p[0], p[1]);
            let s = self.scale(p[0], p[1]);
            if f.abs() <= 1e-13 * s {
                return Some(p);
            }
            let g = self.grad(p[0], p[1]);
            let g2 = g[0] * g[0] + g[1] * g[1];
            if g2 < 1e-30 {
                return None;
            }
            p = [p[0] - f * g[0] / g2, p[1] - f * g[1] / g2];
        }
        let f = self.eval(p[0], p[1]);
        (f.abs() <= 1e-9 * self.scale(p[0], p[1])).then_some(p)
    }
}

/// Maximum affine radius before a trace is declared to have reached its
/// asymptotic direction.
const TRACE_RADIUS: f64 = 40.0;

/// Predictor-corrector trace of the branch of `F_k = 0` (or of its Hessian,
/// traced as the family member at the dual parameter).
///
/// `resolution` controls the target number of vertices. The result is
/// oriented from the first to the second inflexion direction in the label
/// (ovals run counterclockwise) and satisfies `|F| <= 1e-7 * scale` at every
/// vertex.
pub fn trace_branch(k: &Scalar, branch: BranchId, resolution: usize) -> Result<Polyline, Error> {
    let regime = regime_of(k);
    let kappa_scalar = match branch.curve {
        CurveKind::Cubic => k.clone(),
        CurveKind::Hessian => hesse_param_dual(k).map_err(|_| Error::InvalidBranch {
            branch: branch.to_string(),
            regime: regime.to_string(),
        })?,
    };
    let kappa = kappa_scalar.to_f64();
    if !kappa.is_finite() || kappa == 1.0 {
        return Err(Error::InvalidBranch {
            branch: branch.to_string(),
            regime: regime.to_string(),
        });
    }
    if branch.label == BranchLabel::Oval && kappa < 1.0 {
        return Err(Error::InvalidBranch {
            branch: branch.to_string(),
            regime: regime.to_string(),
        });
    }
    let curve = AffineCurve { kappa };
    let resolution = resolution.max(16);
    let seed = seed_point(&curve, branch.label).ok_or_else(|| {
        Error::TraceError(format!("no seed found for {branch} at kappa = {kappa}"))
    })?;

    if branch.label == BranchLabel::Oval {
        return trace_closed(&curve, branch, seed, resolution);
    }
    trace_open(&curve, branch, seed, resolution)
}

fn seed_point(curve: &AffineCurve, label: BranchLabel) -> Option<[f64; 2]> {
    let kappa = curve.kappa;
    match label {
        BranchLabel::Arc12 | BranchLabel::Oval => {
            // Scan the symmetry line x = y: F(t,t,1) = 0.
            // -2t^3 - (1-2t)^3 + 3 kappa t^2 (1-2t)
            let c = cubic_on_diagonal(kappa);
            let roots = float_roots_in(&c, -60.0, 60.0, 4096, 1e-13);
            match label {
                BranchLabel::Arc12 => {
                    if kappa > 1.0 {
                        roots.iter().copied().find(|t| *t < 0.0).map(|t| [t, t])
                    } else {
                        roots.iter().copied().find(|t| *t > 0.5).map(|t| [t, t])
                    }
                }
                _ => {
                    // Oval crosses the diagonal twice inside the triangle.
                    let inside: Vec<f64> =
                        roots.iter().copied().filter(|t| *t > 0.0 && *t < 0.5).collect();
                    inside.first().map(|t| [*t, *t])
                }
            }
        }
        BranchLabel::Arc23 => {
            if kappa > 1.0 {
                // Sector y < 0, x + y > 1: scan a low horizontal line.
                let y0 = -(2.0 + (2.0 / (kappa - 1.0)).abs());
                scan_horizontal(curve, y0, |x| x + y0 > 1.0)
            } else {
                // Region x < 0, y > 0: scan a far-left vertical line.
                let x0 = -(2.0 + (2.0 / (1.0 - kappa)).abs() + (kappa / (kappa - 1.0)).abs());
                scan_vertical(curve, x0, |y| y > 0.0)
            }
        }
        BranchLabel::Arc31 => {
            if kappa > 1.0 {
                let x0 = -(2.0 + (2.0 / (kappa - 1.0)).abs());
                scan_vertical(curve, x0, |y| x0 + y > 1.0)
            } else {
                let y0 = -(2.0 + (2.0 / (1.0 - kappa)).abs() + (kappa / (kappa - 1.0)).abs());
                scan_horizontal(curve, y0, |x| x > 0.0)
            }
        }
    }
}

fn cubic_on_diagonal(kappa: f64) -> [f64; 4] {
    // F(t,t,1) = -2t^3 - (1-2t)^3 + 3 kappa t^2 (1-2t)
    //          = (6 + 3 kappa ... ) expand:
    // -(1-2t)^3 = -1 + 6t - 12t^2 + 8t^3
    // 3 kappa t^2 (1-2t) = 3 kappa t^2 - 6 kappa t^3
    [
        -1.0,
        6.0,
        -12.0 + 3.0 * kappa,
        6.0 - 6.0 * kappa,
    ]
}

fn scan_horizontal(
    curve: &AffineCurve,
    y0: f64,
    accept: impl Fn(f64) -> bool,
) -> Option<[f64; 2]> {
    // F(x, y0, 1) as a polynomial in x (degree <= 2 because the family has
    // no x^3 term).
    let w0 = 1.0 - y0;
    // f(x) = -x^3... expand manually: w = w0 - x.
    // -x^3 - y0^3 - (w0 - x)^3 + 3k x y0 (w0 - x)
    // (w0-x)^3 = w0^3 - 3w0^2 x + 3 w0 x^2 - x^3
    let k = curve.kappa;
    let c0 = -y0 * y0 * y0 - w0 * w0 * w0;
    let c1 = 3.0 * w0 * w0 + 3.0 * k * y0 * w0;
    let c2 = -3.0 * w0 - 3.0 * k * y0;
    let roots = float_roots_in(&[c0, c1, c2], -200.0, 200.0, 8192, 1e-13);
    roots.into_iter().find(|x| accept(*x)).map(|x| [x, y0])
}

fn scan_vertical(curve: &AffineCurve, x0: f64, accept: impl Fn(f64) -> bool) -> Option<[f64; 2]> {
    let w0 = 1.0 - x0;
    let k = curve.kappa;
    let c0 = -x0 * x0 * x0 - w0 * w0 * w0;
    let c1 = 3.0 * w0 * w0 + 3.0 * k * x0 * w0;
    let c2 = -3.0 * w0 - 3.0 * k * x0;
    let roots = float_roots_in(&[c0, c1, c2], -200.0, 200.0, 8192, 1e-13);
    roots.into_iter().find(|y| accept(*y)).map(|y| [x0, y])
}

fn unit_tangent(curve: &AffineCurve, p: [f64; 2]) -> [f64; 2] {
    let g = curve.grad(p[0], p[1]);
    let n = (g[0] * g[0] + g[1] * g[1]).sqrt();
    [-g[1] / n, g[0] / n]
}

/// March from the seed in one direction until leaving the trace radius.
fn march(
    curve: &AffineCurve,
    seed: [f64; 2],
    mut dir: [f64; 2],
    h_base: f64,
    max_steps: usize,
) -> Result<Vec<[f64; 2]>, Error> {
    let mut pts = vec![seed];
    let mut p = seed;
    let mut h = h_base;
    let mut steps = 0;
    while p[0].abs() < TRACE_RADIUS && p[1].abs() < TRACE_RADIUS {
        steps += 1;
        if steps > max_steps {
            return Err(Error::TraceError("step budget exhausted".into()));
        }
        let t = unit_tangent(curve, p);
        let t = if t[0] * dir[0] + t[1] * dir[1] >= 0.0 {
            t
        } else {
            [-t[0], -t[1]]
        };
        // Larger steps far out, where the branch hugs its asymptote.
        let reach = 1.0 + 0.35 * (p[0].abs() + p[1].abs());
        let predicted = [p[0] + t[0] * h * reach, p[1] + t[1] * h * reach];
        let corrected = match curve.correct(predicted) {
            Some(c) => c,
            None => {
                h *= 0.5;
                if h < 1e-9 {
                    return Err(Error::TraceError("corrector diverged".into()));
                }
                continue;
            }
        };
        let t_new = unit_tangent(curve, corrected);
        let t_new = if t_new[0] * t[0] + t_new[1] * t[1] >= 0.0 {
            t_new
        } else {
            [-t_new[0], -t_new[1]]
        };
        let turn = (t[0] * t_new[0] + t[1] * t_new[1]).clamp(-1.0, 1.0).acos();
        if turn > 0.35 && h > 1e-8 {
            h *= 0.5;
            continue;
        }
        if turn < 0.04 {
            h = (h * 1.4).min(h_base);
        }
        dir = t_new;
        p = corrected;
        pts.push(p);
    }
    Ok(pts)
}

fn trace_open(
    curve: &AffineCurve,
    branch: BranchId,
    seed: [f64; 2],
    resolution: usize,
) -> Result<Polyline, Error> {
    let seed = curve
        .correct(seed)
        .ok_or_else(|| Error::TraceError("seed does not converge onto the curve".into()))?;
    let h = 10.0 / resolution as f64;
    let t0 = unit_tangent(curve, seed);
    let fwd = march(curve, seed, t0, h, resolution * 300)?;
    let bwd = march(curve, seed, [-t0[0], -t0[1]], h, resolution * 300)?;
    let mut pts: Vec<[f64; 2]> = bwd.into_iter().rev().collect();
    pts.extend_from_slice(&fwd[1..]);

    // Ideal directions at both ends.
    let dir_of = |a: [f64; 2], b: [f64; 2]| -> [f64; 2] {
        let d = [b[0] - a[0], b[1] - a[1]];
        let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
        [d[0] / n, d[1] / n]
    };
    let start_dir = dir_of(pts[1], pts[0]);
    let end_dir = dir_of(pts[pts.len() - 2], pts[pts.len() - 1]);

    // Orient so the first end matches the first inflexion in the label.
    let (first_axis, _) = end_directions(branch.label).expect("open branch");
    let mut pts = pts;
    let (mut start_dir, mut end_dir) = (start_dir, end_dir);
    if !dir_matches(start_dir, first_axis) {
        pts.reverse();
        std::mem::swap(&mut start_dir, &mut end_dir);
    }
    if !dir_matches(start_dir, first_axis) {
        return Err(Error::TraceError(format!(
            "branch {branch} ends do not match its label"
        )));
    }

    let mut points = Vec::with_capacity(pts.len() + 2);
    let mut params = Vec::with_capacity(pts.len() + 2);
    points.push([start_dir[0], start_dir[1], 0.0]);
    params.push(0.0);
    let mut acc = 1.0;
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            let q = pts[i - 1];
            acc += ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        }
        points.push([p[0], p[1], 1.0]);
        params.push(acc);
    }
    points.push([end_dir[0], end_dir[1], 0.0]);
    params.push(acc + 1.0);
    Ok(Polyline {
        branch,
        kappa: curve.kappa,
        points,
        params,
        closed: false,
    })
}

fn trace_closed(
    curve: &AffineCurve,
    branch: BranchId,
    seed: [f64; 2],
    resolution: usize,
) -> Result<Polyline, Error> {
    let seed = curve
        .correct(seed)
        .ok_or_else(|| Error::TraceError("seed does not converge onto the curve".into()))?;
    // Estimate the oval size from the diagonal crossings to set the step.
    let c = cubic_on_diagonal(curve.kappa);
    let diag: Vec<f64> = float_roots_in(&c, 0.0, 0.5, 2048, 1e-13);
    let extent = if diag.len() >= 2 {
        (diag[diag.len() - 1] - diag[0]) * std::f64::consts::SQRT_2
    } else {
        0.5
    };
    let h = (3.5 * extent / resolution as f64).max(1e-6);
    let mut p = seed;
    let mut dir = unit_tangent(curve, seed);
    let mut pts = vec![seed];
    for step in 0..resolution * 40 {
        let t = unit_tangent(curve, p);
        let t = if t[0] * dir[0] + t[1] * dir[1] >= 0.0 {
            t
        } else {
            [-t[0], -t[1]]
        };
        let predicted = [p[0] + t[0] * h, p[1] + t[1] * h];
        let corrected = curve
            .correct(predicted)
            .ok_or_else(|| Error::TraceError("oval corrector diverged".into()))?;
        dir = t;
        p = corrected;
        let d0 = ((p[0] - seed[0]).powi(2) + (p[1] - seed[1]).powi(2)).sqrt();
        if step > 8 && d0 < h {
            break;
        }
        pts.push(p);
    }
    // Counterclockwise orientation by signed area.
    let area: f64 = pts
        .iter()
        .zip(pts.iter().cycle().skip(1))
        .take(pts.len())
        .map(|(a, b)| a[0] * b[1] - b[0] * a[1])
        .sum();
    if area < 0.0 {
        pts.reverse();
    }
    pts.push(pts[0]);
    let mut points = Vec::with_capacity(pts.len());
    let mut params = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            let q = pts[i - 1];
            acc += ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        }
        points.push([p[0], p[1], 1.0]);
        params.push(acc);
    }
    Ok(Polyline {
        branch,
        kappa: curve.kappa,
        points,
        params,
        closed: true,
    })
}

/// Tangency points on a traced arc whose tangent line passes through `a`.
#[derive(Clone, Debug)]
pub struct Tangencies {
    pub points: Vec<Vec3>,
    /// Parameters of the tangency points on the trace.
    pub params: Vec<f64>,
    /// A tangency sits within epsilon of an arc endpoint.
    pub endpoint_ambiguous: bool,
}

/// Full projective gradient of the traced family member at an affine point.
fn kappa_gradient3(kappa: f64, x: f64, y: f64) -> [f64; 3] {
    let w = 1.0 - x - y;
    [
        -3.0 * x * x + 3.0 * w * w + 3.0 * kappa * y * (w - x),
        -3.0 * y * y + 3.0 * w * w + 3.0 * kappa * x * (w - y),
        -3.0 * w * w + 3.0 * kappa * x * y,
    ]
}

/// Orientation function whose zeros along the branch are the points whose
/// tangent passes through `a` (which may be a direction with z = 0).
fn tangency_g(kappa: f64, p: [f64; 2], a: [f64; 3]) -> f64 {
    let g = kappa_gradient3(kappa, p[0], p[1]);
    g[0] * a[0] + g[1] * a[1] + g[2] * a[2]
}

/// Find the points of a traced arc whose tangent line contains `a`.
///
/// Zeros of the orientation function are located by sign scanning the trace
/// and bisecting, with the bisection iterate corrected back onto the curve.
pub fn tangents_from_trace(trace: &Polyline, a: &Vec3, eps: f64) -> Result<Tangencies, Error> {
    let af = a.to_f64();
    let curve = AffineCurve { kappa: trace.kappa };
    // The probe must not sit on the arc itself (tangency count is then
    // ill-posed; callers handle that case separately).
    let pts = trace.affine_points();
    if af[2] != 0.0 {
        let ax = af[0] / af[2];
        let ay = af[1] / af[2];
        if curve.eval(ax, ay).abs() <= eps.max(1e-12) * curve.scale(ax, ay) {
            return Err(Error::precondition("probe point lies on the arc's curve"));
        }
    }
    let g_at = |p: [f64; 3]| tangency_g(trace.kappa, [p[0], p[1]], af);
    let mut points = vec![];
    let mut params = vec![];
    let mut endpoint_ambiguous = false;
    let scale_g = |p: [f64; 3]| {
        let g = kappa_gradient3(trace.kappa, p[0], p[1]);
        let gn = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        let an = (af[0] * af[0] + af[1] * af[1] + af[2] * af[2]).sqrt();
        (gn * an).max(1e-12)
    };
    for i in 1..pts.len() {
        let (p0, p1) = (pts[i - 1], pts[i]);
        let (g0, g1) = (g_at(p0), g_at(p1));
        if g0 == 0.0 || g0.signum() == g1.signum() {
            continue;
        }
        // Bisection on the chord, corrected onto the curve.
        let (mut lo, mut hi) = (p0, p1);
        let mut glo = g0;
        for _ in 0..64 {
            let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
            let mid = match curve.correct(mid) {
                Some(m) => m,
                None => break,
            };
            let gm = tangency_g(trace.kappa, mid, af);
            if gm == 0.0 {
                lo = [mid[0], mid[1], 1.0];
                hi = lo;
                break;
            }
            if gm.signum() == glo.signum() {
                lo = [mid[0], mid[1], 1.0];
                glo = gm;
            } else {
                hi = [mid[0], mid[1], 1.0];
            }
        }
        let u = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        let u = curve.correct(u).unwrap_or(u);
        points.push(Vec3::from_f64(u[0], u[1], 1.0));
        params.push(trace.nearest_param([u[0], u[1]]));
    }
    // Near-zero orientation values at the arc ends are ambiguous tangencies.
    for end in [pts.first(), pts.last()].into_iter().flatten() {
        let g = g_at(*end);
        if g.abs() <= eps * scale_g(*end) {
            endpoint_ambiguous = true;
        }
    }
    Ok(Tangencies {
        points,
        params,
        endpoint_ambiguous,
    })
}

/// Trace the branch, then search it for tangencies through `a`.
pub fn tangents_from_point(
    k: &Scalar,
    arc: BranchId,
    a: &Vec3,
    resolution: usize,
    eps: f64,
) -> Result<Tangencies, Error> {
    let trace = trace_branch(k, arc, resolution)?;
    tangents_from_trace(&trace, a, eps)
}

// ---------------------------------------------------------------------------
// Component counting on the sphere.
// ---------------------------------------------------------------------------

/// Unit icosphere triangulation at a given subdivision depth.
pub(crate) fn icosphere(depth: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let normalize = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let mut verts: Vec<[f64; 3]> = raw.iter().map(|v| normalize(*v)).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    use std::collections::HashMap;
    for _ in 0..depth {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let m = normalize([
                    (verts[a][0] + verts[b][0]) / 2.0,
                    (verts[a][1] + verts[b][1]) / 2.0,
                    (verts[a][2] + verts[b][2]) / 2.0,
                ]);
                verts.push(m);
                verts.len() - 1
            })
        };
        for f in &faces {
            let ab = mid(f[0], f[1], &mut verts);
            let bc = mid(f[1], f[2], &mut verts);
            let ca = mid(f[2], f[0], &mut verts);
            new_faces.push([f[0], ab, ca]);
            new_faces.push([f[1], bc, ab]);
            new_faces.push([f[2], ca, bc]);
            new_faces.push([ab, bc, ca]);
        }
        faces = new_faces;
    }
    (verts, faces)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Number of connected components of the real projective zero set of a
/// smooth cubic, by flood fill of the zero-crossing graph on a subdivided
/// sphere with antipodal identification.
pub fn count_real_components(form: &TrilinearForm, depth: usize) -> Result<u8, Error> {
    let (verts, faces) = icosphere(depth);
    let fvals: Vec<f64> = verts
        .iter()
        .map(|v| {
            form.contract(
                &Vec3::from_f64(v[0], v[1], v[2]),
                &Vec3::from_f64(v[0], v[1], v[2]),
                &Vec3::from_f64(v[0], v[1], v[2]),
            )
            .to_f64()
        })
        .collect();
    use std::collections::HashMap;
    let mut node_of_edge: HashMap<(usize, usize), usize> = HashMap::new();
    let mut node_pos: Vec<[f64; 3]> = vec![];
    let sgn = |v: f64| if v >= 0.0 { 1i8 } else { -1i8 };
    let mut crossing = |a: usize, b: usize| -> Option<usize> {
        if sgn(fvals[a]) == sgn(fvals[b]) {
            return None;
        }
        let key = (a.min(b), a.max(b));
        if let Some(&id) = node_of_edge.get(&key) {
            return Some(id);
        }
        let (fa, fb) = (fvals[a].abs(), fvals[b].abs());
        let w = fa / (fa + fb);
        let p = [
            verts[a][0] + w * (verts[b][0] - verts[a][0]),
            verts[a][1] + w * (verts[b][1] - verts[a][1]),
            verts[a][2] + w * (verts[b][2] - verts[a][2]),
        ];
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        node_pos.push([p[0] / n, p[1] / n, p[2] / n]);
        let id = node_pos.len() - 1;
        node_of_edge.insert(key, id);
        Some(id)
    };
    let mut links: Vec<(usize, usize)> = vec![];
    for f in &faces {
        let mut ids = vec![];
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            if let Some(id) = crossing(a, b) {
                ids.push(id);
            }
        }
        for w in ids.windows(2) {
            links.push((w[0], w[1]));
        }
    }
    if node_pos.is_empty() {
        return Err(Error::SingularCurveError(
            "no real zero locus found on the sphere".into(),
        ));
    }
    // Smoothness spot check: gradient must not vanish along the zero set.
    let scale = form_scale(form);
    for p in &node_pos {
        let v = Vec3::from_f64(p[0], p[1], p[2]);
        let g = form.gradient(&v).to_f64();
        let gn = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        if gn <= 1e-5 * scale {
            return Err(Error::SingularCurveError(format!(
                "gradient vanishes near ({}, {}, {})",
                p[0], p[1], p[2]
            )));
        }
    }
    let mut uf = UnionFind::new(node_pos.len());
    for (a, b) in links {
        uf.union(a, b);
    }
    // Antipodal identification: the cubic is odd, so the zero set is
    // antipodally symmetric; pair each circle with the one through the
    // antipode of any of its nodes.
    let mut pair_uf = UnionFind::new(node_pos.len());
    let reps: Vec<usize> = {
        let mut seen = std::collections::HashSet::new();
        let mut reps = vec![];
        for i in 0..node_pos.len() {
            let r = uf.find(i);
            if seen.insert(r) {
                reps.push(i);
            }
        }
        reps
    };
    for &i in &reps {
        let p = node_pos[i];
        let anti = [-p[0], -p[1], -p[2]];
        let mut best = (f64::MAX, i);
        for (j, q) in node_pos.iter().enumerate() {
            let d = (q[0] - anti[0]).powi(2) + (q[1] - anti[1]).powi(2) + (q[2] - anti[2]).powi(2);
            if d < best.0 {
                best = (d, j);
            }
        }
        pair_uf.union(i, best.1);
    }
    for (a, b) in node_of_edge.values().zip(node_of_edge.values()).take(0) {
        pair_uf.union(*a, *b);
    }
    // Merge the pairing with the circle structure.
    let mut final_uf = UnionFind::new(node_pos.len());
    for i in 0..node_pos.len() {
        let r = uf.find(i);
        final_uf.union(i, r);
        let pr = pair_uf.find(i);
        final_uf.union(i, pr);
    }
    let mut roots = std::collections::HashSet::new();
    for i in 0..node_pos.len() {
        roots.insert(final_uf.find(i));
    }
    Ok(roots.len() as u8)
}

/// Component count at the default subdivision depth.
pub fn count_real_components_default(form: &TrilinearForm) -> Result<u8, Error> {
    count_real_components(form, 6)
}

/// Convenience: the component count of a family member, with the degenerate
/// parameter rejected up front.
pub fn count_family_components(k: &Scalar, depth: usize) -> Result<u8, Error> {
    if regime_of(k) == Regime::DegenerateCubic {
        return Err(Error::SingularCurveError("k = 1 cubic is a line triple".into()));
    }
    count_real_components(ParamCubic::new(k.clone()).form(), depth)
}
