//! The Steinian involution on the Hessian curve and the classical tangency
//! data attached to it.
//!
//! For a point U on the Hessian, the polar conic of the cubic with respect
//! to U is a line pair; its singular point is the Steinian image
//! `alpha(U)`, computed here as the null ray of the rank-2 polar matrix
//! `M(U)` via its adjugate. The involution exchanges the tangency points
//! `Q_i` of the cubic's asymptotes with the inflexions `B_i`, and on
//! one-component cubics it exchanges the two Hessian components.

use serde::{Deserialize, Serialize};

use crate::curve::{asymptotes, line_cubic_intersections, Line};
use crate::error::Error;
use crate::forms::{
    hesse_param_dual, regime_of, sym3_eigenvalues, Cubic, ParamCubic, Regime, Vec3,
};
use crate::poly::float_roots_in;
use crate::scalar::{Scalar, SignClass};

/// Distinguished points of the Hessian: asymptote tangencies `Q1, Q2, Q3`,
/// the diagonal 2-torsion points `R` (on the Steinian preimage arc of `C2`)
/// and `R' = alpha(R)` (the diagonal point of `C2`), and for one-component
/// cubics the three diagonal tangency heights `e_1 < e_2 < e_3`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpecialPoints {
    pub q1: Vec3,
    pub q2: Vec3,
    pub q3: Vec3,
    pub r: Vec3,
    pub r_prime: Option<Vec3>,
    pub e: Option<[Scalar; 3]>,
}

/// Steinian image of a point on the Hessian curve: the singular point of the
/// polar conic of the cubic at U, i.e. the null ray of `M(U)`.
///
/// Exact on rational points that lie exactly on the Hessian; float inputs are
/// first refined onto the curve. Fails with [`Error::DegenerateSteinian`]
/// when `M(U)` has rank <= 1.
pub fn steinian(k: &Scalar, u: &Vec3, eps: f64) -> Result<Vec3, Error> {
    let regime = regime_of(k);
    if regime == Regime::DegenerateHessianFermat || regime == Regime::DegenerateHessianLines {
        return Err(Error::DegenerateParameter {
            k: k.to_string(),
            context: "the Hessian is a line triple; the involution is undefined".into(),
        });
    }
    let cubic = ParamCubic::new(k.clone());
    let u = if u.is_exact() {
        let h = cubic.hessian_value(u);
        if !h.is_zero_value() {
            let hf = h.to_f64();
            let scale = hessian_scale(&cubic, u);
            if hf.abs() > eps * scale {
                return Err(Error::precondition(format!(
                    "point {u} is not on the Hessian (H = {hf})"
                )));
            }
            refine_onto_hessian(&cubic, u)?
        } else {
            u.clone()
        }
    } else {
        let hf = cubic.hessian_value(u).to_f64();
        let scale = hessian_scale(&cubic, u);
        if hf.abs() > eps.max(1e-7) * scale {
            return Err(Error::precondition(format!(
                "point {u} is not on the Hessian (H = {hf})"
            )));
        }
        refine_onto_hessian(&cubic, u)?
    };
    let m = cubic.polar_matrix(&u);
    // Rank check: a second near-zero singular value means the null space is
    // not a single ray.
    let rows = m.to_f64_rows();
    let mut eig: Vec<f64> = sym3_eigenvalues(&rows).iter().map(|e| e.abs()).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = rows
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1e-12);
    if eig[1] <= 1e-6 * scale {
        return Err(Error::DegenerateSteinian(format!(
            "polar matrix at {u} has rank <= 1"
        )));
    }
    let cols = m.adjugate_columns();
    let best = cols
        .into_iter()
        .max_by(|a, b| {
            let na: f64 = a.to_f64().iter().map(|c| c * c).sum();
            let nb: f64 = b.to_f64().iter().map(|c| c * c).sum();
            na.partial_cmp(&nb).unwrap()
        })
        .unwrap();
    if best.is_zero() {
        return Err(Error::DegenerateSteinian(format!(
            "adjugate vanishes at {u}"
        )));
    }
    Ok(best.projective_normalize())
}

fn hessian_scale(cubic: &ParamCubic, p: &Vec3) -> f64 {
    let k2 = cubic.k().to_f64().powi(2).max(1.0);
    let r = p.to_f64().iter().map(|c| c.abs()).fold(0.0, f64::max).max(1.0);
    54.0 * k2 * 8.0 * r.powi(3)
}

/// Newton refinement of a point onto the Hessian zero set (float path).
fn refine_onto_hessian(cubic: &ParamCubic, p: &Vec3) -> Result<Vec3, Error> {
    let [x, y, z] = p.to_f64();
    if z.abs() < 1e-12 {
        // Points on the line at infinity: the inflexions are on the Hessian
        // exactly; nothing to refine.
        return Ok(Vec3::from_f64(x, y, 0.0));
    }
    let hform = cubic.hessian_form();
    let mut q = [x / z, y / z];
    for _ in 0..40 {
        let v = Vec3::from_f64(q[0], q[1], 1.0);
        let h = hform.contract(&v, &v, &v).to_f64();
        let scale = hessian_scale(cubic, &v);
        if h.abs() <= 1e-14 * scale {
            break;
        }
        let g = hform.gradient(&v).to_f64();
        let g2 = g[0] * g[0] + g[1] * g[1];
        if g2 < 1e-30 {
            return Err(Error::DegenerateSteinian(
                "vanishing Hessian gradient during refinement".into(),
            ));
        }
        q = [q[0] - h * g[0] / g2, q[1] - h * g[1] / g2];
    }
    Ok(Vec3::from_f64(q[0], q[1], 1.0))
}

/// Second polar line of the cubic with respect to P: the linear form
/// `D -> mu(P, P, D)`. At an inflexion this is the tangent (asymptote); in
/// general it is the tangent to the Hessian at `alpha(P)` when P is on the
/// Hessian.
pub fn second_polar_line<C: Cubic + ?Sized>(cubic: &C, p: &Vec3) -> Result<Line, Error> {
    let form = cubic.form_ref();
    let coeff = |j: usize| -> Scalar {
        let e = [
            Vec3::new((j == 0) as i64, (j == 1) as i64, (j == 2) as i64),
        ];
        form.contract(p, p, &e[0])
    };
    let (l, m, n) = (coeff(0), coeff(1), coeff(2));
    if l.is_zero_value() && m.is_zero_value() && n.is_zero_value() {
        return Err(Error::DegeneratePolar(
            p.x.to_string(),
            p.y.to_string(),
            p.z.to_string(),
        ));
    }
    Ok(Line::new(l, m, n))
}

/// Third intersection of the line through two Hessian points with the
/// Hessian, with a flag marking tangential (multiplicity two) contact.
///
/// Writing the restriction as a cubic in t along `U + tV`, the roots at U
/// and V are known, so the residual root is `t = -mu(U,U,V) / mu(U,V,V)`.
pub fn third_intersection(
    k: &Scalar,
    u: &Vec3,
    v: &Vec3,
    eps: f64,
) -> Result<(Vec3, bool), Error> {
    if u.projective_distance(v) <= eps {
        return Err(Error::precondition("points must be distinct"));
    }
    let cubic = ParamCubic::new(k.clone());
    let hform = cubic.hessian_form();
    let a = hform.contract(u, u, v);
    let b = hform.contract(u, v, v);
    let scale = {
        let uf = u.to_f64().map(f64::abs).into_iter().fold(0.0, f64::max).max(1.0);
        let vf = v.to_f64().map(f64::abs).into_iter().fold(0.0, f64::max).max(1.0);
        let fs = hform
            .mu_values()
            .iter()
            .map(|m| m.to_f64().abs())
            .fold(0.0, f64::max);
        fs * uf * uf * vf.max(uf)
    };
    let a_zero = a.to_f64().abs() <= eps * scale;
    let b_zero = b.to_f64().abs() <= eps * scale;
    if a_zero && b_zero {
        return Err(Error::DegenerateSteinian(
            "line meets the Hessian triply at the given points".into(),
        ));
    }
    if b_zero {
        // Line tangent at V: the residual intersection is V itself.
        return Ok((v.projective_normalize(), true));
    }
    if a_zero {
        // Tangent at U.
        return Ok((u.projective_normalize(), true));
    }
    let t = -(a / b);
    Ok((u.add(&v.scale(&t)).projective_normalize(), false))
}

/// Distinguished Hessian points for the regime of k.
///
/// The `Q_i` come from double roots of the asymptotes restricted to the
/// Hessian (exact for rational k). For one-component cubics the three
/// parameters with the same dual value solve `t^2 + (4/k^2) t + 4/k = 0`
/// besides k itself, giving the diagonal tangency heights `e_i = k_i/(k_i-1)`
/// and the points `R`, `R' = alpha(R)`.
pub fn special_points(k: &Scalar, eps: f64) -> Result<SpecialPoints, Error> {
    let regime = regime_of(k);
    if regime.is_degenerate() {
        return Err(Error::DegenerateParameter {
            k: k.to_string(),
            context: format!("no special-point data in regime {regime}"),
        });
    }
    let cubic = ParamCubic::new(k.clone());
    let hform = cubic.hessian_form();
    let lines = asymptotes(k)?;
    let mut qs = Vec::with_capacity(3);
    for (i, line) in lines.iter().enumerate() {
        let pts = line_cubic_intersections(line, &hform)?;
        let q = pts
            .iter()
            .find(|p| p.multiplicity == 2)
            .ok_or_else(|| {
                Error::DegenerateSteinian(format!(
                    "asymptote {i} is not tangent to the Hessian for k = {k}"
                ))
            })?;
        qs.push(q.point.affine_normalize());
    }
    let q3 = qs.pop().unwrap();
    let q2 = qs.pop().unwrap();
    let q1 = qs.pop().unwrap();

    if regime == Regime::TwoComponents {
        // One-component Hessian: Q3 is the unique diagonal 2-torsion point.
        return Ok(SpecialPoints {
            q1,
            q2,
            r: q3.clone(),
            q3,
            r_prime: None,
            e: None,
        });
    }

    // Companion parameters sharing the dual value: t^2 + (4/k^2) t + 4/k = 0.
    let kf = k.to_f64();
    let roots = float_roots_in(
        &[4.0 / kf, 4.0 / (kf * kf), 1.0],
        -1e4,
        1e4,
        1 << 15,
        1e-13,
    );
    if roots.len() != 2 {
        return Err(Error::DegenerateSteinian(format!(
            "expected two companion parameters for k = {k}, found {roots:?}"
        )));
    }
    let e_of = |t: f64| t / (t - 1.0);
    let own_e = k / (k - Scalar::one());
    let mut es: Vec<Scalar> = vec![
        own_e,
        Scalar::Float(e_of(roots[0])),
        Scalar::Float(e_of(roots[1])),
    ];
    es.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let e: [Scalar; 3] = [es[0].clone(), es[1].clone(), es[2].clone()];
    // R is the diagonal 2-torsion point on the Steinian preimage arc of C2:
    // the upper oval arc (height e3) above the diagonal tangent for
    // -2 < k < 0 and 0 < k < 1 mirrors via the component structure; for
    // k < -2 the preimage arc is the lower oval arc (height e2).
    let (r_height, rp_height) = match regime {
        Regime::OneComponentMid | Regime::OneComponentHigh => (&e[2], &e[0]),
        Regime::OneComponentLow => (&e[1], &e[0]),
        _ => unreachable!(),
    };
    let half = |s: &Scalar| s / Scalar::int(2);
    let r = Vec3::new(half(r_height), half(r_height), Scalar::one());
    let r_prime = Vec3::new(half(rp_height), half(rp_height), Scalar::one());
    // Refine the float diagonal points exactly onto the curve.
    let r = refine_onto_hessian(&cubic, &r)?;
    let r_prime = refine_onto_hessian(&cubic, &r_prime)?;
    let _ = eps;
    Ok(SpecialPoints {
        q1,
        q2,
        q3,
        r,
        r_prime: Some(r_prime),
        e: Some(e),
    })
}

/// Sign of the polar quadratic of A at the inflexion `B1`; positive exactly
/// when tangencies accumulate on the B1 side. Evaluates to
/// `a (1 - k) - 1` on affine probes `(a, b, 1)`.
pub fn g_at_b1(k: &Scalar, a: &Vec3, eps: f64) -> Result<SignClass, Error> {
    let cubic = ParamCubic::new(k.clone());
    crate::forms::eval_polar_quadratic(&cubic, a, &Vec3::new(0, 1, 0)).sign_with(eps)
}

/// Sign of the polar quadratic of A at the inflexion `B2`.
pub fn g_at_b2(k: &Scalar, a: &Vec3, eps: f64) -> Result<SignClass, Error> {
    let cubic = ParamCubic::new(k.clone());
    crate::forms::eval_polar_quadratic(&cubic, a, &Vec3::new(1, 0, 0)).sign_with(eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{tangent_line_at, trace_branch, BranchId, BranchLabel, CurveKind};
    use crate::forms::eval_polar_quadratic;
    use crate::scalar::DEFAULT_EPS;

    #[test]
    fn steinian_of_b1_is_q1_exactly() {
        // alpha(B1) = Q1 = (-1/(k-1), k/(2(k-1)), 1), exact on rationals.
        let k = Scalar::int(5);
        let q1 = steinian(&k, &Vec3::new(0, 1, 0), DEFAULT_EPS).unwrap();
        let expected = Vec3::new(Scalar::ratio(-1, 4), Scalar::ratio(5, 8), Scalar::one());
        assert_eq!(q1.projective_distance(&expected), 0.0);
        assert!(q1.is_exact());
    }

    #[test]
    fn steinian_of_r_is_b3() {
        let k = Scalar::int(5);
        let r = Vec3::new(Scalar::ratio(5, 8), Scalar::ratio(5, 8), Scalar::one());
        let b3 = steinian(&k, &r, DEFAULT_EPS).unwrap();
        assert!(b3.projective_distance(&Vec3::new(1, -1, 0)) < 1e-12);
    }

    #[test]
    fn special_points_match_closed_forms() {
        let sp = special_points(&Scalar::int(5), DEFAULT_EPS).unwrap();
        let q = Scalar::ratio(5, 8);
        assert_eq!(sp.q3, Vec3::new(q.clone(), q, Scalar::one()));
        assert_eq!(sp.q1, Vec3::new(Scalar::ratio(-1, 4), Scalar::ratio(5, 8), Scalar::one()));
        assert_eq!(sp.q2, Vec3::new(Scalar::ratio(5, 8), Scalar::ratio(-1, 4), Scalar::one()));
        assert!(sp.e.is_none() && sp.r_prime.is_none());
        assert_eq!(sp.r, sp.q3);
    }

    #[test]
    fn steinian_images_of_inflexions_are_asymptote_tangencies() {
        for k in [Scalar::int(5), Scalar::ratio(1, 2), Scalar::int(-1), Scalar::int(-3)] {
            let sp = special_points(&k, DEFAULT_EPS).unwrap();
            let b = crate::curve::inflexion_points();
            let qs = [&sp.q1, &sp.q2, &sp.q3];
            for i in 0..3 {
                let img = steinian(&k, &b[i], DEFAULT_EPS).unwrap();
                assert!(
                    img.projective_distance(qs[i]) < 1e-9,
                    "alpha(B{}) = {img} != {} for k = {k:?}",
                    i + 1,
                    qs[i]
                );
            }
        }
    }

    #[test]
    fn companion_parameters_for_k_minus_one() {
        // k = -1: the other two parameters with the same dual value are
        // -2 +- 2 sqrt(2); e2 = k/(k-1) = 1/2.
        let sp = special_points(&Scalar::int(-1), DEFAULT_EPS).unwrap();
        let e = sp.e.unwrap();
        assert_eq!(e[1], Scalar::ratio(1, 2));
        assert!(e[0] < e[1] && e[1] < e[2]);
        let e0 = e[0].to_f64();
        let e2 = e[2].to_f64();
        // From k1 = -2 + 2 sqrt(2) in (0,1) and k3 = -2 - 2 sqrt(2) < -2.
        let k1 = -2.0 + 2.0 * 2.0f64.sqrt();
        let k3 = -2.0 - 2.0 * 2.0f64.sqrt();
        assert!((e0 - k1 / (k1 - 1.0)).abs() < 1e-9);
        assert!((e2 - k3 / (k3 - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn second_polar_lines_at_special_points() {
        let k = Scalar::int(5);
        let c = ParamCubic::new(k.clone());
        // At B3 the second polar is the asymptote x + y = (5/4) z.
        let l3 = second_polar_line(&c, &Vec3::new(1, -1, 0)).unwrap();
        assert!(l3.projectively_equal(&Line::new(4, 4, -5), 1e-12));
        // At B1: x = -(1/4) z.
        let l1 = second_polar_line(&c, &Vec3::new(0, 1, 0)).unwrap();
        assert!(l1.projectively_equal(&Line::new(4, 0, 1), 1e-12));
        assert!(second_polar_line(&c, &Vec3::new(0, 0, 0)).is_err());
        // The second polar at R is the tangent to the Hessian at B3 = alpha(R).
        let r = Vec3::new(Scalar::ratio(5, 8), Scalar::ratio(5, 8), Scalar::one());
        let lr = second_polar_line(&c, &r).unwrap();
        let h = c.hessian_form();
        let tangent = tangent_line_at(&h, &Vec3::new(1, -1, 0), DEFAULT_EPS).unwrap();
        assert!(lr.projectively_equal(&tangent, 1e-9));
    }

    #[test]
    fn involution_on_traced_points() {
        for k in [Scalar::int(5), Scalar::ratio(1, 2), Scalar::int(-1), Scalar::int(-3)] {
            let trace = trace_branch(&k, BranchId::c2(), 400).unwrap();
            let pts = trace.affine_points();
            let step = (pts.len() / 40).max(1);
            for p in pts.iter().step_by(step) {
                let u = Vec3::from_f64(p[0], p[1], 1.0);
                let a = steinian(&k, &u, 1e-6).unwrap();
                let back = steinian(&k, &a, 1e-6).unwrap();
                assert!(
                    back.projective_distance(&u) < 1e-8,
                    "involution failed at {u} for k = {k:?}"
                );
                // U . alpha(U)^2 = 0: the image is singular for the polar at U.
                let g = eval_polar_quadratic(&ParamCubic::new(k.clone()), &u, &a).to_f64();
                assert!(g.abs() < 1e-6, "G_U(alpha U) = {g}");
            }
        }
    }

    #[test]
    fn involution_swaps_components_for_negative_k() {
        // For -2 < k < 0 and k < -2 the involution exchanges the unbounded
        // branch C2 with the bounded Hessian oval.
        for k in [Scalar::int(-1), Scalar::int(-3)] {
            let c2 = trace_branch(&k, BranchId::c2(), 300).unwrap();
            let oval = trace_branch(&k, BranchId::new(CurveKind::Hessian, BranchLabel::Oval), 300).unwrap();
            let p = c2.affine_points()[c2.affine_points().len() / 2];
            let img = steinian(&k, &Vec3::from_f64(p[0], p[1], 1.0), 1e-6).unwrap();
            let [ix, iy, iz] = img.to_f64();
            let q = [ix / iz, iy / iz];
            let t = oval.nearest_param(q);
            let nearest = oval.point_at(t);
            assert!(
                ((nearest[0] - q[0]).powi(2) + (nearest[1] - q[1]).powi(2)).sqrt() < 1e-4,
                "alpha(C2 point) not on the oval for k = {k:?}: {q:?}"
            );
        }
        // For k > 1 the Hessian has one component; images stay on it.
        let k = Scalar::int(5);
        let c2 = trace_branch(&k, BranchId::c2(), 300).unwrap();
        let p = c2.affine_points()[10];
        let img = steinian(&k, &Vec3::from_f64(p[0], p[1], 1.0), 1e-6).unwrap();
        let hform = ParamCubic::new(k.clone()).hessian_form();
        let hv = hform
            .contract(&img, &img, &img)
            .to_f64();
        let scale: f64 = img.to_f64().iter().map(|c| c.abs()).fold(1.0, f64::max);
        assert!(hv.abs() <= 1e-5 * 54.0 * 25.0 * scale.powi(3) * 8.0);
    }

    #[test]
    fn third_intersection_of_inflexions() {
        // B1, B2 lie on z = 0, which meets the Hessian again at B3.
        let k = Scalar::int(5);
        let (p, tangent) =
            third_intersection(&k, &Vec3::new(0, 1, 0), &Vec3::new(1, 0, 0), DEFAULT_EPS).unwrap();
        assert!(!tangent);
        assert!(p.projective_distance(&Vec3::new(1, -1, 0)) < 1e-12);
    }

    #[test]
    fn tangent_intersection_fact_on_traces() {
        // Tangents to the Hessian at U and alpha(U) meet at alpha(U'') where
        // U'' is the third intersection of the line U alpha(U).
        let k = Scalar::int(5);
        let hform = ParamCubic::new(k.clone()).hessian_form();
        let trace = trace_branch(&k, BranchId::c2(), 600).unwrap();
        let pts = trace.affine_points();
        let step = (pts.len() / 25).max(1);
        let mut checked = 0;
        for p in pts.iter().step_by(step) {
            let u = Vec3::from_f64(p[0], p[1], 1.0);
            let u_img = steinian(&k, &u, 1e-6).unwrap();
            let (u2, tangent) = third_intersection(&k, &u, &u_img, 1e-9).unwrap();
            if tangent {
                continue;
            }
            let meet_expected = steinian(&k, &u2, 1e-6).unwrap();
            let t_u = tangent_line_at(&hform, &u, 1e-6).unwrap();
            let t_ui = tangent_line_at(&hform, &u_img, 1e-6).unwrap();
            // Intersection of the two tangent lines.
            let a = t_u.coeffs.map(|c| c.to_f64());
            let b = t_ui.coeffs.map(|c| c.to_f64());
            let meet = Vec3::from_f64(
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            );
            assert!(
                meet.projective_distance(&meet_expected) < 1e-7,
                "tangent meet mismatch at {u}"
            );
            checked += 1;
        }
        assert!(checked >= 20);
    }

    #[test]
    fn off_hessian_point_rejected() {
        let err = steinian(&Scalar::int(5), &Vec3::new(0, 0, 1), DEFAULT_EPS);
        assert!(err.is_err());
    }
}
