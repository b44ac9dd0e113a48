//! Forward velocity map, support, Jacobians and the conic families.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::spectral::{group_velocity, tau_of, Band, Wavenumber, DEGENERATE_GAP};

use super::{JacobianSign, JacobianTerms, Shape, SupportRegion, UPoint, VelocityPoint};

/// Half-width of the band around the support boundary classed as boundary.
pub const SUPPORT_TOL: f64 = 1e-9;

/// Smallest `E_R·E_T` at which the inverse Jacobian is evaluated.
const MIN_ELLIPSE_PRODUCT: f64 = 1e-14;

/// `k ↦ v` for band 1; identical to `group_velocity(model, Band::One, k)`.
pub fn forward_map(model: &Model, k: Wavenumber) -> Result<VelocityPoint> {
    group_velocity(model, Band::One, k)
}

/// `max` over the bounding ellipses of `(ellipse form at v) − 1`.
/// Negative inside the support, positive outside.
pub fn support_excess(model: &Model, v: VelocityPoint) -> f64 {
    let d = model.derived();
    let u = UPoint::from_velocity(v);
    let (x, y) = (u.u1 * u.u1, u.u2 * u.u2);
    if d.degenerate {
        // (v₁+v₂)²/(4a) + (v₁−v₂)²/(4b) with u² = (v₁±v₂)²/2.
        return x / (2.0 * d.a) + y / (2.0 * d.b) - 1.0;
    }
    let q_r = x / d.axis_r1 + y / d.axis_r2;
    let q_t = x / d.axis_t1 + y / d.axis_t2;
    q_r.max(q_t) - 1.0
}

pub fn support_contains(model: &Model, v: VelocityPoint) -> SupportRegion {
    let e = support_excess(model, v);
    if e <= -SUPPORT_TOL {
        SupportRegion::Inside
    } else if e <= SUPPORT_TOL {
        SupportRegion::Boundary
    } else {
        SupportRegion::Outside
    }
}

pub fn jacobian_terms(model: &Model, v: VelocityPoint) -> JacobianTerms {
    let d = model.derived();
    let (a, b) = (d.a, d.b);
    let (v1, v2) = (v.v1, v.v2);
    let u = UPoint::from_velocity(v);
    let (x, y) = (u.u1 * u.u1, u.u2 * u.u2);
    let e_r = 1.0 - x / d.axis_r1 - y / d.axis_r2;
    let e_t = 1.0 - x / d.axis_t1 - y / d.axis_t2;
    JacobianTerms {
        a_term: (1.0 - v1 * v1) * (1.0 - v2 * v2),
        b_term: -(v1 * v1 + v2 * v2) / 2.0 + (a * a - b * b) * v1 * v2 + 1.0 - (a * a + b * b),
        c_term: d.d_j,
        e_r,
        e_t,
        d_quarter: 4.0 * a * a * b * b * e_r * e_t,
    }
}

/// `|J|±⁻¹(v)`. Degenerate models have the single branch
/// `1 / ((1 − v₁²)(1 − v₂²))`, returned for either sign.
pub fn jacobian_inverse(model: &Model, v: VelocityPoint, sign: JacobianSign) -> Result<f64> {
    let t = jacobian_terms(model, v);
    let inside = support_contains(model, v) == SupportRegion::Inside;
    if !inside || t.e_r * t.e_t < MIN_ELLIPSE_PRODUCT {
        return Err(Error::OutsideSupport { v1: v.v1, v2: v.v2 });
    }
    if model.is_degenerate() {
        return Ok(1.0 / t.a_term);
    }
    let ab = model.a() * model.b();
    let root = (t.e_r * t.e_t).sqrt();
    Ok((t.b_term + sign.value() * 2.0 * ab * root) / (4.0 * ab * t.a_term * root))
}

/// `|det ∂v/∂k|` in closed form.
pub fn jacobian_forward(model: &Model, k: Wavenumber) -> Result<f64> {
    let t = tau_of(model, k);
    let gap = t.one_minus_tau_sq();
    if gap <= DEGENERATE_GAP {
        return Err(Error::Degenerate { k1: k.k1, k2: k.k2 });
    }
    let (a, b) = (model.a(), model.b());
    let ab = a * b;
    let quad = ab * t.c2 * t.c2 + (1.0 - a * a - b * b) * t.c1 * t.c2 + ab * t.c1 * t.c1;
    Ok(4.0 * ab * quad.abs() / (gap * gap))
}

/// Left minus right side of the conic traced by `c₂ = κc₁` (ribbon) or
/// `c₁ = γc₂` (twist) in the `u`-plane.
pub fn conic_residual(model: &Model, ratio: f64, u: UPoint, shape: Shape) -> f64 {
    let (a, b) = (model.a(), model.b());
    let (x, y) = (u.u1 * u.u1, u.u2 * u.u2);
    let r2 = ratio * ratio;
    match shape {
        Shape::Ribbon => {
            let g = (a - b * ratio).powi(2);
            -b * b * (r2 - g) * x + a * a * (1.0 - g) * y - 2.0 * a * a * b * b * (1.0 - r2)
        }
        Shape::Twist => {
            let g = (a * ratio - b).powi(2);
            -b * b * (1.0 - g) * x + a * a * (r2 - g) * y + 2.0 * a * a * b * b * (1.0 - r2)
        }
    }
}

fn sqrt_d_quarter(model: &Model, u: UPoint) -> f64 {
    jacobian_terms(model, u.to_velocity()).d_quarter.max(0.0).sqrt()
}

fn in_ribbon_image(model: &Model, u: UPoint) -> bool {
    model.a() * u.u2.abs() >= model.b() * u.u1.abs()
}

fn in_twist_image(model: &Model, u: UPoint) -> bool {
    model.a() * u.u2.abs() <= model.b() * u.u1.abs()
}

/// `κ±(u)`, the slope of the ribbon line through the preimage of `u`.
pub fn kappa(model: &Model, u: UPoint, sign: JacobianSign) -> Result<f64> {
    if !in_ribbon_image(model, u) {
        return Err(Error::ParameterDomain(format!(
            "κ is defined for a|u₂| ≥ b|u₁|, got u = ({}, {})",
            u.u1, u.u2
        )));
    }
    let (a, b) = (model.a(), model.b());
    let (x, y) = (u.u1 * u.u1, u.u2 * u.u2);
    let den = 2.0 * a * a - (1.0 - b * b) * x - a * a * y;
    if den == 0.0 {
        return Err(Error::Numeric("κ denominator vanishes".into()));
    }
    let num = b * b * x - a * a * y + sign.value() * sqrt_d_quarter(model, u);
    Ok(a / b * num / den)
}

/// `γ±(u)`, the inverse slope of the twist line through the preimage of `u`.
pub fn gamma(model: &Model, u: UPoint, sign: JacobianSign) -> Result<f64> {
    if !in_twist_image(model, u) {
        return Err(Error::ParameterDomain(format!(
            "γ is defined for a|u₂| ≤ b|u₁|, got u = ({}, {})",
            u.u1, u.u2
        )));
    }
    let (a, b) = (model.a(), model.b());
    let (x, y) = (u.u1 * u.u1, u.u2 * u.u2);
    let den = -2.0 * b * b + b * b * x + (1.0 - a * a) * y;
    if den == 0.0 {
        return Err(Error::Numeric("γ denominator vanishes".into()));
    }
    let num = b * b * x - a * a * y + sign.value() * sqrt_d_quarter(model, u);
    Ok(b / a * num / den)
}

/// `κ±` where `u` lies in the ribbon image, `γ±` otherwise.
pub fn kappa_gamma(model: &Model, u: UPoint, sign: JacobianSign) -> Result<(Shape, f64)> {
    if in_ribbon_image(model, u) {
        Ok((Shape::Ribbon, kappa(model, u, sign)?))
    } else {
        Ok((Shape::Twist, gamma(model, u, sign)?))
    }
}

/// The one-dimensional limit density `√(1−r²) / (π(1−v²)√(r²−v²))` on `(−r, r)`.
pub fn konno_density(v: f64, r: f64) -> f64 {
    if v.abs() >= r {
        return 0.0;
    }
    (1.0 - r * r).sqrt() / (PI * (1.0 - v * v) * (r * r - v * v).sqrt())
}

/// Membership in `(v₁+v₂)²/(4a) + (v₁−v₂)²/(4(1−a)) < 1`.
pub fn reference_ellipse_grover(a_param: f64, v: VelocityPoint) -> bool {
    let s = v.v1 + v.v2;
    let d = v.v1 - v.v2;
    s * s / (4.0 * a_param) + d * d / (4.0 * (1.0 - a_param)) < 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn forward_examples() {
        let m = Model::reference();
        let v = forward_map(&m, Wavenumber::new(FRAC_PI_4, FRAC_PI_4)).unwrap();
        assert!((v.v1 + 0.31449).abs() < 1e-5 && (v.v2 + 0.31449).abs() < 1e-5);
        let z = forward_map(&m, Wavenumber::new(FRAC_PI_2, FRAC_PI_2)).unwrap();
        assert!(z.v1.abs() < 1e-15 && z.v2.abs() < 1e-15);
    }

    #[test]
    fn support_examples() {
        let m = Model::reference();
        let at = |x, y| support_contains(&m, VelocityPoint::new(x, y));
        assert_eq!(at(0.0, 0.0), SupportRegion::Inside);
        assert_eq!(at(0.5, 0.5), SupportRegion::Outside);
        assert_eq!(at(0.2, -0.2), SupportRegion::Inside);
        // (v₁ + v₂)²/(2·0.2) = 1 on the diagonal at v₁ = v₂ = √0.1.
        let edge = 0.1f64.sqrt();
        assert_eq!(at(edge, edge), SupportRegion::Boundary);
    }

    #[test]
    fn terms_at_origin() {
        let m = Model::reference();
        let t = jacobian_terms(&m, VelocityPoint::new(0.0, 0.0));
        assert!((t.b_term - 0.82).abs() < 1e-15);
        assert_eq!((t.e_r, t.e_t, t.a_term), (1.0, 1.0, 1.0));
        assert!((t.d_quarter - 0.0324).abs() < 1e-15);
        assert!((t.c_term - 0.64).abs() < 1e-12);
        assert!((t.one_minus_tau_sq(JacobianSign::Plus) - 1.0).abs() < 1e-15);
        assert!((t.one_minus_tau_sq(JacobianSign::Minus) - 0.64).abs() < 1e-15);
    }

    #[test]
    fn inverse_jacobian_at_origin() {
        let m = Model::reference();
        let o = VelocityPoint::new(0.0, 0.0);
        let plus = jacobian_inverse(&m, o, JacobianSign::Plus).unwrap();
        let minus = jacobian_inverse(&m, o, JacobianSign::Minus).unwrap();
        assert!((plus - 1.0 / 0.36).abs() < 1e-12);
        assert!((minus - 0.64 / 0.36).abs() < 1e-12);
        assert!(jacobian_inverse(&m, VelocityPoint::new(0.5, 0.5), JacobianSign::Plus).is_err());
    }

    #[test]
    fn degenerate_inverse_jacobian() {
        let m = Model::from_squared_moduli(0.5, 0.5).unwrap();
        assert!(m.is_degenerate());
        let o = VelocityPoint::new(0.0, 0.0);
        assert_eq!(jacobian_inverse(&m, o, JacobianSign::Plus).unwrap(), 1.0);
        let v = VelocityPoint::new(0.3, -0.1);
        let want = 1.0 / ((1.0 - 0.09) * (1.0 - 0.01));
        assert_eq!(jacobian_inverse(&m, v, JacobianSign::Minus).unwrap(), want);
    }

    #[test]
    fn forward_jacobian_example() {
        let m = Model::reference();
        let j = jacobian_forward(&m, Wavenumber::new(FRAC_PI_2, FRAC_PI_2)).unwrap();
        assert!((j - 0.5625).abs() < 1e-12);
    }

    #[test]
    fn kappa_gamma_at_origin() {
        let m = Model::reference();
        let o = UPoint::new(0.0, 0.0);
        assert!((kappa(&m, o, JacobianSign::Plus).unwrap() - 1.0).abs() < 1e-15);
        assert!((kappa(&m, o, JacobianSign::Minus).unwrap() + 1.0).abs() < 1e-15);
        assert!((gamma(&m, o, JacobianSign::Plus).unwrap() + 1.0).abs() < 1e-15);
        assert!((gamma(&m, o, JacobianSign::Minus).unwrap() - 1.0).abs() < 1e-15);
        assert!(kappa(&m, UPoint::new(0.5, 0.0), JacobianSign::Plus).is_err());
        assert!(gamma(&m, UPoint::new(0.0, 0.5), JacobianSign::Plus).is_err());
    }

    #[test]
    fn conic_lines_at_unit_slope() {
        let m = Model::from_squared_moduli(0.3, 0.55).unwrap();
        let (a, b) = (m.a(), m.b());
        for &k in &[1.0, -1.0] {
            for &u1 in &[-0.4, 0.1, 0.7] {
                for &sgn in &[1.0, -1.0] {
                    let u = UPoint::new(u1, sgn * b / a * u1);
                    assert!(conic_residual(&m, k, u, Shape::Ribbon).abs() < 1e-14);
                }
            }
        }
        // Vertex of the extremal ribbon ellipse on the u₂ axis.
        let u = UPoint::new(0.0, m.derived().axis_r2.sqrt());
        assert!(conic_residual(&m, m.derived().j_plus, u, Shape::Ribbon).abs() < 1e-14);
    }

    #[test]
    fn konno_examples() {
        assert!((konno_density(0.0, FRAC_1_SQRT_2) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(konno_density(0.8, FRAC_1_SQRT_2), 0.0);
        assert_eq!(konno_density(-FRAC_1_SQRT_2, FRAC_1_SQRT_2), 0.0);
    }

    #[test]
    fn grover_examples() {
        assert!(reference_ellipse_grover(0.5, VelocityPoint::new(0.0, 0.0)));
        assert!(!reference_ellipse_grover(0.5, VelocityPoint::new(1.0, 1.0)));
    }
}
