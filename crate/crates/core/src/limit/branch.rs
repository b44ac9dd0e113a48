//! Branch-wise inverses of the velocity map and the classification of a
//! wavenumber into its branch.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::model::Model;
use crate::spectral::{Band, Wavenumber};

use super::geometry::{forward_map, jacobian_terms, support_contains};
use super::{Branch, JacobianSign, Shape, SupportRegion, UPoint, VelocityPoint};

/// Forward consistency tolerance for an inverse to count as a preimage.
const PREIMAGE_TOL: f64 = 1e-9;
/// Preimages of the same band closer than this on the torus are merged.
const DEDUP_DIST: f64 = 1e-7;
/// Allowed spill of `|c_i|` above 1 before clamping.
const CLAMP_TOL: f64 = 1e-12;

/// Lower-left corners of `L₁ … L₈`, in units of π.
const L_CORNERS: [(f64, f64); 8] = [
    (0.0, 0.0),
    (-1.0, 0.0),
    (-1.0, -1.0),
    (0.0, -1.0),
    (-2.0, 0.0),
    (-1.0, -2.0),
    (1.0, -1.0),
    (0.0, 1.0),
];

/// A velocity preimage together with its branch and Jacobian sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preimage {
    pub branch: Branch,
    pub k: Wavenumber,
    pub sign: JacobianSign,
}

/// Which root `±` of the `κ`/`γ` quadratic recovers `c₂/c₁` (ribbon) or
/// `c₁/c₂` (twist) on a branch with the given shape and `m`.
pub fn ratio_root(shape: Shape, m: u8) -> JacobianSign {
    match (shape, m % 2 == 0) {
        (Shape::Ribbon, false) | (Shape::Twist, true) => JacobianSign::Minus,
        (Shape::Ribbon, true) | (Shape::Twist, false) => JacobianSign::Plus,
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn shape_of(model: &Model, u: UPoint) -> Shape {
    if model.a() * u.u2.abs() >= model.b() * u.u1.abs() {
        Shape::Ribbon
    } else {
        Shape::Twist
    }
}

/// Target velocity of a branch: `v` for band 1, `−v` for band 2.
fn band_target(v: VelocityPoint, band: Band) -> VelocityPoint {
    match band {
        Band::One => v,
        Band::Two => v.neg(),
    }
}

fn abs_cos(c_sq: f64, which: usize, branch: &Branch) -> Result<f64> {
    if c_sq > (1.0 + CLAMP_TOL) * (1.0 + CLAMP_TOL) {
        return Err(Error::Numeric(format!(
            "|c{which}|² = {c_sq} exceeds 1 on branch {branch}"
        )));
    }
    if c_sq < -CLAMP_TOL {
        return Err(Error::NoPreimage(branch.to_string()));
    }
    Ok(c_sq.clamp(0.0, 1.0).sqrt())
}

/// The wavenumber on `branch` whose band velocity is `v`.
///
/// The result is only guaranteed to be a true preimage when the branch
/// actually covers `v`; [`preimages`] filters by forward consistency.
pub fn inverse_map(model: &Model, v: VelocityPoint, branch: Branch) -> Result<Wavenumber> {
    let w = band_target(v, branch.band);
    if support_contains(model, w) != SupportRegion::Inside {
        return Err(Error::OutsideSupport { v1: v.v1, v2: v.v2 });
    }
    let d = model.derived();
    let (a, b) = (d.a, d.b);
    let u = UPoint::from_velocity(w);
    let (x, y) = (u.u1 * u.u1, u.u2 * u.u2);
    let gap = jacobian_terms(model, w).one_minus_tau_sq(branch.jacobian_sign());

    let abs_c1 = abs_cos(1.0 - gap * x / (2.0 * a * a), 1, &branch)?;
    let abs_c2 = abs_cos(1.0 - gap * y / (2.0 * b * b), 2, &branch)?;

    let sgn_kappa_plus = -sgn(-2.0 * b * b + b * b * x + (1.0 - a * a) * y);
    let sgn_gamma_plus = sgn(2.0 * a * a - (1.0 - b * b) * x - a * a * y);
    let (s1, s2) = match (branch.m, branch.shape) {
        (1, _) => (-1.0, 1.0),
        (3, _) => (1.0, -1.0),
        (2, Shape::Ribbon) => (-1.0, -sgn_kappa_plus),
        (2, Shape::Twist) => (-sgn_gamma_plus, -1.0),
        (4, Shape::Ribbon) => (1.0, sgn_kappa_plus),
        (4, Shape::Twist) => (sgn_gamma_plus, 1.0),
        _ => unreachable!("m is validated by Branch::new"),
    };
    let ac1 = (s1 * abs_c1).clamp(-1.0, 1.0).acos();
    let ac2 = (s2 * abs_c2).clamp(-1.0, 1.0).acos();
    let (l1, l2) = match branch.n {
        1 => (ac1, ac2),
        2 => (-ac1, ac2),
        3 => (-ac1, -ac2),
        4 => (ac1, -ac2),
        5 => (ac1 - TAU, ac2),
        6 => (-ac1, ac2 - TAU),
        7 => (TAU - ac1, -ac2),
        8 => (ac1, TAU - ac2),
        _ => unreachable!("n is validated by Branch::new"),
    };
    Ok(Wavenumber::new(
        0.5 * (l1 - l2) - d.phi_1,
        0.5 * (l1 + l2) - d.phi_2,
    ))
}

/// `(l₁, l₂)` before any reduction, so that the lattice class of the point
/// is preserved.
fn raw_l(model: &Model, k: Wavenumber) -> (f64, f64) {
    let p = model.params();
    (
        k.k2 + k.k1 + p.alpha[1] + p.alpha[0],
        k.k2 - k.k1 + p.beta[1] - p.beta[0],
    )
}

/// Index of the closed square `L_n` containing `l` modulo
/// `2π{(i, j) : i + j even}`; the lowest index wins ties.
fn l_square(l1: f64, l2: f64) -> u8 {
    let mut best = (f64::INFINITY, 1u8);
    for (idx, &(i, j)) in L_CORNERS.iter().enumerate() {
        let (d1, d2) = (l1 - i * PI, l2 - j * PI);
        let (g1, g2) = ((d1 / TAU).floor(), (d2 / TAU).floor());
        let (x1, x2) = (d1 - TAU * g1, d2 - TAU * g2);
        if (g1 + g2).rem_euclid(2.0) != 0.0 {
            continue;
        }
        let excess = (x1 - PI).max(x2 - PI).max(0.0);
        if excess == 0.0 {
            return idx as u8 + 1;
        }
        if excess < best.0 {
            best = (excess, idx as u8 + 1);
        }
    }
    best.1
}

fn c_region(j_plus: f64, c1: f64, c2: f64) -> u8 {
    let left = c1 <= j_plus * c2;
    let right = c1 >= j_plus * c2;
    let above = c2 >= j_plus * c1;
    let below = c2 <= j_plus * c1;
    if left && above {
        1
    } else if left && below {
        2
    } else if right && below {
        3
    } else {
        debug_assert!(right && above);
        4
    }
}

/// The branch `(n, m, s)` whose region contains `k`, reported with band 1.
pub fn classify_branch(model: &Model, k: Wavenumber) -> Branch {
    let (l1, l2) = raw_l(model, k);
    let n = l_square(l1, l2);
    let (c1, c2) = (l1.cos(), l2.cos());
    let m = c_region(model.derived().j_plus, c1, c2);
    let shape = if c2.abs() <= c1.abs() {
        Shape::Ribbon
    } else {
        Shape::Twist
    };
    Branch::new(n, m, shape, Band::One)
}

/// Every preimage of `v` over all branches and both bands.
///
/// For interior `v` of a nondegenerate model this yields sixteen
/// preimages, eight for each Jacobian sign; a degenerate model has only
/// the eight even-`m` ones.
pub fn preimages(model: &Model, v: VelocityPoint) -> Result<Vec<Preimage>> {
    if support_contains(model, v) != SupportRegion::Inside {
        return Err(Error::OutsideSupport { v1: v.v1, v2: v.v2 });
    }
    let shapes = Band::ALL.map(|p| shape_of(model, UPoint::from_velocity(band_target(v, p))));
    let mut out: Vec<Preimage> = Vec::with_capacity(16);
    for branch in Branch::all() {
        if branch.m % 2 == 0 && branch.shape != shapes[branch.band.index()] {
            continue;
        }
        if branch.m % 2 == 1 && model.is_degenerate() {
            continue;
        }
        let Ok(k) = inverse_map(model, v, branch) else {
            continue;
        };
        let Ok(image) = forward_map(model, k) else {
            continue;
        };
        if image.max_abs_diff(&band_target(v, branch.band)) > PREIMAGE_TOL {
            continue;
        }
        let duplicate = out
            .iter()
            .any(|q| q.branch.band == branch.band && q.k.distance(&k) < DEDUP_DIST);
        if !duplicate {
            out.push(Preimage {
                branch,
                k,
                sign: branch.jacobian_sign(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::geometry::kappa_gamma;
    use crate::model::CoinParameters;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn origin_on_first_branch() {
        let m = Model::reference();
        let o = VelocityPoint::new(0.0, 0.0);
        let k = inverse_map(&m, o, Branch::new(1, 1, Shape::Ribbon, Band::One)).unwrap();
        assert!(k.distance(&Wavenumber::new(FRAC_PI_2, FRAC_PI_2)) < 1e-12);
        let k2 = inverse_map(&m, o, Branch::new(1, 2, Shape::Ribbon, Band::One)).unwrap();
        let t = crate::spectral::tau_of(&m, k2);
        assert!(t.tau.abs() < 1e-12);
        assert!(forward_map(&m, k2).unwrap().max_abs_diff(&o) < 1e-12);
    }

    #[test]
    fn classification_examples() {
        let m = Model::reference();
        let b = classify_branch(&m, Wavenumber::new(FRAC_PI_2, FRAC_PI_2));
        assert_eq!(b.n, 1);
        // c = (−1, 1) with j₊ = −1/9: only C₁'s inequalities hold.
        assert_eq!(b.m, 1);
        let b = classify_branch(&m, Wavenumber::new(FRAC_PI_4, FRAC_PI_4));
        assert_eq!(b.shape, Shape::Twist);
    }

    #[test]
    fn l_squares_tile() {
        // Centres of the eight squares.
        for (idx, &(i, j)) in L_CORNERS.iter().enumerate() {
            let (l1, l2) = ((i + 0.5) * PI, (j + 0.5) * PI);
            assert_eq!(l_square(l1, l2), idx as u8 + 1);
            assert_eq!(l_square(l1 + TAU, l2 + TAU), idx as u8 + 1);
            assert_eq!(l_square(l1 + 2.0 * TAU, l2), idx as u8 + 1);
        }
    }

    #[test]
    fn ratio_recovered_by_kappa_gamma() {
        let m = Model::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let k = Wavenumber::new(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
            let br = classify_branch(&m, k);
            let (l1, l2) = raw_l(&m, k);
            let (c1, c2) = (l1.cos(), l2.cos());
            let u = UPoint::from_velocity(forward_map(&m, k).unwrap());
            let shape = if c2.abs() <= c1.abs() { Shape::Ribbon } else { Shape::Twist };
            let (s, r) = kappa_gamma(&m, u, ratio_root(shape, br.m)).unwrap();
            assert_eq!(s, shape);
            let want = if shape == Shape::Ribbon { c2 / c1 } else { c1 / c2 };
            assert!((r - want).abs() < 1e-9, "k = {k:?}: {r} vs {want}");
        }
    }

    #[test]
    fn sixteen_preimages_with_phases() {
        let m = Model::new(
            CoinParameters::from_squared_moduli(0.3, 0.55)
                .with_phases([0.3, -0.7], [1.1, 0.4], [0.2, 0.5]),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let k = Wavenumber::new(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
            let v = forward_map(&m, k).unwrap();
            if support_contains(&m, v) != SupportRegion::Inside {
                continue;
            }
            let pre = preimages(&m, v).unwrap();
            assert_eq!(pre.len(), 16, "v = {v:?}");
            let plus = pre.iter().filter(|p| p.sign == JacobianSign::Plus).count();
            assert_eq!(plus, 8);
            assert!(pre.iter().any(|p| p.branch.band == Band::One && p.k.distance(&k) < 1e-8));
        }
    }

    #[test]
    fn degenerate_has_eight_preimages() {
        let m = Model::from_squared_moduli(0.5, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut seen = 0;
        while seen < 100 {
            let v = VelocityPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let Ok(pre) = preimages(&m, v) else { continue };
            seen += 1;
            assert_eq!(pre.len(), 8, "v = {v:?}");
            assert!(pre.iter().all(|p| p.sign == JacobianSign::Plus));
        }
    }
}
