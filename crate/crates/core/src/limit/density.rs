//! The limit density `f(v)` by preimage enumeration, and the tabulated
//! `w±` weights kept as an independent cross-check.

use crate::error::Result;
use crate::model::Model;
use crate::spectral::{eigensystem, Band, InitialSpectrum};

use super::branch::{inverse_map, preimages};
use super::geometry::jacobian_inverse;
use super::{Branch, JacobianSign, Shape, UPoint, VelocityPoint};

fn band_weight(
    model: &Model,
    spectrum: &InitialSpectrum,
    k: crate::spectral::Wavenumber,
    band: Band,
) -> Result<f64> {
    let eig = eigensystem(model, k)?;
    Ok(eig.band_weights(&spectrum.evaluate(k))[band.index()])
}

/// `f(v) = Σ_branches P_p(k_branch(v)) |J|_{±}⁻¹(v)`.
///
/// The probability density of the limit law is `f(v) / (2π)²`. Fails for
/// `v` on or outside the support boundary.
pub fn density(model: &Model, spectrum: &InitialSpectrum, v: VelocityPoint) -> Result<f64> {
    let plus = jacobian_inverse(model, v, JacobianSign::Plus)?;
    let minus = jacobian_inverse(model, v, JacobianSign::Minus)?;
    let mut f = 0.0;
    for pre in preimages(model, v)? {
        let jac = match pre.sign {
            JacobianSign::Plus => plus,
            JacobianSign::Minus => minus,
        };
        f += band_weight(model, spectrum, pre.k, pre.branch.band)? * jac;
    }
    Ok(f)
}

/// `w₊(v)`, `w₋(v)` assembled from the fixed `(n, p)` tables per sector
/// `S₁ … S₄` of the velocity plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabulatedWeights {
    /// Sector index 1..=4.
    pub sector: u8,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Table entries whose branch had no inverse at `v`.
    pub missing: usize,
}

impl TabulatedWeights {
    /// `|J|₊⁻¹ w₊ + |J|₋⁻¹ w₋`.
    pub fn density(&self, model: &Model, v: VelocityPoint) -> Result<f64> {
        Ok(jacobian_inverse(model, v, JacobianSign::Plus)? * self.w_plus
            + jacobian_inverse(model, v, JacobianSign::Minus)? * self.w_minus)
    }
}

fn sector(v: VelocityPoint) -> u8 {
    let (x, y) = (v.v1, v.v2);
    if x.abs() <= y.abs() && x >= 0.0 {
        1
    } else if x.abs() >= y.abs() && y >= 0.0 {
        2
    } else if x.abs() <= y.abs() {
        3
    } else {
        4
    }
}

/// The tabulated weights at `v`. For each sector, band 1 and band 2 draw
/// on a fixed pair of `L`-squares.
pub fn tabulated_weights(
    model: &Model,
    spectrum: &InitialSpectrum,
    v: VelocityPoint,
) -> Result<TabulatedWeights> {
    let sector = sector(v);
    let (n_band1, n_band2): ([u8; 2], [u8; 2]) = match sector {
        1 => ([3, 7], [1, 5]),
        2 => ([4, 8], [2, 6]),
        3 => ([1, 5], [3, 7]),
        _ => ([2, 6], [4, 8]),
    };
    let mut out = TabulatedWeights {
        sector,
        w_plus: 0.0,
        w_minus: 0.0,
        missing: 0,
    };
    for (band, ns) in [(Band::One, n_band1), (Band::Two, n_band2)] {
        let w = match band {
            Band::One => v,
            Band::Two => v.neg(),
        };
        let u = UPoint::from_velocity(w);
        let shape = if model.a() * u.u2.abs() >= model.b() * u.u1.abs() {
            Shape::Ribbon
        } else {
            Shape::Twist
        };
        for n in ns {
            for m in 1..=4u8 {
                let branch = Branch::new(n, m, shape, band);
                match inverse_map(model, v, branch) {
                    Ok(k) => {
                        let p = band_weight(model, spectrum, k, band).unwrap_or(0.0);
                        if m % 2 == 0 {
                            out.w_plus += p;
                        } else {
                            out.w_minus += p;
                        }
                    }
                    Err(_) => out.missing += 1,
                }
            }
        }
    }
    Ok(out)
}
