//! The weak-limit machinery: the velocity map `k ↦ v`, its support, the two
//! Jacobian branches, branch-wise inverses and the limit density `f(v)`.
//!
//! The map factors as `k → l → c → u → v`:
//!
//! - `l₁ = k₂ + k₁ + α₂ + α₁`, `l₂ = k₂ − k₁ + β₂ − β₁`
//! - `c_i = cos l_i`
//! - `u₁ = −√2 a s₁ / √(1 − τ²)`, `u₂ = −√2 b s₂ / √(1 − τ²)`
//! - `v = (1/√2)[[1, 1], [1, −1]] u`
//!
//! A branch `(n, m, s, p)` names one preimage of a velocity: the `l`-square
//! `L_n`, the `c`-region `C_m`, the ribbon/twist shape `s` and the band `p`.

mod branch;
mod density;
mod geometry;
mod integrate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::spectral::Band;

pub use branch::{classify_branch, inverse_map, preimages, ratio_root, Preimage};
pub use density::{density, tabulated_weights, TabulatedWeights};
pub use geometry::{
    conic_residual, forward_map, jacobian_forward, jacobian_inverse, jacobian_terms, kappa,
    kappa_gamma, gamma, konno_density, reference_ellipse_grover, support_contains,
    support_excess, SUPPORT_TOL,
};
pub use integrate::{
    bin_index, ellipse_points, support_boundary, support_nodes, BinnedMass, DensityQuadrature, Integral, SupportNodes, SHELL_WIDTH,
};

/// A rescaled position `X_t / t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityPoint {
    pub v1: f64,
    pub v2: f64,
}

impl VelocityPoint {
    pub fn new(v1: f64, v2: f64) -> Self {
        Self { v1, v2 }
    }

    pub fn neg(self) -> Self {
        Self::new(-self.v1, -self.v2)
    }

    pub fn swapped(self) -> Self {
        Self::new(self.v2, self.v1)
    }

    pub fn max_abs_diff(&self, other: &VelocityPoint) -> f64 {
        (self.v1 - other.v1).abs().max((self.v2 - other.v2).abs())
    }
}

/// Rotated coordinates `u = (1/√2)[[1, 1], [1, −1]] v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UPoint {
    pub u1: f64,
    pub u2: f64,
}

impl UPoint {
    pub fn new(u1: f64, u2: f64) -> Self {
        Self { u1, u2 }
    }

    pub fn from_velocity(v: VelocityPoint) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(h * (v.v1 + v.v2), h * (v.v1 - v.v2))
    }

    /// The same rotation applied again, since it is an involution.
    pub fn to_velocity(self) -> VelocityPoint {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        VelocityPoint::new(h * (self.u1 + self.u2), h * (self.u1 - self.u2))
    }
}

/// Ribbon (`|c₂| ≤ |c₁|`, swept by lines `c₂ = κc₁`) or twist
/// (`|c₁| ≤ |c₂|`, swept by `c₁ = γc₂`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Shape {
    Ribbon,
    Twist,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Ribbon => "R",
            Shape::Twist => "T",
        })
    }
}

/// The sign choice `±` used for Jacobian branches and quadratic roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JacobianSign {
    Plus,
    Minus,
}

impl JacobianSign {
    pub fn value(self) -> f64 {
        match self {
            JacobianSign::Plus => 1.0,
            JacobianSign::Minus => -1.0,
        }
    }
}

/// One preimage label. For odd `m` the shape is always stored as
/// [`Shape::Ribbon`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Branch {
    pub n: u8,
    pub m: u8,
    pub shape: Shape,
    pub band: Band,
}

impl Branch {
    pub fn new(n: u8, m: u8, shape: Shape, band: Band) -> Self {
        assert!((1..=8).contains(&n) && (1..=4).contains(&m), "branch ({n}, {m}) out of range");
        let shape = if m % 2 == 1 { Shape::Ribbon } else { shape };
        Self { n, m, shape, band }
    }

    /// Even `m` pairs with `|J|₊`, odd `m` with `|J|₋`.
    pub fn jacobian_sign(&self) -> JacobianSign {
        if self.m % 2 == 0 {
            JacobianSign::Plus
        } else {
            JacobianSign::Minus
        }
    }

    /// Every label, with both shapes listed for even `m`.
    pub fn all() -> impl Iterator<Item = Branch> {
        (1..=8u8).flat_map(|n| {
            (1..=4u8).flat_map(move |m| {
                let shapes: &[Shape] = if m % 2 == 1 {
                    &[Shape::Ribbon]
                } else {
                    &[Shape::Ribbon, Shape::Twist]
                };
                shapes.iter().flat_map(move |&s| {
                    Band::ALL.into_iter().map(move |p| Branch::new(n, m, s, p))
                })
            })
        })
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, m={}, s={}, p={})", self.n, self.m, self.shape, self.band.index() + 1)
    }
}

/// Where a velocity lies relative to the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupportRegion {
    Inside,
    Boundary,
    Outside,
}

/// The polynomial pieces of the inverse Jacobian at a velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianTerms {
    /// `(1 − v₁²)(1 − v₂²)`.
    pub a_term: f64,
    pub b_term: f64,
    /// `D_J`.
    pub c_term: f64,
    pub e_r: f64,
    pub e_t: f64,
    /// `D_{1−τ²}/4 = 4a²b² E_R E_T`.
    pub d_quarter: f64,
}

impl JacobianTerms {
    /// `1 − τ² = (B ± √(D/4)) / A`.
    pub fn one_minus_tau_sq(&self, sign: JacobianSign) -> f64 {
        (self.b_term + sign.value() * self.d_quarter.max(0.0).sqrt()) / self.a_term
    }
}
