//! Quadrature of the limit density over its support.
//!
//! The support is star-shaped about the origin in the `u`-plane, so it is
//! parametrised as `u = ρ(θ) r (cos θ, sin θ)` with `ρ(θ)` the distance to
//! the nearer bounding ellipse. The angle is split at the axes and at the
//! ellipse crossings, where `ρ` has kinks. Substituting `r = 1 − s²` turns
//! the inverse-square-root edge singularity into a bounded integrand. A thin
//! shell `1 − ε < r ≤ 1` is cut off and its mass estimated from the
//! `1/√(1 − r)` edge model as `2ε g(1 − ε)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::lattice::PositionDistribution;
use crate::model::Model;
use crate::quadrature::gauss_legendre_on;
use crate::spectral::InitialSpectrum;

use super::density::density;
use super::{Shape, UPoint, VelocityPoint};

/// Radial width `ε` of the excised boundary shell.
pub const SHELL_WIDTH: f64 = 1e-4;

/// Weighted nodes covering the support: `∫ g dv ≈ Σ w g(v)`.
#[derive(Debug, Clone)]
pub struct SupportNodes {
    pub interior: Vec<(VelocityPoint, f64)>,
    /// One node per angle at `r = 1 − ε`, weighted by the shell-model mass.
    pub shell: Vec<(VelocityPoint, f64)>,
}

fn radial_extent(model: &Model, theta: f64) -> f64 {
    let d = model.derived();
    let (s, c) = theta.sin_cos();
    let ribbon = 1.0 / (c * c / d.axis_r1 + s * s / d.axis_r2).sqrt();
    if d.degenerate {
        return ribbon;
    }
    let twist = 1.0 / (c * c / d.axis_t1 + s * s / d.axis_t2).sqrt();
    ribbon.min(twist)
}

/// `n` points on the support boundary at equally spaced `u`-plane angles,
/// starting on the positive `u₁` axis. The polyline is not closed.
pub fn support_boundary(model: &Model, n: usize) -> Vec<VelocityPoint> {
    (0..n)
        .map(|i| {
            let theta = TAU * i as f64 / n as f64;
            let rho = radial_extent(model, theta);
            let (s, c) = theta.sin_cos();
            UPoint::new(rho * c, rho * s).to_velocity()
        })
        .collect()
}

/// `n` points on the full ribbon or twist ellipse.
pub fn ellipse_points(model: &Model, shape: Shape, n: usize) -> Vec<VelocityPoint> {
    let d = model.derived();
    let (ax1, ax2) = match shape {
        Shape::Ribbon => (d.axis_r1, d.axis_r2),
        Shape::Twist => (d.axis_t1, d.axis_t2),
    };
    (0..n)
        .map(|i| {
            let (s, c) = (TAU * i as f64 / n as f64).sin_cos();
            UPoint::new(ax1.sqrt() * c, ax2.sqrt() * s).to_velocity()
        })
        .collect()
}

fn angle_breaks(model: &Model) -> Vec<f64> {
    let d = model.derived();
    let mut breaks = vec![0.0, FRAC_PI_2, PI, 1.5 * PI, TAU];
    if !d.degenerate {
        let num = 1.0 / d.axis_t1 - 1.0 / d.axis_r1;
        let den = 1.0 / d.axis_r2 - 1.0 / d.axis_t2;
        let tc = (num / den).sqrt().atan();
        breaks.extend([tc, PI - tc, PI + tc, TAU - tc]);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    breaks
}

/// Gauss–Legendre nodes with `n_theta` points per angular segment and
/// `n_radial` points in `s`.
pub fn support_nodes(model: &Model, n_theta: usize, n_radial: usize) -> SupportNodes {
    let s_min = SHELL_WIDTH.sqrt();
    let radial = gauss_legendre_on(n_radial, s_min, 1.0);
    let mut interior = Vec::new();
    let mut shell = Vec::new();
    for seg in angle_breaks(model).windows(2) {
        for (theta, w_theta) in gauss_legendre_on(n_theta, seg[0], seg[1]) {
            let rho = radial_extent(model, theta);
            let (sin, cos) = theta.sin_cos();
            let at = |r: f64| UPoint::new(rho * r * cos, rho * r * sin).to_velocity();
            for &(s, w_s) in &radial {
                let r = 1.0 - s * s;
                interior.push((at(r), w_theta * w_s * rho * rho * r * 2.0 * s));
            }
            let r = 1.0 - SHELL_WIDTH;
            shell.push((at(r), w_theta * rho * rho * r * 2.0 * SHELL_WIDTH));
        }
    }
    SupportNodes { interior, shell }
}

/// A quadrature value split into its interior part and the shell estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Integral {
    pub interior: f64,
    pub shell: f64,
}

impl Integral {
    pub fn total(&self) -> f64 {
        self.interior + self.shell
    }
}

/// Bin of `v ∈ [−1, 1]` on a uniform grid of `bins` cells; edges go to the
/// lower bin and out-of-range values to the end bins.
pub fn bin_index(v: f64, bins: usize) -> usize {
    let i = ((v + 1.0) * bins as f64 / 2.0).ceil() as i64 - 1;
    i.clamp(0, bins as i64 - 1) as usize
}

/// Bin of the lattice coordinate `x` at time `t`, in exact integer
/// arithmetic, with the same edge rule as [`bin_index`].
fn lattice_bin_index(x: i64, t: u64, bins: usize) -> usize {
    let num = (x + t as i64) * bins as i64;
    let den = 2 * t as i64;
    let ceil = -((-num).div_euclid(den));
    (ceil - 1).clamp(0, bins as i64 - 1) as usize
}

/// Probability mass per cell of a `bins × bins` grid over `[−1, 1]²`,
/// row-major with `v₁` outer.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedMass {
    pub bins: usize,
    pub mass: Vec<f64>,
}

impl BinnedMass {
    /// Masses of `X_t / t` from a lattice distribution.
    pub fn from_distribution(dist: &PositionDistribution, t: u64, bins: usize) -> Self {
        assert!(t >= 1 && bins >= 1);
        let mut mass = vec![0.0; bins * bins];
        for ((x1, x2), p) in dist.iter() {
            let i = lattice_bin_index(x1, t, bins);
            let j = lattice_bin_index(x2, t, bins);
            mass[i * bins + j] += p;
        }
        Self { bins, mass }
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn l1_distance(&self, other: &BinnedMass) -> f64 {
        assert_eq!(self.bins, other.bins, "bin grids differ");
        self.mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// The distribution density `f(v)/(2π)²` tabulated on [`SupportNodes`].
#[derive(Debug, Clone)]
pub struct DensityQuadrature {
    nodes: SupportNodes,
    interior: Vec<f64>,
    shell: Vec<f64>,
}

impl DensityQuadrature {
    pub fn new(
        model: &Model,
        spectrum: &InitialSpectrum,
        n_theta: usize,
        n_radial: usize,
    ) -> Result<Self> {
        let nodes = support_nodes(model, n_theta, n_radial);
        let norm = 1.0 / (TAU * TAU);
        let eval = |pts: &[(VelocityPoint, f64)]| -> Result<Vec<f64>> {
            pts.par_iter()
                .map(|&(v, _)| density(model, spectrum, v).map(|f| f * norm))
                .collect()
        };
        let interior = eval(&nodes.interior)?;
        let shell = eval(&nodes.shell)?;
        Ok(Self {
            nodes,
            interior,
            shell,
        })
    }

    pub fn nodes(&self) -> &SupportNodes {
        &self.nodes
    }

    /// `∫ f dv / (2π)²`.
    pub fn integral(&self) -> Integral {
        let dot = |pts: &[(VelocityPoint, f64)], f: &[f64]| -> f64 {
            pts.iter().zip(f).map(|((_, w), f)| w * f).sum()
        };
        Integral {
            interior: dot(&self.nodes.interior, &self.interior),
            shell: dot(&self.nodes.shell, &self.shell),
        }
    }

    /// `∫ e^{iξ·v} f dv / (2π)²`, shell included.
    pub fn char_function(&self, xi: [f64; 2]) -> Complex64 {
        self.weighted()
            .map(|(v, m)| Complex64::from_polar(m, xi[0] * v.v1 + xi[1] * v.v2))
            .sum()
    }

    /// Cell masses; shell mass is credited to the cells its nodes fall in.
    pub fn binned(&self, bins: usize) -> BinnedMass {
        let mut mass = vec![0.0; bins * bins];
        for (v, m) in self.weighted() {
            mass[bin_index(v.v1, bins) * bins + bin_index(v.v2, bins)] += m;
        }
        BinnedMass { bins, mass }
    }

    fn weighted(&self) -> impl Iterator<Item = (VelocityPoint, f64)> + '_ {
        let inner = self.nodes.interior.iter().zip(&self.interior);
        let outer = self.nodes.shell.iter().zip(&self.shell);
        inner.chain(outer).map(|(&(v, w), &f)| (v, w * f))
    }
}
