//! Fourier-side analysis of the walk.
//!
//! Conventions: `Ψ̂(k) = Σ_x e^{−ik·x} Ψ(x)`, so `L_q` becomes multiplication
//! by `e^{ik_q}` and the Bloch matrix is
//! `diag(e^{ik₂}, e^{−ik₂}) C₀,₂ diag(e^{ik₁}, e^{−ik₁}) C₀,₁`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle;
use crate::error::{Error, Result};
use crate::lattice::{LatticeState, Spinor, Window};
use crate::limit::VelocityPoint;
use crate::model::{Mat2, Model};
use crate::quadrature;

/// Eigenvalue pairs with `1 − τ²` at or below this are treated as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-12;

/// A point of the Brillouin torus, stored in canonical `[−π, π)` form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wavenumber {
    pub k1: f64,
    pub k2: f64,
}

impl Wavenumber {
    pub fn new(k1: f64, k2: f64) -> Self {
        Self {
            k1: angle::reduce(k1),
            k2: angle::reduce(k2),
        }
    }

    /// Largest per-component distance on the torus.
    pub fn distance(&self, other: &Wavenumber) -> f64 {
        angle::distance(self.k1, other.k1).max(angle::distance(self.k2, other.k2))
    }
}

/// Eigen-band index `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Band {
    One,
    Two,
}

impl Band {
    pub const ALL: [Band; 2] = [Band::One, Band::Two];

    pub fn index(self) -> usize {
        match self {
            Band::One => 0,
            Band::Two => 1,
        }
    }

    /// `(−1)^{p−1}`.
    pub fn sign(self) -> f64 {
        match self {
            Band::One => 1.0,
            Band::Two => -1.0,
        }
    }
}

/// The intermediate quantities `l, c, s, τ` at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauTerms {
    pub l1: f64,
    pub l2: f64,
    pub c1: f64,
    pub c2: f64,
    pub s1: f64,
    pub s2: f64,
    pub tau: f64,
}

impl TauTerms {
    pub fn one_minus_tau_sq(&self) -> f64 {
        (1.0 - self.tau) * (1.0 + self.tau)
    }
}

pub fn tau_of(model: &Model, k: Wavenumber) -> TauTerms {
    let p = model.params();
    let l1 = angle::reduce(k.k2 + k.k1 + p.alpha[1] + p.alpha[0]);
    let l2 = angle::reduce(k.k2 - k.k1 + p.beta[1] - p.beta[0]);
    let (s1, c1) = l1.sin_cos();
    let (s2, c2) = l2.sin_cos();
    TauTerms {
        l1,
        l2,
        c1,
        c2,
        s1,
        s2,
        tau: model.a() * c1 - model.b() * c2,
    }
}

fn matmul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

fn phase_diag(k: f64) -> Mat2 {
    let z = Complex64::from_polar(1.0, k);
    [[z, Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), z.conj()]]
}

/// `(𝓕U𝓕⁻¹)(k)`.
pub fn bloch_matrix(model: &Model, k: Wavenumber) -> Mat2 {
    let first = matmul(&phase_diag(k.k1), model.coin(0));
    let second = matmul(&phase_diag(k.k2), model.coin(1));
    matmul(&second, &first)
}

/// `λ_p = (τ + (−1)^{p−1} i√(1 − τ²)) e^{iδ/2}` for `p = 1, 2`.
pub fn eigenvalues(model: &Model, k: Wavenumber) -> [Complex64; 2] {
    let t = tau_of(model, k);
    let root = t.one_minus_tau_sq().max(0.0).sqrt();
    let g = Complex64::from_polar(1.0, model.derived().half_delta);
    [
        Complex64::new(t.tau, root) * g,
        Complex64::new(t.tau, -root) * g,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub lambda: [Complex64; 2],
    pub vectors: [Spinor; 2],
}

impl EigenSystem {
    /// `P_p(k) = |⟨Ψ̂₀(k)|λ_p(k)⟩|²` for both bands.
    pub fn band_weights(&self, psi: &Spinor) -> [f64; 2] {
        [
            psi.inner(&self.vectors[0]).norm_sqr(),
            psi.inner(&self.vectors[1]).norm_sqr(),
        ]
    }

    /// `Σ_p λ_pᵗ |λ_p⟩⟨λ_p|ψ⟩`.
    pub fn propagate(&self, psi: &Spinor, steps: u64) -> Spinor {
        let mut out = Spinor::ZERO;
        for p in 0..2 {
            let v = &self.vectors[p];
            let coeff = v.inner(psi) * self.lambda[p].powu(steps as u32);
            out = out + v.scale(coeff);
        }
        out
    }
}

/// Eigenvalues and orthonormal eigenvectors of the Bloch matrix.
///
/// Each eigenvector is read off the row of `M − λ` with the larger entries
/// and normalised; its overall phase is a convention of this function.
pub fn eigensystem(model: &Model, k: Wavenumber) -> Result<EigenSystem> {
    let t = tau_of(model, k);
    if t.one_minus_tau_sq() <= DEGENERATE_GAP {
        return Err(Error::Degenerate { k1: k.k1, k2: k.k2 });
    }
    let m = bloch_matrix(model, k);
    let lambda = eigenvalues(model, k);
    let vectors = lambda.map(|l| {
        let from_row0 = Spinor::new(m[0][1], l - m[0][0]);
        let from_row1 = Spinor::new(l - m[1][1], m[1][0]);
        let v = if from_row0.norm_sqr() >= from_row1.norm_sqr() {
            from_row0
        } else {
            from_row1
        };
        v.scale(Complex64::new(1.0 / v.norm_sqr().sqrt(), 0.0))
    });
    Ok(EigenSystem { lambda, vectors })
}

/// `v_{p,q}(k) = i λ_p⁻¹ ∂λ_p/∂k_q` in closed form.
pub fn group_velocity(model: &Model, band: Band, k: Wavenumber) -> Result<VelocityPoint> {
    let t = tau_of(model, k);
    let gap = t.one_minus_tau_sq();
    if gap <= DEGENERATE_GAP {
        return Err(Error::Degenerate { k1: k.k1, k2: k.k2 });
    }
    let root = gap.sqrt();
    let (a, b) = (model.a(), model.b());
    let v1 = -(a * t.s1 + b * t.s2) / root;
    let v2 = -(a * t.s1 - b * t.s2) / root;
    Ok(VelocityPoint::new(band.sign() * v1, band.sign() * v2))
}

/// `Ψ̂₀(k)` of a finitely supported initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpectrum {
    terms: Vec<((i64, i64), Spinor)>,
}

impl InitialSpectrum {
    pub fn evaluate(&self, k: Wavenumber) -> Spinor {
        self.terms.iter().fold(Spinor::ZERO, |acc, &((x1, x2), s)| {
            let phase = Complex64::from_polar(1.0, -(k.k1 * x1 as f64 + k.k2 * x2 as f64));
            acc + s.scale(phase)
        })
    }

    /// Smallest square window `[−r, r]²` containing the initial support.
    pub fn radius(&self) -> i64 {
        self.terms
            .iter()
            .map(|((x1, x2), _)| x1.abs().max(x2.abs()))
            .max()
            .unwrap_or(0)
    }
}

pub fn fourier_initial(state: &LatticeState) -> InitialSpectrum {
    InitialSpectrum {
        terms: state.support().collect(),
    }
}

/// `Û(k)ᵗ Ψ̂₀(k)` through the eigen-decomposition.
pub fn spectral_evolve(
    model: &Model,
    spectrum: &InitialSpectrum,
    steps: u64,
    k: Wavenumber,
) -> Result<Spinor> {
    let psi = spectrum.evaluate(k);
    if steps == 0 {
        return Ok(psi);
    }
    Ok(eigensystem(model, k)?.propagate(&psi, steps))
}

/// Reconstruct `Ψ_t` on `[−(t+r), t+r]²` from `spectral_evolve` on the
/// `N × N` grid `k_j = −π + 2πj/N` with `N = 2(t + r) + 1`, where `r` is the
/// radius of the initial support. No aliasing occurs on that grid.
pub fn spectral_reconstruct(
    model: &Model,
    spectrum: &InitialSpectrum,
    steps: u64,
) -> Result<LatticeState> {
    let radius = steps as i64 + spectrum.radius();
    let n = (2 * radius + 1) as usize;
    let grid: Vec<f64> = (0..n)
        .map(|j| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / n as f64)
        .collect();
    let values: Vec<Vec<Spinor>> = grid
        .par_iter()
        .map(|&k1| {
            grid.iter()
                .map(|&k2| spectral_evolve(model, spectrum, steps, Wavenumber { k1, k2 }))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let xs: Vec<i64> = (-radius..=radius).collect();
    // Transform along k₂ first, then along k₁.
    let half: Vec<Vec<Spinor>> = values
        .par_iter()
        .map(|row| {
            xs.iter()
                .map(|&x2| {
                    row.iter().zip(&grid).fold(Spinor::ZERO, |acc, (s, &k2)| {
                        acc + s.scale(Complex64::from_polar(1.0, k2 * x2 as f64))
                    })
                })
                .collect()
        })
        .collect();
    let norm = Complex64::new(1.0 / (n * n) as f64, 0.0);
    let amplitudes: Vec<Spinor> = xs
        .par_iter()
        .flat_map_iter(|&x1| {
            let half = &half;
            let grid = &grid;
            (0..n).map(move |j2| {
                half.iter()
                    .zip(grid.iter())
                    .fold(Spinor::ZERO, |acc, (row, &k1)| {
                        acc + row[j2].scale(Complex64::from_polar(1.0, k1 * x1 as f64))
                    })
                    .scale(norm)
            })
        })
        .collect();
    LatticeState::from_raw(Window::square(radius), amplitudes, steps)
}

/// Torus quadrature of a characteristic function together with the number
/// of skipped (degenerate) grid points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharFunctionEstimate {
    pub value: Complex64,
    pub skipped: usize,
}

/// `∫_{𝕋²} dk/(2π)² Σ_p e^{iξ·v_p(k)} P_p(k)` on the `grid_n × grid_n`
/// midpoint grid.
pub fn numeric_char_function(
    model: &Model,
    spectrum: &InitialSpectrum,
    xi: [f64; 2],
    grid_n: usize,
) -> Result<CharFunctionEstimate> {
    if grid_n < 16 {
        return Err(Error::ParameterDomain(format!(
            "torus grid needs at least 16 points per axis, got {grid_n}"
        )));
    }
    #[derive(Default)]
    struct Acc(Complex64, usize);
    impl std::ops::Add for Acc {
        type Output = Acc;
        fn add(self, o: Acc) -> Acc {
            Acc(self.0 + o.0, self.1 + o.1)
        }
    }
    let Acc(sum, skipped) = quadrature::torus_sum(grid_n, |k| {
        let Ok(eig) = eigensystem(model, k) else {
            return Acc(Complex64::new(0.0, 0.0), 1);
        };
        let weights = eig.band_weights(&spectrum.evaluate(k));
        let mut z = Complex64::new(0.0, 0.0);
        for band in Band::ALL {
            let v = group_velocity(model, band, k).expect("gap checked above");
            z += Complex64::from_polar(weights[band.index()], xi[0] * v.v1 + xi[1] * v.v2);
        }
        Acc(z, 0)
    });
    Ok(CharFunctionEstimate {
        value: sum / (grid_n * grid_n) as f64,
        skipped,
    })
}
