//! Coin parameters and the constants derived from them.
//!
//! Coins are stored as moduli and phases, never as raw complex entries, so
//! `|a_q|² + |b_q|² = 1` and `det C₀,q = e^{iδ_q}` hold by construction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angle;
use crate::error::{Error, Result};

/// Tolerance on `|a + b − 1|` below which a model is treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// A 2×2 complex matrix, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

/// Raw coin parameters for the two axes. Index 0 is axis 1, index 1 is axis 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinParameters {
    /// `|a_q|`, strictly inside `(0, 1)`.
    pub modulus_a: [f64; 2],
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub delta: [f64; 2],
}

impl CoinParameters {
    /// Parameters from the squared moduli `|a₁|²`, `|a₂|²` with all phases zero.
    pub fn from_squared_moduli(a1_sq: f64, a2_sq: f64) -> Self {
        Self {
            modulus_a: [a1_sq.sqrt(), a2_sq.sqrt()],
            alpha: [0.0; 2],
            beta: [0.0; 2],
            delta: [0.0; 2],
        }
    }

    pub fn with_phases(mut self, alpha: [f64; 2], beta: [f64; 2], delta: [f64; 2]) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self.delta = delta;
        self
    }

    /// `|b_q| = √(1 − |a_q|²)`.
    pub fn modulus_b(&self, q: usize) -> f64 {
        let a = self.modulus_a[q];
        ((1.0 - a) * (1.0 + a)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub a: f64,
    pub b: f64,
    /// `δ = δ₂ + δ₁`, reduced.
    pub delta: f64,
    /// `(δ₁ + δ₂)/2` of the stored phases, unreduced, so that `e^{iδ/2}`
    /// matches the product of the two coin prefactors.
    pub half_delta: f64,
    pub d_j: f64,
    pub sqrt_d_j: f64,
    pub j_plus: f64,
    pub j_minus: f64,
    /// `−f_{R,1}(j₊)`.
    pub axis_r1: f64,
    /// `f_{R,2}(j₊)`.
    pub axis_r2: f64,
    /// `f_{T,1}(j₊)`.
    pub axis_t1: f64,
    /// `−f_{T,2}(j₊)`.
    pub axis_t2: f64,
    pub phi_1: f64,
    pub phi_2: f64,
    pub degenerate: bool,
}

/// Validated coin parameters bundled with their derived constants and the
/// two coin matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    params: CoinParameters,
    derived: DerivedConstants,
    coins: [Mat2; 2],
}

impl Model {
    /// Validate `params` and compute the derived constants.
    ///
    /// Phases are reduced to `[−π, π)`. Moduli must lie strictly inside
    /// `(0, 1)`; `|a_q| = 1` or `0` would make `b` or `a` vanish.
    pub fn new(params: CoinParameters) -> Result<Self> {
        for (q, &m) in params.modulus_a.iter().enumerate() {
            if !(m > 0.0 && m < 1.0) {
                return Err(Error::ParameterDomain(format!(
                    "|a_{}| = {m} must lie strictly inside (0, 1)",
                    q + 1
                )));
            }
        }
        let all_angles = params
            .alpha
            .iter()
            .chain(&params.beta)
            .chain(&params.delta);
        if all_angles.clone().any(|x| !x.is_finite()) {
            return Err(Error::ParameterDomain("coin phases must be finite".into()));
        }
        let params = CoinParameters {
            modulus_a: params.modulus_a,
            alpha: params.alpha.map(angle::reduce),
            beta: params.beta.map(angle::reduce),
            delta: params.delta.map(angle::reduce),
        };
        let derived = derived_constants(&params);
        let coins = [coin_matrix(&params, 0), coin_matrix(&params, 1)];
        Ok(Self {
            params,
            derived,
            coins,
        })
    }

    /// Convenience: `|a₁|², |a₂|²` with zero phases.
    pub fn from_squared_moduli(a1_sq: f64, a2_sq: f64) -> Result<Self> {
        Self::new(CoinParameters::from_squared_moduli(a1_sq, a2_sq))
    }

    /// The reference model `|a₁|² = 0.9, |a₂|² = 0.1` (so `a = b = 0.3`).
    pub fn reference() -> Self {
        Self::from_squared_moduli(0.9, 0.1).expect("reference parameters are valid")
    }

    pub fn params(&self) -> &CoinParameters {
        &self.params
    }

    pub fn derived(&self) -> &DerivedConstants {
        &self.derived
    }

    /// `C₀,q` for axis `q ∈ {0, 1}`.
    pub fn coin(&self, q: usize) -> &Mat2 {
        &self.coins[q]
    }

    pub fn a(&self) -> f64 {
        self.derived.a
    }

    pub fn b(&self) -> f64 {
        self.derived.b
    }

    pub fn is_degenerate(&self) -> bool {
        self.derived.degenerate
    }
}

/// `e^{iδ_q/2} [[a_q, b_q], [−b_q*, a_q*]]`.
fn coin_matrix(params: &CoinParameters, q: usize) -> Mat2 {
    let aq = Complex64::from_polar(params.modulus_a[q], params.alpha[q]);
    let bq = Complex64::from_polar(params.modulus_b(q), params.beta[q]);
    let g = Complex64::from_polar(1.0, params.delta[q] / 2.0);
    [[g * aq, g * bq], [-g * bq.conj(), g * aq.conj()]]
}

pub fn derived_constants(params: &CoinParameters) -> DerivedConstants {
    let a = params.modulus_a[0] * params.modulus_a[1];
    let b = params.modulus_b(0) * params.modulus_b(1);
    let degenerate = (a + b - 1.0).abs() <= DEGENERACY_TOL;
    let d_j = if degenerate {
        0.0
    } else {
        ((1.0 - (a + b) * (a + b)) * (1.0 - (a - b) * (a - b))).max(0.0)
    };
    let sqrt_d_j = d_j.sqrt();
    let lin = 1.0 - (a * a + b * b);
    let j_plus = (-lin + sqrt_d_j) / (2.0 * a * b);
    let j_minus = (-lin - sqrt_d_j) / (2.0 * a * b);
    let (a2, b2) = (a * a, b * b);
    let [al1, al2] = params.alpha;
    let [be1, be2] = params.beta;
    DerivedConstants {
        a,
        b,
        delta: angle::reduce(params.delta[0] + params.delta[1]),
        half_delta: 0.5 * (params.delta[0] + params.delta[1]),
        d_j,
        sqrt_d_j,
        j_plus,
        j_minus,
        axis_r1: 1.0 + a2 - b2 + sqrt_d_j,
        axis_r2: 1.0 - a2 + b2 - sqrt_d_j,
        axis_t1: 1.0 + a2 - b2 - sqrt_d_j,
        axis_t2: 1.0 - a2 + b2 + sqrt_d_j,
        phi_1: angle::reduce(0.5 * (al2 + al1 - be2 + be1)),
        phi_2: angle::reduce(0.5 * (al2 + al1 + be2 - be1)),
        degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn reference_model_constants() {
        let m = Model::reference();
        let d = m.derived();
        // b = √((1 − 0.9)(1 − 0.1)) = √0.09
        assert_abs_diff_eq!(d.a, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(d.b, 0.3, epsilon = 1e-15);
        assert_eq!(d.delta, 0.0);
        assert_eq!(d.phi_1, 0.0);
        assert_eq!(d.phi_2, 0.0);
        assert_abs_diff_eq!(d.d_j, 0.64, epsilon = 1e-14);
        assert_abs_diff_eq!(d.sqrt_d_j, 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(d.j_plus, -1.0 / 9.0, epsilon = 1e-13);
        assert_abs_diff_eq!(d.j_minus, -9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.j_plus * d.j_minus, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.axis_r1, 1.8, epsilon = 1e-14);
        assert_abs_diff_eq!(d.axis_r2, 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(d.axis_t1, 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(d.axis_t2, 1.8, epsilon = 1e-14);
        assert!(!d.degenerate);
    }

    #[test]
    fn symmetric_hadamard_like_is_degenerate() {
        let m = Model::new(CoinParameters {
            modulus_a: [FRAC_1_SQRT_2; 2],
            alpha: [0.0; 2],
            beta: [0.0; 2],
            delta: [0.0; 2],
        })
        .unwrap();
        let d = m.derived();
        assert_abs_diff_eq!(d.a, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.b, 0.5, epsilon = 1e-15);
        assert!(d.degenerate);
        assert_eq!(d.d_j, 0.0);
        for axis in [d.axis_r1, d.axis_r2, d.axis_t1, d.axis_t2] {
            assert_abs_diff_eq!(axis, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn trivial_moduli_rejected() {
        for bad in [1.0, 0.0, -0.2, 1.3, f64::NAN] {
            let p = CoinParameters {
                modulus_a: [bad, 0.5],
                alpha: [0.0; 2],
                beta: [0.0; 2],
                delta: [0.0; 2],
            };
            assert!(matches!(Model::new(p), Err(Error::ParameterDomain(_))));
        }
        assert!(Model::from_squared_moduli(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn phases_are_reduced() {
        let p = CoinParameters::from_squared_moduli(0.4, 0.6).with_phases(
            [std::f64::consts::PI, 4.0],
            [0.0; 2],
            [7.0, 0.0],
        );
        let m = Model::new(p).unwrap();
        for x in m.params().alpha.iter().chain(&m.params().delta) {
            assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(x));
        }
    }

    #[test]
    fn phi_shifts() {
        let p = CoinParameters::from_squared_moduli(0.4, 0.6).with_phases(
            [0.1, 0.2],
            [0.3, 0.7],
            [0.0; 2],
        );
        let d = *Model::new(p).unwrap().derived();
        assert_abs_diff_eq!(d.phi_1, 0.5 * (0.2 + 0.1 - 0.7 + 0.3), epsilon = 1e-15);
        assert_abs_diff_eq!(d.phi_2, 0.5 * (0.2 + 0.1 + 0.7 - 0.3), epsilon = 1e-15);
    }

    #[test]
    fn coin_unitary_with_phase_determinant() {
        let p = CoinParameters::from_squared_moduli(0.35, 0.8).with_phases(
            [0.4, -1.2],
            [2.0, 0.3],
            [1.1, -2.5],
        );
        let m = Model::new(p).unwrap();
        for q in 0..2 {
            let c = m.coin(q);
            let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
            let want = Complex64::from_polar(1.0, m.params().delta[q]);
            assert!((det - want).norm() < 1e-15);
            for i in 0..2 {
                for j in 0..2 {
                    let dot: Complex64 = (0..2).map(|r| c[r][i].conj() * c[r][j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn random_parameter_identities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let m = Model::from_squared_moduli(rng.gen_range(1e-3..0.999), rng.gen_range(1e-3..0.999))
                .unwrap();
            let d = m.derived();
            let (a, b) = (d.a, d.b);
            assert!(d.d_j >= 0.0);
            assert!((d.j_plus * d.j_minus - 1.0).abs() < 1e-12);
            assert!(d.j_minus <= -1.0 + 1e-12 && d.j_plus >= -1.0 - 1e-12 && d.j_plus < 0.0);
            assert!((d.axis_r1 * d.axis_t1 - 4.0 * a * a).abs() < 1e-12);
            assert!((d.axis_r2 * d.axis_t2 - 4.0 * b * b).abs() < 1e-12);
            assert!(d.axis_r1 >= d.axis_t1 && d.axis_t1 >= 0.0);
            assert!(d.axis_t2 >= d.axis_r2 && d.axis_r2 >= 0.0);
            assert_eq!(d.degenerate, (a + b - 1.0).abs() <= 1e-12);
        }
    }
}
