//! Exact evolution of the walker on ℤ² under `U = S₂C₂S₁C₁`.
//!
//! A state is a dense rectangle of spinors. Each shift grows the window by
//! one site on both sides of its axis, so a delta start occupies
//! `[−t, t]²` after `t` steps.

use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Mat2, Model};

const UNIT_NORM_TOL: f64 = 1e-12;

/// Two-component amplitude at one lattice site.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Spinor {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl Spinor {
    pub const ZERO: Spinor = Spinor {
        c1: Complex64::new(0.0, 0.0),
        c2: Complex64::new(0.0, 0.0),
    };

    pub fn new(c1: Complex64, c2: Complex64) -> Self {
        Self { c1, c2 }
    }

    /// Spinor from four reals `(re c1, im c1, re c2, im c2)`.
    pub fn from_parts(re1: f64, im1: f64, re2: f64, im2: f64) -> Self {
        Self::new(Complex64::new(re1, im1), Complex64::new(re2, im2))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.c1.conj() * other.c1 + self.c2.conj() * other.c2
    }

    pub fn scale(&self, z: Complex64) -> Spinor {
        Spinor::new(self.c1 * z, self.c2 * z)
    }

    pub fn apply(&self, m: &Mat2) -> Spinor {
        Spinor::new(
            m[0][0] * self.c1 + m[0][1] * self.c2,
            m[1][0] * self.c1 + m[1][1] * self.c2,
        )
    }

    pub fn max_abs_diff(&self, other: &Spinor) -> f64 {
        (self.c1 - other.c1).norm().max((self.c2 - other.c2).norm())
    }
}

impl std::ops::Add for Spinor {
    type Output = Spinor;
    fn add(self, rhs: Spinor) -> Spinor {
        Spinor::new(self.c1 + rhs.c1, self.c2 + rhs.c2)
    }
}

/// Inclusive rectangle `[x1_min, x1_max] × [x2_min, x2_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub x1_min: i64,
    pub x1_max: i64,
    pub x2_min: i64,
    pub x2_max: i64,
}

impl Window {
    pub fn square(radius: i64) -> Self {
        Self {
            x1_min: -radius,
            x1_max: radius,
            x2_min: -radius,
            x2_max: radius,
        }
    }

    pub fn len1(&self) -> usize {
        (self.x1_max - self.x1_min + 1) as usize
    }

    pub fn len2(&self) -> usize {
        (self.x2_max - self.x2_min + 1) as usize
    }

    pub fn area(&self) -> usize {
        self.len1() * self.len2()
    }

    pub fn contains(&self, x: (i64, i64)) -> bool {
        (self.x1_min..=self.x1_max).contains(&x.0) && (self.x2_min..=self.x2_max).contains(&x.1)
    }

    fn index(&self, x: (i64, i64)) -> Option<usize> {
        self.contains(x).then(|| {
            (x.0 - self.x1_min) as usize * self.len2() + (x.1 - self.x2_min) as usize
        })
    }

    /// Site of the flat row-major index `i` (axis 1 outer).
    pub fn site(&self, i: usize) -> (i64, i64) {
        let n2 = self.len2();
        (self.x1_min + (i / n2) as i64, self.x2_min + (i % n2) as i64)
    }

    fn grown(&self, axis: ShiftAxis) -> Window {
        let mut w = *self;
        match axis {
            ShiftAxis::One => {
                w.x1_min -= 1;
                w.x1_max += 1;
            }
            ShiftAxis::Two => {
                w.x2_min -= 1;
                w.x2_max += 1;
            }
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftAxis {
    One,
    Two,
}

impl ShiftAxis {
    fn coin_index(self) -> usize {
        match self {
            ShiftAxis::One => 0,
            ShiftAxis::Two => 1,
        }
    }
}

/// Walker wavefunction on a finite window of ℤ².
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    window: Window,
    amplitudes: Vec<Spinor>,
    time: u64,
}

impl LatticeState {
    /// The spinor localised at the origin. Rejects spinors whose norm
    /// differs from 1 by more than 1e−12.
    pub fn delta(spinor: Spinor) -> Result<Self> {
        let norm_sqr = spinor.norm_sqr();
        if !((norm_sqr.sqrt() - 1.0).abs() <= UNIT_NORM_TOL) {
            return Err(Error::NonUnitSpinor { norm_sqr });
        }
        Ok(Self {
            window: Window::square(0),
            amplitudes: vec![spinor],
            time: 0,
        })
    }

    /// A state from explicit `(site, spinor)` pairs. The window is the
    /// bounding box of the sites; the total norm must be 1.
    pub fn from_sites(sites: &[((i64, i64), Spinor)]) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::ParameterDomain("empty initial state".into()));
        }
        let window = Window {
            x1_min: sites.iter().map(|s| s.0 .0).min().unwrap(),
            x1_max: sites.iter().map(|s| s.0 .0).max().unwrap(),
            x2_min: sites.iter().map(|s| s.0 .1).min().unwrap(),
            x2_max: sites.iter().map(|s| s.0 .1).max().unwrap(),
        };
        let mut amplitudes = vec![Spinor::ZERO; window.area()];
        for &(x, s) in sites {
            let i = window.index(x).unwrap();
            amplitudes[i] = amplitudes[i] + s;
        }
        let state = Self {
            window,
            amplitudes,
            time: 0,
        };
        let norm_sqr = state.norm_sqr();
        if !((norm_sqr.sqrt() - 1.0).abs() <= UNIT_NORM_TOL) {
            return Err(Error::NonUnitSpinor { norm_sqr });
        }
        Ok(state)
    }

    /// A state from row-major amplitudes on `window` (axis 1 outer).
    /// The norm is not checked.
    pub fn from_raw(window: Window, amplitudes: Vec<Spinor>, time: u64) -> Result<Self> {
        if amplitudes.len() != window.area() {
            return Err(Error::Format(format!(
                "{} amplitudes for a window of {} sites",
                amplitudes.len(),
                window.area()
            )));
        }
        Ok(Self {
            window,
            amplitudes,
            time,
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn amplitudes(&self) -> &[Spinor] {
        &self.amplitudes
    }

    /// Amplitude at `x`; zero outside the window.
    pub fn amplitude(&self, x: (i64, i64)) -> Spinor {
        self.window
            .index(x)
            .map_or(Spinor::ZERO, |i| self.amplitudes[i])
    }

    /// Non-zero sites with their spinors.
    pub fn support(&self) -> impl Iterator<Item = ((i64, i64), Spinor)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, s)| s.norm_sqr() > 0.0)
            .map(|(i, s)| (self.window.site(i), *s))
    }

    pub fn norm_sqr(&self) -> f64 {
        // Fixed-order row sums keep the result independent of the schedule.
        let n2 = self.window.len2();
        let rows: Vec<f64> = self
            .amplitudes
            .par_chunks(n2)
            .map(|row| row.iter().map(Spinor::norm_sqr).sum())
            .collect();
        rows.iter().sum()
    }

    /// Multiply every site by the coin of `axis`.
    pub fn apply_coin(&self, model: &Model, axis: ShiftAxis) -> LatticeState {
        let coin = model.coin(axis.coin_index());
        let amplitudes = self.amplitudes.par_iter().map(|s| s.apply(coin)).collect();
        LatticeState {
            window: self.window,
            amplitudes,
            time: self.time,
        }
    }

    /// `(S_q Ψ)(x) = (Ψ_c1(x + e_q), Ψ_c2(x − e_q))`. The window grows by one
    /// site on both sides of axis `q`.
    pub fn apply_shift(&self, axis: ShiftAxis) -> LatticeState {
        let old = self.window;
        let new = old.grown(axis);
        let (n1, n2) = (new.len1(), new.len2());
        let mut amplitudes = vec![Spinor::ZERO; n1 * n2];
        amplitudes
            .par_chunks_mut(n2)
            .enumerate()
            .for_each(|(i, row)| {
                let x1 = new.x1_min + i as i64;
                for (j, out) in row.iter_mut().enumerate() {
                    let x2 = new.x2_min + j as i64;
                    let (plus, minus) = match axis {
                        ShiftAxis::One => ((x1 + 1, x2), (x1 - 1, x2)),
                        ShiftAxis::Two => ((x1, x2 + 1), (x1, x2 - 1)),
                    };
                    out.c1 = self.amplitude(plus).c1;
                    out.c2 = self.amplitude(minus).c2;
                }
            });
        LatticeState {
            window: new,
            amplitudes,
            time: self.time,
        }
    }

    /// One application of `U = S₂C₂S₁C₁`.
    pub fn step(&self, model: &Model) -> LatticeState {
        let mut next = self
            .apply_coin(model, ShiftAxis::One)
            .apply_shift(ShiftAxis::One)
            .apply_coin(model, ShiftAxis::Two)
            .apply_shift(ShiftAxis::Two);
        next.time = self.time + 1;
        next
    }

    /// `Uᵗ Ψ`.
    pub fn evolve(&self, model: &Model, steps: u64) -> LatticeState {
        let mut state = self.clone();
        for _ in 0..steps {
            state = state.step(model);
        }
        state
    }

    pub fn position_distribution(&self) -> PositionDistribution {
        PositionDistribution {
            window: self.window,
            weights: self.amplitudes.par_iter().map(Spinor::norm_sqr).collect(),
        }
    }

    /// Little-endian dump: four `i32` window bounds `(x1_min, x1_max,
    /// x2_min, x2_max)`, then for each site in row-major order (axis 1
    /// outer) the four `f64` values `re c1, im c1, re c2, im c2`.
    pub fn write_amplitudes<W: Write>(&self, mut w: W) -> Result<()> {
        let bounds = [
            self.window.x1_min,
            self.window.x1_max,
            self.window.x2_min,
            self.window.x2_max,
        ];
        for b in bounds {
            let b = i32::try_from(b)
                .map_err(|_| Error::Format(format!("window bound {b} does not fit in i32")))?;
            w.write_all(&b.to_le_bytes())?;
        }
        for s in &self.amplitudes {
            for x in [s.c1.re, s.c1.im, s.c2.re, s.c2.im] {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Inverse of [`LatticeState::write_amplitudes`]. The time stamp is not
    /// part of the format and is passed in.
    pub fn read_amplitudes<R: Read>(mut r: R, time: u64) -> Result<Self> {
        let mut b4 = [0u8; 4];
        let mut bounds = [0i64; 4];
        for b in &mut bounds {
            r.read_exact(&mut b4)?;
            *b = i32::from_le_bytes(b4) as i64;
        }
        let window = Window {
            x1_min: bounds[0],
            x1_max: bounds[1],
            x2_min: bounds[2],
            x2_max: bounds[3],
        };
        if window.x1_max < window.x1_min || window.x2_max < window.x2_min {
            return Err(Error::Format("empty window in amplitude dump".into()));
        }
        let mut b8 = [0u8; 8];
        let mut next = || -> Result<f64> {
            r.read_exact(&mut b8)?;
            Ok(f64::from_le_bytes(b8))
        };
        let mut amplitudes = Vec::with_capacity(window.area());
        for _ in 0..window.area() {
            amplitudes.push(Spinor::from_parts(next()?, next()?, next()?, next()?));
        }
        Ok(Self {
            window,
            amplitudes,
            time,
        })
    }
}

/// `P(X_t = x) = |c1(x)|² + |c2(x)|²` over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDistribution {
    window: Window,
    weights: Vec<f64>,
}

impl PositionDistribution {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn get(&self, x: (i64, i64)) -> f64 {
        self.window.index(x).map_or(0.0, |i| self.weights[i])
    }

    /// All sites of the window with their weights, including zeros.
    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64), f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, &w)| (self.window.site(i), w))
    }

    pub fn total(&self) -> f64 {
        let n2 = self.window.len2();
        let rows: Vec<f64> = self
            .weights
            .par_chunks(n2)
            .map(|row| row.iter().sum())
            .collect();
        rows.iter().sum()
    }

    /// `E[X/t]` and `E[(X/t)(X/t)ᵀ]`.
    pub fn moments(&self, steps: u64) -> Result<Moments> {
        if steps == 0 {
            return Err(Error::ParameterDomain(
                "moments of X_t/t need t ≥ 1".into(),
            ));
        }
        let t = steps as f64;
        let mut mean = [0.0; 2];
        let mut second = [[0.0; 2]; 2];
        for ((x1, x2), w) in self.iter() {
            let v = [x1 as f64 / t, x2 as f64 / t];
            for i in 0..2 {
                mean[i] += w * v[i];
                for j in 0..2 {
                    second[i][j] += w * v[i] * v[j];
                }
            }
        }
        Ok(Moments { mean, second })
    }

    /// `E[e^{iξ·X/t}]`.
    pub fn characteristic_function(&self, steps: u64, xi: [f64; 2]) -> Complex64 {
        let t = steps.max(1) as f64;
        let n2 = self.window.len2();
        let rows: Vec<Complex64> = self
            .weights
            .par_chunks(n2)
            .enumerate()
            .map(|(i, row)| {
                let x1 = (self.window.x1_min + i as i64) as f64;
                row.iter()
                    .enumerate()
                    .map(|(j, &w)| {
                        let x2 = (self.window.x2_min + j as i64) as f64;
                        Complex64::from_polar(w, (xi[0] * x1 + xi[1] * x2) / t)
                    })
                    .sum()
            })
            .collect();
        rows.iter().sum()
    }

    /// CSV with header `x1,x2,probability`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x1,x2,probability")?;
        for ((x1, x2), p) in self.iter() {
            writeln!(w, "{x1},{x2},{p:.16e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: [f64; 2],
    pub second: [[f64; 2]; 2],
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CoinParameters;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn hadamard_like() -> Model {
        Model::new(CoinParameters {
            modulus_a: [FRAC_1_SQRT_2; 2],
            alpha: [0.0; 2],
            beta: [0.0; 2],
            delta: [0.0; 2],
        })
        .unwrap()
    }

    fn up() -> Spinor {
        Spinor::from_parts(1.0, 0.0, 0.0, 0.0)
    }

    #[test]
    fn delta_validation() {
        let s = LatticeState::delta(up()).unwrap();
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!(s.support().count(), 1);
        let h = FRAC_1_SQRT_2;
        assert!(LatticeState::delta(Spinor::from_parts(h, 0.0, 0.0, h)).is_ok());
        assert!(matches!(
            LatticeState::delta(Spinor::from_parts(1.0, 0.0, 1.0, 0.0)),
            Err(Error::NonUnitSpinor { .. })
        ));
    }

    #[test]
    fn hadamard_coin_on_up() {
        let s = LatticeState::delta(up())
            .unwrap()
            .apply_coin(&hadamard_like(), ShiftAxis::One);
        let a = s.amplitude((0, 0));
        assert!((a.c1 - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((a.c2 - Complex64::new(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn shift_directions() {
        let s = LatticeState::delta(up()).unwrap().apply_shift(ShiftAxis::One);
        assert_eq!(s.amplitude((-1, 0)), up());
        assert_eq!(s.support().count(), 1);

        let down = Spinor::from_parts(0.0, 0.0, 1.0, 0.0);
        let s = LatticeState::delta(down).unwrap().apply_shift(ShiftAxis::Two);
        assert_eq!(s.amplitude((0, 1)), down);
        assert_eq!(s.support().count(), 1);
    }

    #[test]
    fn shift_then_inverse_shift_restores() {
        let h = FRAC_1_SQRT_2;
        let s0 = LatticeState::delta(Spinor::from_parts(h, 0.0, 0.0, h)).unwrap();
        let s1 = s0.apply_shift(ShiftAxis::One);
        // Inverse of S₁: component 1 pulled from x − e₁, component 2 from x + e₁.
        let back = |x: (i64, i64)| Spinor {
            c1: s1.amplitude((x.0 - 1, x.1)).c1,
            c2: s1.amplitude((x.0 + 1, x.1)).c2,
        };
        assert_eq!(back((0, 0)), s0.amplitude((0, 0)));
        for x in [(-1, 0), (1, 0), (2, 0), (-2, 0)] {
            assert_eq!(back(x), Spinor::ZERO);
        }
    }

    #[test]
    fn hadamard_like_first_step_corners() {
        let s = LatticeState::delta(up()).unwrap().step(&hadamard_like());
        assert_eq!(s.time(), 1);
        let d = s.position_distribution();
        for x in [(-1, -1), (-1, 1), (1, -1), (1, 1)] {
            assert!((d.get(x) - 0.25).abs() < 1e-14, "{x:?}: {}", d.get(x));
        }
        assert!((d.total() - 1.0).abs() < 1e-14);
        let m = d.moments(1).unwrap();
        assert!(m.mean[0].abs() < 1e-15 && m.mean[1].abs() < 1e-15);
    }

    #[test]
    fn time_zero_distribution_is_delta() {
        let s = LatticeState::delta(up()).unwrap();
        let d = s.position_distribution();
        assert_eq!(d.get((0, 0)), 1.0);
        assert!(d.moments(0).is_err());
        assert_eq!(s.evolve(&Model::reference(), 0), s);
    }

    #[test]
    fn evolve_one_equals_step() {
        let m = Model::reference();
        let s = LatticeState::delta(up()).unwrap();
        assert_eq!(s.evolve(&m, 1), s.step(&m));
    }

    #[test]
    fn light_cone_and_window() {
        let m = Model::reference();
        let t = 9;
        let s = LatticeState::delta(up()).unwrap().evolve(&m, t);
        assert_eq!(s.window(), Window::square(t as i64));
        for (x, _) in s.support() {
            assert!(x.0.abs() <= t as i64 && x.1.abs() <= t as i64);
        }
    }

    #[test]
    fn global_coin_phase_leaves_distribution_unchanged() {
        let base = CoinParameters::from_squared_moduli(0.6, 0.3);
        let m0 = Model::new(base).unwrap();
        let m1 = Model::new(base.with_phases([0.0; 2], [0.0; 2], [std::f64::consts::PI / 3.0, 1.0]))
            .unwrap();
        let mpi = Model::new(base.with_phases([0.0; 2], [0.0; 2], [std::f64::consts::PI, 0.0]))
            .unwrap();
        let s0 = LatticeState::delta(up()).unwrap();
        let d0 = s0.evolve(&m0, 12).position_distribution();
        for m in [&m1, &mpi] {
            let d = s0.evolve(m, 12).position_distribution();
            let max = d0
                .iter()
                .map(|(x, w)| (w - d.get(x)).abs())
                .fold(0.0, f64::max);
            assert!(max < 1e-12);
        }
        // δ = π applied twice on a single site: a pure global phase.
        let c0 = s0
            .apply_coin(&m0, ShiftAxis::One)
            .apply_coin(&m0, ShiftAxis::One);
        let cpi = s0
            .apply_coin(&mpi, ShiftAxis::One)
            .apply_coin(&mpi, ShiftAxis::One);
        let (p0, ppi) = (c0.amplitude((0, 0)), cpi.amplitude((0, 0)));
        let phase = ppi.c1 / p0.c1;
        assert!((phase.norm() - 1.0).abs() < 1e-14);
        assert!(ppi.max_abs_diff(&p0.scale(phase)) < 1e-14);
    }

    #[test]
    fn amplitude_dump_round_trip() {
        let s = LatticeState::delta(up()).unwrap().evolve(&Model::reference(), 4);
        let mut buf = Vec::new();
        s.write_amplitudes(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 32 * 81);
        assert_eq!(&buf[..4], &(-4i32).to_le_bytes());
        let back = LatticeState::read_amplitudes(buf.as_slice(), 4).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn csv_export() {
        let s = LatticeState::delta(up()).unwrap().step(&hadamard_like());
        let mut buf = Vec::new();
        s.position_distribution().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<_> = text.lines().collect();
        assert_eq!(rows[0], "x1,x2,probability");
        assert_eq!(rows.len(), 10);
        let quarters = rows[1..]
            .iter()
            .map(|r| r.rsplit(',').next().unwrap().parse::<f64>().unwrap())
            .filter(|p| (p - 0.25).abs() < 1e-14)
            .count();
        assert_eq!(quarters, 4);
    }
}
