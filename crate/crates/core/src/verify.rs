//! Cross-checks between the lattice, spectral and limit layers.
//!
//! Every check returns one or more [`ComparisonReport`]s with the measured
//! metric, its tolerance and diagnostics. Random samplers are seeded
//! ChaCha generators so reports are reproducible.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::lattice::{LatticeState, PositionDistribution};
use crate::limit::{
    classify_branch, forward_map, inverse_map, jacobian_forward, jacobian_inverse,
    jacobian_terms, preimages, reference_ellipse_grover, support_contains, support_excess,
    tabulated_weights, BinnedMass, DensityQuadrature, JacobianSign, SupportRegion,
    VelocityPoint,
};
use crate::model::Model;
use crate::spectral::{
    bloch_matrix, eigensystem, eigenvalues, fourier_initial, numeric_char_function,
    spectral_reconstruct, tau_of, Band, Wavenumber,
};

/// Angular and radial node counts of the support quadrature.
const SUPPORT_QUADRATURE: (usize, usize) = (256, 256);
/// Torus grid of the spectral characteristic-function quadrature.
const CHAR_GRID: usize = 256;
/// Finite-difference step.
const FD_STEP: f64 = 1e-5;
/// Forward Jacobians below this are excluded from relative comparisons.
const MIN_JACOBIAN: f64 = 1e-4;
/// Distance from a region boundary below which round-trip samples are skipped.
const BOUNDARY_MARGIN: f64 = 1e-6;
/// Relative dilation of the support used to count escaped mass.
const SUPPORT_MARGIN: f64 = 0.05;

/// Outcome of one check. `passed` holds exactly when `metric ≤ tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub name: String,
    pub metric: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seed: Option<u64>,
    pub details: BTreeMap<String, Value>,
}

impl ComparisonReport {
    pub fn new(name: impl Into<String>, metric: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            metric,
            tolerance,
            passed: metric <= tolerance,
            seed: None,
            details: BTreeMap::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_detail(mut self, key: &str, value: impl Serialize) -> Self {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(key.to_owned(), value);
        self
    }

    /// Replace the tolerance and re-evaluate `passed`.
    pub fn set_tolerance(&mut self, tolerance: f64) {
        self.tolerance = tolerance;
        self.passed = self.metric <= tolerance;
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialise")
    }
}

pub fn write_json_lines<W: Write>(reports: &[ComparisonReport], mut w: W) -> Result<()> {
    for r in reports {
        writeln!(w, "{}", r.to_json_line())?;
    }
    Ok(())
}

/// Fixed-width table: name, metric, tolerance, PASS/FAIL.
pub fn summary_table(reports: &[ComparisonReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut out = format!("{:<width$}  {:>12}  {:>12}  result\n", "name", "metric", "tolerance");
    for r in reports {
        out.push_str(&format!(
            "{:<width$}  {:>12.4e}  {:>12.4e}  {}\n",
            r.name,
            r.metric,
            r.tolerance,
            if r.passed { "PASS" } else { "FAIL" }
        ));
    }
    out
}

fn random_k(rng: &mut ChaCha8Rng) -> Wavenumber {
    Wavenumber::new(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI))
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

/// `|‖Ψ_t‖² − 1|` after `steps` steps.
pub fn check_unitarity(model: &Model, state0: &LatticeState, steps: u64) -> ComparisonReport {
    let state = state0.evolve(model, steps);
    let norm = state.norm_sqr();
    ComparisonReport::new("unitarity", (norm - 1.0).abs(), 1e-10)
        .with_detail("steps", steps)
        .with_detail("norm_sqr", norm)
}

/// Max amplitude difference between lattice evolution and the inverse
/// transform of the spectral evolution.
pub fn check_lattice_vs_spectral(
    model: &Model,
    state0: &LatticeState,
    steps: u64,
) -> Result<ComparisonReport> {
    if steps > 64 {
        return Err(Error::ParameterDomain(format!(
            "lattice/spectral comparison supports t ≤ 64, got {steps}"
        )));
    }
    let lattice = state0.evolve(model, steps);
    let spectral = spectral_reconstruct(model, &fourier_initial(state0), steps)?;
    let w = spectral.window();
    let mut metric: f64 = 0.0;
    for (i, s) in spectral.amplitudes().iter().enumerate() {
        metric = metric.max(s.max_abs_diff(&lattice.amplitude(w.site(i))));
    }
    // Lattice amplitudes outside the reconstruction window must vanish.
    for ((x1, x2), s) in lattice.support() {
        if !w.contains((x1, x2)) {
            metric = metric.max(s.norm_sqr().sqrt());
        }
    }
    Ok(ComparisonReport::new("lattice_spectral", metric, 1e-8)
        .with_detail("steps", steps)
        .with_detail("grid", w.len1()))
}

/// Eigenvalue identities and group velocities against finite differences
/// of `arg λ_p`.
pub fn check_spectral_invariants(
    model: &Model,
    state0: &LatticeState,
    samples: usize,
    seed: u64,
) -> Vec<ComparisonReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ks: Vec<Wavenumber> = (0..samples).map(|_| random_k(&mut rng)).collect();
    let spectrum = fourier_initial(state0);
    let e_delta = Complex64::from_polar(1.0, model.derived().delta);
    let mut identity: f64 = 0.0;
    let mut vector: f64 = 0.0;
    let mut velocity: f64 = 0.0;
    let mut skipped = 0usize;
    for &k in &ks {
        let lam = eigenvalues(model, k);
        let m = bloch_matrix(model, k);
        identity = identity
            .max((lam[0].norm() - 1.0).abs())
            .max((lam[1].norm() - 1.0).abs())
            .max((lam[0] * lam[1] - e_delta).norm())
            .max((lam[0] + lam[1] - (m[0][0] + m[1][1])).norm());
        let Ok(eig) = eigensystem(model, k) else {
            skipped += 1;
            continue;
        };
        for p in 0..2 {
            let v = eig.vectors[p];
            let mv = v.apply(&m);
            vector = vector.max(mv.max_abs_diff(&v.scale(eig.lambda[p])));
        }
        vector = vector.max(eig.vectors[0].inner(&eig.vectors[1]).norm());
        let psi = spectrum.evaluate(k);
        let w = eig.band_weights(&psi);
        vector = vector.max((w[0] + w[1] - psi.norm_sqr()).abs());

        for band in Band::ALL {
            let v = crate::spectral::group_velocity(model, band, k).expect("gap checked");
            let arg_step = |dk1: f64, dk2: f64| {
                let plus = eigenvalues(model, Wavenumber::new(k.k1 + dk1, k.k2 + dk2));
                let minus = eigenvalues(model, Wavenumber::new(k.k1 - dk1, k.k2 - dk2));
                -(plus[band.index()] / minus[band.index()]).arg() / (2.0 * FD_STEP)
            };
            let fd = [arg_step(FD_STEP, 0.0), arg_step(0.0, FD_STEP)];
            for (got, want) in fd.iter().zip([v.v1, v.v2]) {
                velocity = velocity.max((got - want).abs() / want.abs().max(1.0));
            }
        }
    }
    vec![
        ComparisonReport::new("spectral_invariants", identity, 1e-12)
            .with_seed(seed)
            .with_detail("samples", samples),
        ComparisonReport::new("eigenvectors", vector, 1e-10)
            .with_seed(seed)
            .with_detail("samples", samples)
            .with_detail("degenerate_skipped", skipped),
        ComparisonReport::new("group_velocity_fd", velocity, 1e-6)
            .with_seed(seed)
            .with_detail("samples", samples)
            .with_detail("step", FD_STEP),
    ]
}

fn fd_jacobian(model: &Model, k: Wavenumber) -> Result<f64> {
    let v = |d1: f64, d2: f64| forward_map(model, Wavenumber::new(k.k1 + d1, k.k2 + d2));
    let h = FD_STEP;
    let (p1, m1) = (v(h, 0.0)?, v(-h, 0.0)?);
    let (p2, m2) = (v(0.0, h)?, v(0.0, -h)?);
    let d11 = (p1.v1 - m1.v1) / (2.0 * h);
    let d21 = (p1.v2 - m1.v2) / (2.0 * h);
    let d12 = (p2.v1 - m2.v1) / (2.0 * h);
    let d22 = (p2.v2 - m2.v2) / (2.0 * h);
    Ok((d11 * d22 - d12 * d21).abs())
}

/// Forward Jacobian against finite differences, and its reciprocal against
/// the branch-matched inverse Jacobian at the image velocity.
pub fn check_jacobian(model: &Model, samples: usize, seed: u64) -> Vec<ComparisonReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ks: Vec<Wavenumber> = (0..samples).map(|_| random_k(&mut rng)).collect();
    let mut fd_err: f64 = 0.0;
    let mut branch_err: f64 = 0.0;
    let mut excluded = 0usize;
    for &k in &ks {
        let Ok(jf) = jacobian_forward(model, k) else {
            excluded += 1;
            continue;
        };
        let v = forward_map(model, k).expect("gap checked");
        if jf <= MIN_JACOBIAN || support_contains(model, v) != SupportRegion::Inside {
            excluded += 1;
            continue;
        }
        let Ok(fd) = fd_jacobian(model, k) else {
            excluded += 1;
            continue;
        };
        fd_err = fd_err.max(rel_err(fd, jf));
        let sign = classify_branch(model, k).jacobian_sign();
        match jacobian_inverse(model, v, sign) {
            Ok(inv) => branch_err = branch_err.max(rel_err(inv, 1.0 / jf)),
            Err(_) => excluded += 1,
        }
    }
    vec![
        ComparisonReport::new("jacobian_fd", fd_err, 1e-6)
            .with_seed(seed)
            .with_detail("samples", samples)
            .with_detail("excluded", excluded),
        ComparisonReport::new("jacobian_branch", branch_err, 1e-8)
            .with_seed(seed)
            .with_detail("samples", samples)
            .with_detail("excluded", excluded)
            .with_detail("degenerate_model", model.is_degenerate()),
    ]
}

/// Whether `k` is within `margin` of an `L`-square edge, a `C`-region line
/// or the ribbon/twist diagonal.
fn near_region_boundary(model: &Model, k: Wavenumber, margin: f64) -> bool {
    let t = tau_of(model, k);
    let j = model.derived().j_plus;
    t.s1.abs() < margin
        || t.s2.abs() < margin
        || (t.c1 - j * t.c2).abs() < margin
        || (t.c2 - j * t.c1).abs() < margin
        || (t.c1.abs() - t.c2.abs()).abs() < margin
}

/// `max |k − inverse_map(forward_map(k), classify_branch(k))|` on the torus.
pub fn check_roundtrip(model: &Model, samples: usize, seed: u64) -> ComparisonReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ks: Vec<Wavenumber> = (0..samples).map(|_| random_k(&mut rng)).collect();
    let results: Vec<Option<f64>> = ks
        .par_iter()
        .map(|&k| {
            if near_region_boundary(model, k, BOUNDARY_MARGIN) {
                return None;
            }
            let v = forward_map(model, k).ok()?;
            if support_contains(model, v) != SupportRegion::Inside {
                return None;
            }
            let back = inverse_map(model, v, classify_branch(model, k)).ok();
            Some(back.map_or(f64::INFINITY, |b| b.distance(&k)))
        })
        .collect();
    let excluded = results.iter().filter(|r| r.is_none()).count();
    let metric = results.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    ComparisonReport::new("roundtrip", metric, 1e-9)
        .with_seed(seed)
        .with_detail("samples", samples)
        .with_detail("excluded", excluded)
        .with_detail("phases", model.params())
}

fn random_interior_v(model: &Model, rng: &mut ChaCha8Rng) -> VelocityPoint {
    loop {
        let v = VelocityPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if support_excess(model, v) < -1e-6 {
            return v;
        }
    }
}

/// Number of sampled interior velocities whose preimage count differs from
/// the expected 16 (8 per Jacobian sign), or 8 for a degenerate model.
pub fn check_preimage_count(model: &Model, samples: usize, seed: u64) -> ComparisonReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vs: Vec<VelocityPoint> = (0..samples)
        .map(|_| random_interior_v(model, &mut rng))
        .collect();
    let (want_plus, want_minus) = if model.is_degenerate() { (8, 0) } else { (8, 8) };
    let bad: Vec<VelocityPoint> = vs
        .par_iter()
        .filter(|&&v| match preimages(model, v) {
            Ok(pre) => {
                let plus = pre.iter().filter(|p| p.sign == JacobianSign::Plus).count();
                plus != want_plus || pre.len() - plus != want_minus
            }
            Err(_) => true,
        })
        .copied()
        .collect();
    ComparisonReport::new("preimage_count", bad.len() as f64, 0.0)
        .with_seed(seed)
        .with_detail("samples", samples)
        .with_detail("expected", want_plus + want_minus)
        .with_detail("first_failures", &bad[..bad.len().min(5)])
}

/// Forward image of a `grid_n²` midpoint grid against the two ellipses:
/// containment violation and tightness (minimum residuals).
pub fn check_support(model: &Model, grid_n: usize) -> Result<Vec<ComparisonReport>> {
    if grid_n < 128 {
        return Err(Error::ParameterDomain(format!(
            "support grid needs at least 128 points per axis, got {grid_n}"
        )));
    }
    #[derive(Clone, Copy)]
    struct Acc {
        violation: f64,
        min_er: f64,
        min_et: f64,
        skipped: usize,
    }
    impl Default for Acc {
        fn default() -> Self {
            Acc {
                violation: 0.0,
                min_er: f64::INFINITY,
                min_et: f64::INFINITY,
                skipped: 0,
            }
        }
    }
    impl std::ops::Add for Acc {
        type Output = Acc;
        fn add(self, o: Acc) -> Acc {
            Acc {
                violation: self.violation.max(o.violation),
                min_er: self.min_er.min(o.min_er),
                min_et: self.min_et.min(o.min_et),
                skipped: self.skipped + o.skipped,
            }
        }
    }
    let acc = crate::quadrature::torus_sum(grid_n, |k| match forward_map(model, k) {
        Ok(v) => {
            let t = jacobian_terms(model, v);
            Acc {
                violation: support_excess(model, v).max(0.0),
                min_er: t.e_r,
                min_et: t.e_t,
                skipped: 0,
            }
        }
        Err(_) => Acc {
            skipped: 1,
            ..Acc::default()
        },
    });
    let tight = acc.min_er.max(acc.min_et);
    Ok(vec![
        ComparisonReport::new("support_containment", acc.violation, 1e-12)
            .with_detail("grid", grid_n)
            .with_detail("degenerate_skipped", acc.skipped),
        ComparisonReport::new("support_tightness", tight, 1e-3)
            .with_detail("grid", grid_n)
            .with_detail("min_e_r", acc.min_er)
            .with_detail("min_e_t", acc.min_et),
    ])
}

/// For a degenerate model: the single inverse Jacobian and the single
/// ellipse on a `grid_n²` velocity grid.
pub fn check_degenerate(model: &Model, grid_n: usize) -> Result<Vec<ComparisonReport>> {
    if !model.is_degenerate() {
        return Err(Error::ParameterDomain(
            "degenerate-case check needs a + b = 1".into(),
        ));
    }
    let a = model.a();
    let b = model.b();
    let mut jac_err: f64 = 0.0;
    let mut form_err: f64 = 0.0;
    let mut mismatches = 0usize;
    let mut inside = 0usize;
    for i in 0..grid_n {
        for j in 0..grid_n {
            let v = VelocityPoint::new(
                -1.0 + 2.0 * (i as f64 + 0.5) / grid_n as f64,
                -1.0 + 2.0 * (j as f64 + 0.5) / grid_n as f64,
            );
            let s = v.v1 + v.v2;
            let d = v.v1 - v.v2;
            let single = s * s / (4.0 * a) + d * d / (4.0 * b) - 1.0;
            let excess = support_excess(model, v);
            form_err = form_err.max((excess - single).abs());
            if excess.abs() > 1e-12 {
                let ours = excess < 0.0;
                if ours != reference_ellipse_grover(a, v) || ours != (single < 0.0) {
                    mismatches += 1;
                }
            }
            if support_contains(model, v) == SupportRegion::Inside {
                inside += 1;
                let want = 1.0 / ((1.0 - v.v1 * v.v1) * (1.0 - v.v2 * v.v2));
                for sign in [JacobianSign::Plus, JacobianSign::Minus] {
                    if let Ok(got) = jacobian_inverse(model, v, sign) {
                        jac_err = jac_err.max(rel_err(got, want));
                    } else if support_excess(model, v) < -1e-6 {
                        jac_err = f64::INFINITY;
                    }
                }
            }
        }
    }
    Ok(vec![
        ComparisonReport::new("degenerate_jacobian", jac_err, 1e-12)
            .with_detail("grid", grid_n)
            .with_detail("inside", inside),
        ComparisonReport::new("degenerate_support_form", form_err, 1e-12).with_detail("grid", grid_n),
        ComparisonReport::new("degenerate_membership", mismatches as f64, 0.0)
            .with_detail("grid", grid_n),
    ])
}

/// `∫ f dv / (2π)²` over the support, with the boundary shell estimated.
pub fn check_normalization(model: &Model, state0: &LatticeState) -> Result<ComparisonReport> {
    let q = DensityQuadrature::new(
        model,
        &fourier_initial(state0),
        SUPPORT_QUADRATURE.0,
        SUPPORT_QUADRATURE.1,
    )?;
    let total = q.integral();
    Ok(ComparisonReport::new("normalization", (total.total() - 1.0).abs(), 1e-2)
        .with_detail("interior", total.interior)
        .with_detail("shell_estimate", total.shell)
        .with_detail("total", total.total()))
}

/// Lattice distributions at each of `times` (ascending), evolved once.
pub fn evolve_snapshots(
    model: &Model,
    state0: &LatticeState,
    times: &[u64],
) -> Vec<(u64, PositionDistribution)> {
    let mut state = state0.clone();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        state = state.evolve(model, t - state.time());
        out.push((t, state.position_distribution()));
    }
    out
}

fn escaped_mass(model: &Model, dist: &PositionDistribution, t: u64) -> f64 {
    let scale = 1.0 / (t as f64 * (1.0 + SUPPORT_MARGIN));
    dist.iter()
        .filter(|&((x1, x2), _)| {
            support_excess(model, VelocityPoint::new(x1 as f64 * scale, x2 as f64 * scale)) > 0.0
        })
        .map(|(_, p)| p)
        .sum()
}

/// L1 distance between binned `X_t / t` and the binned limit law at one
/// time, plus the mass found outside the dilated support.
pub fn check_weak_limit(
    model: &Model,
    state0: &LatticeState,
    steps: u64,
    bins: usize,
) -> Result<ComparisonReport> {
    let mut reports = check_weak_limit_series(model, state0, &[steps], bins)?;
    Ok(reports.remove(0))
}

/// The weak-limit comparison at several ascending times. Reports the L1
/// distance at the last time, the number of times the distance failed to
/// decrease, and the escaped mass at the last time.
pub fn check_weak_limit_series(
    model: &Model,
    state0: &LatticeState,
    times: &[u64],
    bins: usize,
) -> Result<Vec<ComparisonReport>> {
    if times.is_empty() || times.windows(2).any(|w| w[0] >= w[1]) || times[0] < 1 {
        return Err(Error::ParameterDomain(
            "weak-limit times must be positive and strictly increasing".into(),
        ));
    }
    if bins == 0 {
        return Err(Error::ParameterDomain("bins must be positive".into()));
    }
    let q = DensityQuadrature::new(
        model,
        &fourier_initial(state0),
        SUPPORT_QUADRATURE.0,
        SUPPORT_QUADRATURE.1,
    )?;
    let analytic = q.binned(bins);
    let integral = q.integral();
    let mut l1 = Vec::new();
    let mut escaped = 0.0;
    for (t, dist) in evolve_snapshots(model, state0, times) {
        l1.push(BinnedMass::from_distribution(&dist, t, bins).l1_distance(&analytic));
        escaped = escaped_mass(model, &dist, t);
    }
    let last = *l1.last().expect("times is non-empty");
    let increases = l1.windows(2).filter(|w| w[1] >= w[0]).count();
    let per_time: BTreeMap<String, f64> =
        times.iter().zip(&l1).map(|(t, d)| (t.to_string(), *d)).collect();
    let mut reports = vec![ComparisonReport::new("weak_limit_l1", last, 0.1)
        .with_detail("bins", bins)
        .with_detail("l1_by_time", &per_time)
        .with_detail("analytic_mass", integral)];
    if times.len() > 1 {
        reports.push(
            ComparisonReport::new("weak_limit_monotone", increases as f64, 0.0)
                .with_detail("l1_by_time", &per_time),
        );
    }
    reports.push(
        ComparisonReport::new("weak_limit_escaped_mass", escaped, 0.02)
            .with_detail("time", times[times.len() - 1])
            .with_detail("margin", SUPPORT_MARGIN),
    );
    Ok(reports)
}

#[derive(Serialize)]
struct CharTriple {
    xi: [f64; 2],
    empirical: [f64; 2],
    spectral: [f64; 2],
    density: [f64; 2],
}

/// Empirical, spectral-quadrature and density-quadrature characteristic
/// functions. The first report takes the largest pairwise gap, the second
/// only the gap between the two time-independent quadratures.
pub fn check_char_function(
    model: &Model,
    state0: &LatticeState,
    steps: u64,
    xi_list: &[[f64; 2]],
) -> Result<Vec<ComparisonReport>> {
    if let Some(xi) = xi_list.iter().find(|xi| xi[0].abs() > 3.0 || xi[1].abs() > 3.0) {
        return Err(Error::ParameterDomain(format!(
            "ξ entries must satisfy |ξ_i| ≤ 3, got {xi:?}"
        )));
    }
    let spectrum = fourier_initial(state0);
    let dist = state0.evolve(model, steps).position_distribution();
    let q = DensityQuadrature::new(model, &spectrum, SUPPORT_QUADRATURE.0, SUPPORT_QUADRATURE.1)?;
    let mut all: f64 = 0.0;
    let mut quad: f64 = 0.0;
    let mut skipped = 0;
    let mut triples = Vec::new();
    for &xi in xi_list {
        let e = dist.characteristic_function(steps, xi);
        let s = numeric_char_function(model, &spectrum, xi, CHAR_GRID)?;
        skipped += s.skipped;
        let d = q.char_function(xi);
        let sq = (s.value - d).norm();
        quad = quad.max(sq);
        all = all.max(sq).max((e - s.value).norm()).max((e - d).norm());
        triples.push(CharTriple {
            xi,
            empirical: [e.re, e.im],
            spectral: [s.value.re, s.value.im],
            density: [d.re, d.im],
        });
    }
    Ok(vec![
        ComparisonReport::new("char_function", all, 5e-2)
            .with_detail("steps", steps)
            .with_detail("values", &triples),
        ComparisonReport::new("char_function_quadratures", quad, 1e-2)
            .with_detail("grid", CHAR_GRID)
            .with_detail("degenerate_skipped", skipped),
    ])
}

/// Soft cross-check of the preimage density against the tabulated `w±`
/// weights. The tolerance is infinite: the gap is reported, never failed.
pub fn check_density_tables(
    model: &Model,
    state0: &LatticeState,
    samples: usize,
    seed: u64,
) -> ComparisonReport {
    let spectrum = fourier_initial(state0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut missing = 0;
    let mut agree = 0;
    for _ in 0..samples {
        let v = random_interior_v(model, &mut rng);
        let (Ok(f), Ok(t)) = (
            crate::limit::density(model, &spectrum, v),
            tabulated_weights(model, &spectrum, v),
        ) else {
            continue;
        };
        missing += t.missing;
        let g = t.density(model, v).unwrap_or(f64::NAN);
        let gap = rel_err(g, f);
        if gap < 1e-8 {
            agree += 1;
        }
        worst = worst.max(if gap.is_nan() { f64::INFINITY } else { gap });
    }
    ComparisonReport::new("density_tables", worst, f64::INFINITY)
        .with_seed(seed)
        .with_detail("samples", samples)
        .with_detail("agreeing_samples", agree)
        .with_detail("missing_table_branches", missing)
        .with_detail("soft", true)
}

/// Names accepted by [`run_suite`].
pub const CHECK_NAMES: [&str; 12] = [
    "unitarity",
    "lattice_spectral",
    "spectral",
    "jacobian",
    "roundtrip",
    "preimages",
    "support",
    "degenerate",
    "normalization",
    "weak_limit",
    "char_function",
    "density_tables",
];

/// Sizes and seed of a full verification run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub unitarity_steps: u64,
    pub lattice_spectral_steps: u64,
    pub spectral_samples: usize,
    pub jacobian_samples: usize,
    pub roundtrip_samples: usize,
    pub preimage_samples: usize,
    pub support_grid: usize,
    pub degenerate_grid: usize,
    pub weak_limit_times: Vec<u64>,
    pub bins: usize,
    pub char_steps: u64,
    pub xi_list: Vec<[f64; 2]>,
    pub table_samples: usize,
    /// Per-report tolerance replacements, keyed by report name.
    pub tolerance_overrides: BTreeMap<String, f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            unitarity_steps: 500,
            lattice_spectral_steps: 20,
            spectral_samples: 10_000,
            jacobian_samples: 1_000,
            roundtrip_samples: 10_000,
            preimage_samples: 1_000,
            support_grid: 512,
            degenerate_grid: 200,
            weak_limit_times: vec![100, 300, 500],
            bins: 50,
            char_steps: 300,
            xi_list: vec![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            table_samples: 200,
            tolerance_overrides: BTreeMap::new(),
        }
    }
}

/// Run the named checks (all of [`CHECK_NAMES`] when `subset` is `None`).
/// The degenerate check is skipped for nondegenerate models.
pub fn run_suite(
    model: &Model,
    state0: &LatticeState,
    cfg: &SuiteConfig,
    subset: Option<&[String]>,
) -> Result<Vec<ComparisonReport>> {
    if let Some(names) = subset {
        if let Some(bad) = names.iter().find(|n| !CHECK_NAMES.contains(&n.as_str())) {
            return Err(Error::ParameterDomain(format!(
                "unknown check {bad:?}; known checks: {}",
                CHECK_NAMES.join(", ")
            )));
        }
    }
    let wanted = |name: &str| subset.is_none_or(|s| s.iter().any(|n| n == name));
    let mut out = Vec::new();
    if wanted("unitarity") {
        out.push(check_unitarity(model, state0, cfg.unitarity_steps));
    }
    if wanted("lattice_spectral") {
        out.push(check_lattice_vs_spectral(model, state0, cfg.lattice_spectral_steps)?);
    }
    if wanted("spectral") {
        out.extend(check_spectral_invariants(model, state0, cfg.spectral_samples, cfg.seed));
    }
    if wanted("jacobian") {
        out.extend(check_jacobian(model, cfg.jacobian_samples, cfg.seed));
    }
    if wanted("roundtrip") {
        out.push(check_roundtrip(model, cfg.roundtrip_samples, cfg.seed));
    }
    if wanted("preimages") {
        out.push(check_preimage_count(model, cfg.preimage_samples, cfg.seed));
    }
    if wanted("support") {
        out.extend(check_support(model, cfg.support_grid)?);
    }
    if wanted("degenerate") && model.is_degenerate() {
        out.extend(check_degenerate(model, cfg.degenerate_grid)?);
    }
    if wanted("normalization") {
        out.push(check_normalization(model, state0)?);
    }
    if wanted("weak_limit") {
        out.extend(check_weak_limit_series(model, state0, &cfg.weak_limit_times, cfg.bins)?);
    }
    if wanted("char_function") {
        out.extend(check_char_function(model, state0, cfg.char_steps, &cfg.xi_list)?);
    }
    if wanted("density_tables") {
        out.push(check_density_tables(model, state0, cfg.table_samples, cfg.seed));
    }
    for r in &mut out {
        if let Some(&tol) = cfg.tolerance_overrides.get(&r.name) {
            r.set_tolerance(tol);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Spinor;

    fn up() -> LatticeState {
        LatticeState::delta(Spinor::from_parts(1.0, 0.0, 0.0, 0.0)).unwrap()
    }

    #[test]
    fn report_pass_rule_and_json() {
        let r = ComparisonReport::new("x", 0.5, 1.0).with_seed(3).with_detail("k", 2);
        assert!(r.passed);
        let line = r.to_json_line();
        let v: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["name"], "x");
        assert_eq!(v["seed"], 3);
        assert_eq!(v["details"]["k"], 2);
        let mut r = r;
        r.set_tolerance(0.0);
        assert!(!r.passed);
        assert!(!ComparisonReport::new("nan", f64::NAN, 1.0).passed);
    }

    #[test]
    fn short_time_checks() {
        let m = Model::reference();
        assert!(check_unitarity(&m, &up(), 1).metric <= 1e-15);
        let r0 = check_lattice_vs_spectral(&m, &up(), 0).unwrap();
        assert_eq!(r0.metric, 0.0);
        let r1 = check_lattice_vs_spectral(&m, &up(), 1).unwrap();
        assert!(r1.metric <= 1e-12, "{}", r1.metric);
        assert!(check_lattice_vs_spectral(&m, &up(), 65).is_err());
    }

    #[test]
    fn reports_are_reproducible() {
        let m = Model::reference();
        let a = check_roundtrip(&m, 300, 42);
        let b = check_roundtrip(&m, 300, 42);
        assert_eq!(a.to_json_line(), b.to_json_line());
        assert!(a.passed, "{a:?}");
    }

    #[test]
    fn subset_and_overrides() {
        let m = Model::reference();
        let mut cfg = SuiteConfig {
            roundtrip_samples: 200,
            ..SuiteConfig::default()
        };
        cfg.tolerance_overrides.insert("roundtrip".into(), 0.0);
        let subset = vec!["roundtrip".to_string()];
        let out = run_suite(&m, &up(), &cfg, Some(&subset)).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].name, "roundtrip");
        assert_eq!(out[0].tolerance, 0.0);
        assert!(run_suite(&m, &up(), &cfg, Some(&["nope".to_string()])).is_err());
    }

    #[test]
    fn summary_lists_every_report() {
        let reports = vec![
            ComparisonReport::new("a", 0.0, 1.0),
            ComparisonReport::new("bb", 2.0, 1.0),
        ];
        let table = summary_table(&reports);
        assert_eq!(table.lines().count(), 3);
        assert!(table.contains("PASS") && table.contains("FAIL"));
    }
}
