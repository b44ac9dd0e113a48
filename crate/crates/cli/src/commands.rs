use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use qwalk2d::limit::{
    density, ellipse_points, support_boundary, support_contains, DensityQuadrature,
    SupportRegion,
};
use qwalk2d::spectral::{fourier_initial, numeric_char_function};
use qwalk2d::verify::{self, SuiteConfig};
use qwalk2d::{Shape, VelocityPoint};

use crate::config::RunConfig;
use crate::CliError;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn finish(mut w: BufWriter<File>, name: &str) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::Io(format!("{name}: {e}")))?;
    println!("wrote {name}");
    Ok(())
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Position distributions at each requested time and a moments table.
pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let model = cfg.model()?;
    let mut state = cfg.initial_state()?;
    let mut moments = create(&cfg.out, "moments.csv")?;
    writeln!(moments, "t,norm,mean_v1,mean_v2,second_11,second_12,second_22").map_err(io)?;
    for &t in &cfg.steps {
        state = state.evolve(&model, t - state.time());
        let dist = state.position_distribution();
        let name = format!("distribution_t{t}.csv");
        let mut w = create(&cfg.out, &name)?;
        dist.write_csv(&mut w)?;
        finish(w, &name)?;
        if t >= 1 {
            let m = dist.moments(t)?;
            writeln!(
                moments,
                "{t},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                dist.total(),
                m.mean[0],
                m.mean[1],
                m.second[0][0],
                m.second[0][1],
                m.second[1][1]
            )
            .map_err(io)?;
        }
    }
    finish(moments, "moments.csv")
}

fn write_points<W: Write>(w: &mut W, label: &str, pts: &[VelocityPoint]) -> Result<(), CliError> {
    for v in pts {
        writeln!(w, "{label},{:.16e},{:.16e}", v.v1, v.v2).map_err(io)?;
    }
    Ok(())
}

/// The density on a `grid × grid` midpoint grid of `[−1, 1]²` and the
/// support boundary.
pub fn density_grid(cfg: &RunConfig) -> Result<(), CliError> {
    let model = cfg.model()?;
    let spectrum = fourier_initial(&cfg.initial_state()?);
    let n = cfg.grid;
    let mut w = create(&cfg.out, "density.csv")?;
    writeln!(w, "v1,v2,f,inside").map_err(io)?;
    let coord = |i: usize| -1.0 + (2 * i + 1) as f64 / n as f64;
    for i in 0..n {
        for j in 0..n {
            let v = VelocityPoint::new(coord(i), coord(j));
            let (f, inside) = match support_contains(&model, v) {
                SupportRegion::Inside => (density(&model, &spectrum, v)?, 1),
                _ => (0.0, 0),
            };
            writeln!(w, "{:.16e},{:.16e},{f:.16e},{inside}", v.v1, v.v2).map_err(io)?;
        }
    }
    finish(w, "density.csv")?;

    let mut b = create(&cfg.out, "boundary.csv")?;
    writeln!(b, "v1,v2").map_err(io)?;
    let mut pts = support_boundary(&model, (4 * n).max(64));
    pts.push(pts[0]);
    for v in &pts {
        writeln!(b, "{:.16e},{:.16e}", v.v1, v.v2).map_err(io)?;
    }
    finish(b, "boundary.csv")
}

/// The bounding ellipses, the support boundary and the derived constants.
pub fn support(cfg: &RunConfig) -> Result<(), CliError> {
    let model = cfg.model()?;
    let n = (4 * cfg.grid).max(64);
    let mut w = create(&cfg.out, "support.csv")?;
    writeln!(w, "curve,v1,v2").map_err(io)?;
    write_points(&mut w, "ribbon", &ellipse_points(&model, Shape::Ribbon, n))?;
    if !model.is_degenerate() {
        write_points(&mut w, "twist", &ellipse_points(&model, Shape::Twist, n))?;
    }
    write_points(&mut w, "boundary", &support_boundary(&model, n))?;
    finish(w, "support.csv")?;

    let mut c = create(&cfg.out, "constants.json")?;
    serde_json::to_writer_pretty(&mut c, model.derived())
        .map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(c).map_err(io)?;
    finish(c, "constants.json")
}

/// Run the verification suite; fails with the names of failing reports.
pub fn verify(cfg: &RunConfig, steps_given: bool) -> Result<(), CliError> {
    let model = cfg.model()?;
    let state = cfg.initial_state()?;
    let mut suite = SuiteConfig {
        seed: cfg.seed,
        bins: cfg.bins,
        xi_list: cfg.xi.clone(),
        tolerance_overrides: cfg.tolerance.clone(),
        ..SuiteConfig::default()
    };
    if steps_given {
        suite.weak_limit_times = cfg.steps.iter().copied().filter(|&t| t > 0).collect();
        suite.char_steps = cfg.last_step().max(1);
        if suite.weak_limit_times.is_empty() {
            return Err(CliError::Config("verify needs a positive time in steps".into()));
        }
    }
    let reports = verify::run_suite(&model, &state, &suite, cfg.checks.as_deref())?;
    let mut w = create(&cfg.out, "reports.jsonl")?;
    verify::write_json_lines(&reports, &mut w)?;
    finish(w, "reports.jsonl")?;
    print!("{}", verify::summary_table(&reports));
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name.clone())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed))
    }
}

/// Empirical, spectral and density characteristic functions at the last time.
pub fn chars(cfg: &RunConfig) -> Result<(), CliError> {
    let model = cfg.model()?;
    let state0 = cfg.initial_state()?;
    let t = cfg.last_step();
    let spectrum = fourier_initial(&state0);
    let dist = state0.evolve(&model, t).position_distribution();
    let quad = DensityQuadrature::new(&model, &spectrum, 256, 256)?;
    let mut w = create(&cfg.out, "chars.csv")?;
    writeln!(
        w,
        "xi1,xi2,empirical_re,empirical_im,spectral_re,spectral_im,density_re,density_im"
    )
    .map_err(io)?;
    for &xi in &cfg.xi {
        let e = dist.characteristic_function(t, xi);
        let s = numeric_char_function(&model, &spectrum, xi, 256)?.value;
        let d = quad.char_function(xi);
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            xi[0], xi[1], e.re, e.im, s.re, s.im, d.re, d.im
        )
        .map_err(io)?;
    }
    finish(w, "chars.csv")
}
