//! Run configuration: a flat `key = value` file, overridden key by key from
//! the command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qwalk2d::{CoinParameters, LatticeState, Model, Spinor};

use crate::CliError;

/// Every accepted key with its help text, in the order `--help` lists them.
pub const KEYS: &[(&str, &str)] = &[
    ("a1_sq", "|a₁|², strictly inside (0, 1) [default 0.9]"),
    ("a2_sq", "|a₂|², strictly inside (0, 1) [default 0.1]"),
    ("alpha1", "phase of a₁ in radians [default 0]"),
    ("alpha2", "phase of a₂ in radians [default 0]"),
    ("beta1", "phase of b₁ in radians [default 0]"),
    ("beta2", "phase of b₂ in radians [default 0]"),
    ("delta1", "determinant phase of coin 1 [default 0]"),
    ("delta2", "determinant phase of coin 2 [default 0]"),
    ("psi1_re", "initial spinor, Re of component 1 [default 1]"),
    ("psi1_im", "initial spinor, Im of component 1 [default 0]"),
    ("psi2_re", "initial spinor, Re of component 2 [default 0]"),
    ("psi2_im", "initial spinor, Im of component 2 [default 0]"),
    ("steps", "comma-separated ascending times [default 100]"),
    ("grid", "points per axis of the density grid [default 200]"),
    ("bins", "bins per axis for weak-limit comparisons [default 50]"),
    ("out", "output directory, which must exist [default .]"),
    ("seed", "seed of the verification samplers [default 1]"),
    ("checks", "comma-separated subset of verify checks [default all]"),
    ("tolerance", "tolerance overrides, NAME=VALUE[,NAME=VALUE...]"),
    ("xi", "characteristic-function arguments, x1:x2[,x1:x2...] [default 1:0,0:1,1:1]"),
];

/// Largest admissible time; the dense window grows as `(2t + 1)²`.
pub const MAX_STEPS: u64 = 4000;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: CoinParameters,
    pub spinor: Spinor,
    pub steps: Vec<u64>,
    pub grid: usize,
    pub bins: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub checks: Option<Vec<String>>,
    pub tolerance: BTreeMap<String, f64>,
    pub xi: Vec<[f64; 2]>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: CoinParameters::from_squared_moduli(0.9, 0.1),
            spinor: Spinor::from_parts(1.0, 0.0, 0.0, 0.0),
            steps: vec![100],
            grid: 200,
            bins: 50,
            out: PathBuf::from("."),
            seed: 1,
            checks: None,
            tolerance: BTreeMap::new(),
            xi: vec![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
        }
    }
}

fn bad(key: &str, value: &str, why: &str) -> CliError {
    CliError::Config(format!("{key} = {value:?}: {why}"))
}

fn float(key: &str, value: &str) -> Result<f64, CliError> {
    let x: f64 = value.parse().map_err(|_| bad(key, value, "not a number"))?;
    if !x.is_finite() {
        return Err(bad(key, value, "must be finite"));
    }
    Ok(x)
}

fn unsigned<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| bad(key, value, "not a non-negative integer"))
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Parse `key = value` lines. `#` starts a comment; blank lines are ignored.
pub fn parse_file(text: &str, origin: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{}:{}: expected key = value", origin.display(), n + 1))
        })?;
        let key = key.trim().to_owned();
        if let Some(prev) = seen.insert(key.clone(), n + 1) {
            return Err(CliError::Config(format!(
                "{}:{}: key {key} already set on line {prev}",
                origin.display(),
                n + 1
            )));
        }
        out.push((key, value.trim().to_owned()));
    }
    Ok(out)
}

impl RunConfig {
    /// Apply `(key, value)` pairs in order; later pairs win. Unknown keys are
    /// errors.
    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<(), CliError> {
        for (key, value) in pairs {
            self.set(key, value)?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let p = &mut self.params;
        match key {
            "a1_sq" | "a2_sq" => {
                let x = float(key, value)?;
                if !(x > 0.0 && x < 1.0) {
                    return Err(bad(key, value, "must lie strictly inside (0, 1)"));
                }
                p.modulus_a[usize::from(key == "a2_sq")] = x.sqrt();
            }
            "alpha1" => p.alpha[0] = float(key, value)?,
            "alpha2" => p.alpha[1] = float(key, value)?,
            "beta1" => p.beta[0] = float(key, value)?,
            "beta2" => p.beta[1] = float(key, value)?,
            "delta1" => p.delta[0] = float(key, value)?,
            "delta2" => p.delta[1] = float(key, value)?,
            "psi1_re" => self.spinor.c1.re = float(key, value)?,
            "psi1_im" => self.spinor.c1.im = float(key, value)?,
            "psi2_re" => self.spinor.c2.re = float(key, value)?,
            "psi2_im" => self.spinor.c2.im = float(key, value)?,
            "steps" => {
                let steps = list(value)
                    .map(|s| unsigned::<u64>(key, s))
                    .collect::<Result<Vec<_>, _>>()?;
                if steps.is_empty() {
                    return Err(bad(key, value, "needs at least one time"));
                }
                if steps.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(bad(key, value, "times must be strictly increasing"));
                }
                if steps.iter().any(|&t| t > MAX_STEPS) {
                    return Err(bad(key, value, &format!("times are capped at {MAX_STEPS}")));
                }
                self.steps = steps;
            }
            "grid" | "bins" => {
                let n: usize = unsigned(key, value)?;
                if n == 0 || n > 4096 {
                    return Err(bad(key, value, "must lie in 1..=4096"));
                }
                if key == "grid" {
                    self.grid = n;
                } else {
                    self.bins = n;
                }
            }
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = unsigned(key, value)?,
            "checks" => {
                let names: Vec<String> = list(value).map(str::to_owned).collect();
                if let Some(n) = names
                    .iter()
                    .find(|n| !qwalk2d::verify::CHECK_NAMES.contains(&n.as_str()))
                {
                    return Err(bad(
                        key,
                        value,
                        &format!(
                            "unknown check {n:?}; known: {}",
                            qwalk2d::verify::CHECK_NAMES.join(", ")
                        ),
                    ));
                }
                self.checks = Some(names);
            }
            "tolerance" => {
                for item in list(value) {
                    let (name, tol) = item
                        .split_once('=')
                        .ok_or_else(|| bad(key, value, "expected NAME=VALUE"))?;
                    let tol = float(key, tol.trim())?;
                    if tol < 0.0 {
                        return Err(bad(key, value, "tolerances must be non-negative"));
                    }
                    self.tolerance.insert(name.trim().to_owned(), tol);
                }
            }
            "xi" => {
                let mut xi = Vec::new();
                for item in list(value) {
                    let (x1, x2) = item
                        .split_once(':')
                        .ok_or_else(|| bad(key, value, "expected x1:x2"))?;
                    let pair = [float(key, x1.trim())?, float(key, x2.trim())?];
                    if pair.iter().any(|x| x.abs() > 3.0) {
                        return Err(bad(key, value, "entries must satisfy |ξ| ≤ 3"));
                    }
                    xi.push(pair);
                }
                if xi.is_empty() {
                    return Err(bad(key, value, "needs at least one argument"));
                }
                self.xi = xi;
            }
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key {key:?}; known keys: {}",
                    KEYS.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Model, CliError> {
        Model::new(self.params).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn initial_state(&self) -> Result<LatticeState, CliError> {
        LatticeState::delta(self.spinor).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn last_step(&self) -> u64 {
        *self.steps.last().expect("steps is never empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(text: &str) -> Vec<(String, String)> {
        parse_file(text, Path::new("test.cfg")).unwrap()
    }

    #[test]
    fn file_parsing() {
        let p = pairs("# comment\na1_sq = 0.5   # trailing\n\n steps=1, 2 ,3\n");
        assert_eq!(p.len(), 2);
        let mut cfg = RunConfig::default();
        cfg.apply(&p).unwrap();
        assert_eq!(cfg.steps, vec![1, 2, 3]);
        assert!((cfg.params.modulus_a[0] - 0.5f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_input() {
        let mut cfg = RunConfig::default();
        for (k, v) in [
            ("colour", "red"),
            ("a1_sq", "1"),
            ("a2_sq", "nan"),
            ("grid", "0"),
            ("steps", "3,2"),
            ("steps", "99999"),
            ("checks", "nope"),
            ("tolerance", "roundtrip"),
            ("xi", "4:0"),
        ] {
            assert!(cfg.apply(&[(k.into(), v.into())]).is_err(), "{k} = {v}");
        }
        assert!(parse_file("a1_sq = 0.5\na1_sq = 0.6\n", Path::new("x")).is_err());
        assert!(parse_file("just words\n", Path::new("x")).is_err());
    }

    #[test]
    fn later_pairs_win() {
        let mut cfg = RunConfig::default();
        cfg.apply(&pairs("seed = 4\n")).unwrap();
        cfg.apply(&[("seed".into(), "9".into())]).unwrap();
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn tolerance_and_xi_lists() {
        let mut cfg = RunConfig::default();
        cfg.apply(&pairs("tolerance = roundtrip=0, unitarity=1e-3\nxi = 0.5:-1, 2:2\n"))
            .unwrap();
        assert_eq!(cfg.tolerance["roundtrip"], 0.0);
        assert_eq!(cfg.tolerance["unitarity"], 1e-3);
        assert_eq!(cfg.xi, vec![[0.5, -1.0], [2.0, 2.0]]);
    }
}
