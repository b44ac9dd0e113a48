use std::fs::File;
use std::io::{BufReader, BufWriter};

use qwalk2d::verify::{self, ComparisonReport, SuiteConfig};
use qwalk2d::{LatticeState, Model, Spinor};

fn up() -> LatticeState {
    LatticeState::delta(Spinor::from_parts(1.0, 0.0, 0.0, 0.0)).unwrap()
}

#[test]
fn amplitude_dump_round_trips_through_a_file() {
    let m = Model::reference();
    let state = up().evolve(&m, 7);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.bin");
    state.write_amplitudes(BufWriter::new(File::create(&path).unwrap())).unwrap();
    let back = LatticeState::read_amplitudes(BufReader::new(File::open(&path).unwrap()), 7).unwrap();
    assert_eq!(back, state);
}

#[test]
fn truncated_dump_is_rejected() {
    let state = up().evolve(&Model::reference(), 2);
    let mut bytes = Vec::new();
    state.write_amplitudes(&mut bytes).unwrap();
    bytes.truncate(bytes.len() - 3);
    assert!(LatticeState::read_amplitudes(&bytes[..], 2).is_err());
}

#[test]
fn distribution_csv_has_every_site() {
    let dist = up().evolve(&Model::reference(), 3).position_distribution();
    let mut out = Vec::new();
    dist.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,probability"));
    let total: f64 = lines
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-14);
    assert_eq!(text.lines().count(), 1 + 7 * 7);
}

#[test]
fn suite_subset_emits_parsable_json_lines() {
    let cfg = SuiteConfig {
        roundtrip_samples: 500,
        preimage_samples: 50,
        jacobian_samples: 200,
        ..SuiteConfig::default()
    };
    let subset: Vec<String> = ["jacobian", "roundtrip", "preimages"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let reports = verify::run_suite(&Model::reference(), &up(), &cfg, Some(&subset)).unwrap();
    assert!(reports.iter().all(|r| r.passed), "{reports:?}");
    let mut out = Vec::new();
    verify::write_json_lines(&reports, &mut out).unwrap();
    for line in String::from_utf8(out).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["seed"], cfg.seed);
        assert!(v["metric"].is_number());
    }
}

#[test]
fn degenerate_model_reports_eight_preimages() {
    let m = Model::from_squared_moduli(0.5, 0.5).unwrap();
    let r = verify::check_preimage_count(&m, 100, 5);
    assert!(r.passed, "{r:?}");
    assert_eq!(r.details["expected"], 8);
}

#[test]
fn tabulated_weights_are_reported_softly() {
    let r = verify::check_density_tables(&Model::reference(), &up(), 50, 9);
    assert!(r.passed);
    assert_eq!(r.details["soft"], true);
}

#[test]
fn degenerate_check_rejects_generic_model() {
    assert!(verify::check_degenerate(&Model::reference(), 50).is_err());
}

#[test]
fn weak_limit_rejects_bad_times() {
    let m = Model::reference();
    assert!(verify::check_weak_limit_series(&m, &up(), &[10, 5], 10).is_err());
    assert!(verify::check_weak_limit_series(&m, &up(), &[], 10).is_err());
    assert!(verify::check_char_function(&m, &up(), 5, &[[4.0, 0.0]]).is_err());
}

#[test]
fn overridden_tolerance_flips_the_verdict() {
    let mut r = ComparisonReport::new("x", 1e-3, 1e-2);
    assert!(r.passed);
    r.set_tolerance(0.0);
    assert!(!r.passed);
}
