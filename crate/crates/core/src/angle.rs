//! Canonical angle reduction. Every angle the crate stores or returns goes
//! through [`reduce`].

use std::f64::consts::{PI, TAU};

/// Reduce `x` to the half-open interval `[−π, π)`.
pub fn reduce(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn distance(x: f64, y: f64) -> f64 {
    reduce(x - y).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_is_half_open() {
        assert_eq!(reduce(PI), -PI);
        assert_eq!(reduce(-PI), -PI);
        assert!((reduce(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(reduce(0.25), 0.25);
        for x in [-1e-18, -7.0 * PI, 9.5, -1e6] {
            let r = reduce(x);
            assert!((-PI..PI).contains(&r), "{x} -> {r}");
        }
    }

    #[test]
    fn distance_wraps() {
        assert!(distance(PI - 1e-3, -PI + 1e-3) < 2.1e-3);
        assert!((distance(0.0, PI) - PI).abs() < 1e-15);
    }
}
