//! Overflow- and cancellation-safe evaluation of the removable 0/0 brackets.

use crate::{Error, Result};

/// Below this |s| the brackets are summed from their Taylor series.
pub const SERIES_SWITCH: f64 = 0.1;
const SERIES_TERMS: usize = 16;
const OVERFLOW_GUARD: f64 = 700.0;

/// Σ_{k<n} c_k s^k with c_0 = first and c_{k+1}/c_k = ratio(k).
fn series(s: f64, first: f64, ratio: impl Fn(usize) -> f64) -> f64 {
    let mut term = first;
    let mut sum = first;
    for k in 0..SERIES_TERMS - 1 {
        term *= s * ratio(k);
        sum += term;
    }
    sum
}

/// F(s) = [(1 + e^s) − (2/s)(e^s − 1)] / s² = Σ (k+1)/(k+3)! s^k, F(0) = 1/6.
pub fn bracket_f(s: f64) -> Result<f64> {
    if s > OVERFLOW_GUARD {
        return Err(Error::Overflow(s));
    }
    if !s.is_finite() {
        return Err(Error::Domain(format!("bracket argument {s}")));
    }
    Ok(if s.abs() < SERIES_SWITCH {
        bracket_f_series(s)
    } else {
        bracket_f_direct(s)
    })
}

pub fn bracket_f_series(s: f64) -> f64 {
    // c_{k+1}/c_k = (k+2) / ((k+1)(k+4))
    series(s, 1.0 / 6.0, |k| (k as f64 + 2.0) / ((k as f64 + 1.0) * (k as f64 + 4.0)))
}

pub fn bracket_f_direct(s: f64) -> f64 {
    let e = s.exp();
    ((1.0 + e) - 2.0 * (e - 1.0) / s) / (s * s)
}

/// e^{−s}·F(s) = [(s − 2) + (s + 2)e^{−s}] / s³ for s ≥ 0; never overflows.
pub fn bracket_g(s: f64) -> f64 {
    debug_assert!(s >= 0.0);
    if s < SERIES_SWITCH {
        (-s).exp() * bracket_f_series(s)
    } else {
        ((s - 2.0) + (s + 2.0) * (-s).exp()) / (s * s * s)
    }
}

/// (1 − e^{−s}) / s, with value 1 at s = 0.
pub fn one_minus_exp_ratio(s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        -(-s).exp_m1() / s
    }
}

/// ∫₀¹ y e^{−ys} dy = (1 − (1 + s)e^{−s}) / s² = Σ (−s)^k / (k!(k+2)).
pub fn exp_moment1(s: f64) -> f64 {
    if s.abs() < 0.5 {
        series(s, 0.5, |k| -(k as f64 + 2.0) / ((k as f64 + 1.0) * (k as f64 + 3.0)))
    } else {
        (1.0 - (1.0 + s) * (-s).exp()) / (s * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn known_values() {
        assert!((bracket_f(0.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((bracket_f(1.0).unwrap() - (3.0 - E)).abs() < 1e-14);
        assert!((bracket_f(-1.0).unwrap() - (3.0 / E - 1.0)).abs() < 1e-14);
        assert!(bracket_f(701.0).is_err());
        assert!(bracket_f(650.0).unwrap().is_finite());
    }

    #[test]
    fn branches_meet() {
        for i in 0..=40 {
            let s = SERIES_SWITCH * (0.5 + 1.5 * i as f64 / 40.0);
            for s in [s, -s] {
                let a = bracket_f_series(s);
                let b = bracket_f_direct(s);
                assert!((a - b).abs() <= 1e-10 * b.abs(), "s={s} {a} {b}");
            }
        }
    }

    #[test]
    fn damped_bracket() {
        for s in [0.0, 0.05, 0.1, 1.0, 10.0, 1e3, 1e6] {
            let g = bracket_g(s);
            assert!(g.is_finite() && g >= 0.0);
            if s < 500.0 {
                let f = bracket_f(s).unwrap();
                assert!((g - (-s).exp() * f).abs() <= 1e-11 * g.max(1e-300), "{s}");
            }
        }
    }

    #[test]
    fn moment_branches_meet() {
        for s in [0.49f64, 0.51, 1.0, 3.0] {
            let d = (1.0 - (1.0 + s) * (-s).exp()) / (s * s);
            assert!((exp_moment1(s) - d).abs() < 1e-13);
        }
        assert_eq!(exp_moment1(0.0), 0.5);
        assert!(one_minus_exp_ratio(1e-20) == 1.0);
    }
}
