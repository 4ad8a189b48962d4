use std::cell::Cell;
use std::f64::consts::TAU;

use super::gauss_kronrod::{integrate_until, Tolerance};
use super::{Method, QuadratureResult, QuadratureSpec};

const MAX_RADIAL_SEGMENTS: usize = 600;
const MAX_ANGULAR_SEGMENTS: usize = 600;

/// C∞ step from 1 on `[0, 1/2]` down to 0 on `[1, ∞)`.
fn bump(t: f64) -> f64 {
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let h = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let tau = 2.0 * (t - 0.5);
    let a = h(1.0 - tau);
    a / (a + h(tau))
}

struct Chart {
    centre: [f64; 2],
    radius: f64,
}

/// Integrates `f` over the plane.
///
/// With zero or one declared singular point a single polar chart is used,
/// centred on that point (or the origin). With several points each gets a
/// polar disc of radius `min(1, d/2)`, `d` the distance to the nearest other
/// point, and the discs are blended with a far-field chart through a smooth
/// partition of unity, so the far field never sees a singular point.
pub fn integrate_plane<F>(f: F, spec: &QuadratureSpec) -> crate::Result<QuadratureResult>
where
    F: Fn([f64; 2]) -> f64,
{
    integrate_plane_with_errors(|v| (f(v), 0.0), spec)
}

/// As [`integrate_plane`], for integrands that are themselves quadratures
/// and return `(value, error)`; inner errors are propagated.
pub fn integrate_plane_with_errors<F>(f: F, spec: &QuadratureSpec) -> crate::Result<QuadratureResult>
where
    F: Fn([f64; 2]) -> (f64, f64),
{
    spec.validate()?;
    let r_tail = spec.truncation_radius();
    let pts = &spec.singular_points;
    let tol = spec.tolerance();
    let evals = Cell::new(0u64);
    let budget = spec.max_evals;

    if pts.len() <= 1 {
        let centre = pts.first().copied().unwrap_or([0.0, 0.0]);
        let radius = centre[0].hypot(centre[1]) + r_tail;
        let (value, error, ok) = polar(&f, &Chart { centre, radius }, tol, radius, spec.initial_segments, &evals, budget);
        let res = QuadratureResult {
            value,
            error_estimate: error,
            evaluations: evals.get(),
            converged: ok,
            method: Method::Polar,
            radius: Some(radius),
        };
        return Ok(res.finish(spec));
    }

    let charts: Vec<Chart> = pts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let nearest = pts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, o)| (c[0] - o[0]).hypot(c[1] - o[1]))
                .fold(f64::INFINITY, f64::min);
            Chart {
                centre: *c,
                radius: (0.5 * nearest).min(1.0),
            }
        })
        .collect();
    if charts.iter().any(|c| !(c.radius > 0.0)) {
        return Err(crate::Error::Domain("coincident singular points".into()));
    }
    let weight = |v: [f64; 2], c: &Chart| {
        bump((v[0] - c.centre[0]).hypot(v[1] - c.centre[1]) / c.radius)
    };

    let far_radius = pts
        .iter()
        .map(|c| c[0].hypot(c[1]))
        .fold(0.0, f64::max)
        + r_tail;
    let n = charts.len() as f64 + 1.0;
    let share = Tolerance::new(tol.rel, tol.abs / n);
    let mut value = 0.0;
    let mut error = 0.0;
    let mut ok = true;
    for c in &charts {
        let g = |v: [f64; 2]| {
            let w = weight(v, c);
            if w == 0.0 {
                return (0.0, 0.0);
            }
            let (a, e) = f(v);
            (a * w, e * w)
        };
        let (v, e, k) = polar(&g, c, share, far_radius, spec.initial_segments, &evals, budget);
        value += v;
        error += e;
        ok &= k;
    }
    let far = |v: [f64; 2]| {
        let w: f64 = charts.iter().map(|c| weight(v, c)).sum();
        if w >= 1.0 {
            (0.0, 0.0)
        } else {
            let (a, e) = f(v);
            (a * (1.0 - w), e * (1.0 - w))
        }
    };
    let chart = Chart {
        centre: [0.0, 0.0],
        radius: far_radius,
    };
    let (v, e, k) = polar(&far, &chart, share, far_radius, spec.initial_segments, &evals, budget);
    value += v;
    error += e;
    ok &= k;

    let res = QuadratureResult {
        value,
        error_estimate: error,
        evaluations: evals.get(),
        converged: ok,
        method: Method::Polar,
        radius: Some(far_radius),
    };
    Ok(res.finish(spec))
}

/// Radial-outer, angular-inner Gauss–Kronrod over one polar chart.
fn polar<F>(
    f: &F,
    chart: &Chart,
    tol: Tolerance,
    scale: f64,
    initial: usize,
    evals: &Cell<u64>,
    budget: u64,
) -> (f64, f64, bool)
where
    F: Fn([f64; 2]) -> (f64, f64),
{
    let inner_tol = Tolerance::new(0.1 * tol.rel, 0.2 * tol.abs / (scale * scale));
    let [cx, cy] = chart.centre;
    let spent = || evals.get() >= budget;
    let radial = integrate_until(
        |rho| {
            let ang = integrate_until(
                |th: f64| {
                    let (s, c) = th.sin_cos();
                    f([cx + rho * c, cy + rho * s])
                },
                0.0,
                TAU,
                initial,
                inner_tol,
                MAX_ANGULAR_SEGMENTS,
                spent,
            );
            evals.set(evals.get() + ang.evaluations);
            (rho * ang.value, rho * ang.error)
        },
        0.0,
        chart.radius,
        initial,
        tol,
        MAX_RADIAL_SEGMENTS,
        spent,
    );
    (radial.value, radial.error, radial.converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bump_is_a_partition_step() {
        assert_eq!(bump(0.2), 1.0);
        assert_eq!(bump(1.3), 0.0);
        assert!((bump(0.75) - 0.5).abs() < 1e-15);
        let mut last = 1.0;
        for i in 0..=100 {
            let b = bump(0.5 + 0.005 * i as f64);
            assert!(b <= last);
            last = b;
        }
    }

    #[test]
    fn gaussian_is_pi() {
        let spec = QuadratureSpec::new(2, 1.0).with_tolerances(1e-12, 1e-14);
        let r = integrate_plane(|v| (-(v[0] * v[0] + v[1] * v[1])).exp(), &spec).unwrap();
        assert!(r.converged);
        assert!((r.value - PI).abs() < 1e-10, "{}", r.value);
        assert!(r.radius.unwrap() > 5.0);
    }

    #[test]
    fn quadrupole_vanishes() {
        let spec = QuadratureSpec::new(2, 1.0).with_tolerances(1e-10, 1e-12);
        let r = integrate_plane(
            |v| (v[1] * v[1] - v[0] * v[0]) * (-(v[0] * v[0] + v[1] * v[1])).exp(),
            &spec,
        )
        .unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn off_centre_gaussian_with_partition() {
        // Two declared points force the partition-of-unity path.
        let spec = QuadratureSpec::new(2, 1.0)
            .with_singular_points(&[[1.0, 0.0], [0.0, 0.7]])
            .with_tolerances(1e-11, 1e-13);
        let g = |v: [f64; 2]| (-((v[0] - 0.3).powi(2) + v[1] * v[1])).exp() * (1.0 + v[0]);
        let r = integrate_plane(g, &spec).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.3 * PI).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn protected_singularity_terminates() {
        // (v - p)_1^2 / |v - p|^2 is bounded but direction dependent at p.
        let p = [1.0, 0.0];
        let spec = QuadratureSpec::new(2, 1.0)
            .with_singular_points(&[p])
            .with_tolerances(1e-10, 1e-13);
        let r = integrate_plane(
            |v| {
                let d = [v[0] - p[0], v[1] - p[1]];
                let q = d[0] * d[0] + d[1] * d[1];
                if q == 0.0 {
                    return 0.0;
                }
                (d[0] * d[0] - d[1] * d[1]) / q * (-(v[0] * v[0] + v[1] * v[1])).exp()
            },
            &spec,
        )
        .unwrap();
        assert!(r.converged);
        assert!(r.evaluations < 5_000_000);
    }
}
