use std::f64::consts::PI;

use super::{brace, dist2, Momentum2, TermReport};
use crate::geometry::SpinParameter;
use crate::oracle::{integrate_plane, regulator_limit, QuadratureSpec};
use crate::{Error, Result};

const COINCIDENCE: f64 = 1e-24;
const EPS_STEPS: i32 = 7;

/// ⟨p|H_I|r⟩ = −(λ/4π){r1 − 2(p2 − r2)(p2 r1 − p1 r2)/|p − r|²}.
///
/// The element ⟨r|H_I|p⟩ is `matrix_element(r, p, sp)`.
pub fn matrix_element(p: Momentum2, r: Momentum2, sp: SpinParameter) -> Result<f64> {
    let (a, b) = (p.as_array(), r.as_array());
    let d = dist2(a, b);
    if d <= COINCIDENCE * p.big_p().max(r.big_p()).max(1.0) {
        return Err(Error::Coincidence(d));
    }
    Ok(-(sp.lambda() / (4.0 * PI)) * brace(a, b))
}

/// ⟨p|H_I|p⟩ vanishes by angular symmetry of its defining integral.
pub fn matrix_element_diag(_p: Momentum2, _sp: SpinParameter) -> f64 {
    0.0
}

/// ε_k = ε₀·2^{−k}, k = 0..6, with ε₀ = 0.025|p − r|² (0.025 when p = r).
pub fn default_eps_schedule(p: Momentum2, r: Momentum2) -> Vec<f64> {
    let k2 = dist2(p.as_array(), r.as_array());
    let eps0 = if k2 > 0.0 { 0.025 * k2 } else { 0.025 };
    (0..EPS_STEPS).map(|k| eps0 * 0.5f64.powi(k)).collect()
}

/// Regulated values and fit behind one Fourier-oracle row.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierOracle {
    pub report: TermReport,
    pub values: Vec<(f64, f64)>,
    pub evaluations: u64,
}

/// Evaluates the defining integral of ⟨p|H_I|r⟩,
///
/// −λ ∫ d²q/(2π)² cos((p − r)·q) [(q2² − q1²) r1 − 2 q1 q2 r2] / q⁴ · e^{−εq²},
///
/// for each ε of the schedule, extrapolates ε → 0 and compares with the
/// closed form (0 when p = r). `tol` is the relative target for the fit.
pub fn fourier_oracle(
    p: Momentum2,
    r: Momentum2,
    sp: SpinParameter,
    eps_schedule: &[f64],
    tol: f64,
) -> Result<FourierOracle> {
    if eps_schedule.len() < 3
        || eps_schedule.iter().any(|e| !(*e > 0.0))
        || eps_schedule.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(Error::Domain("ε schedule must be positive and strictly decreasing".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let lam = sp.lambda();
    let k = [p.p1 - r.p1, p.p2 - r.p2];
    let coincident = k == [0.0, 0.0];
    let closed = if coincident {
        matrix_element_diag(p, sp)
    } else {
        matrix_element(p, r, sp)?
    };
    let scale = (lam * r.big_p().sqrt() / (4.0 * PI)).max(1e-290);
    let norm = -lam / (4.0 * PI * PI);

    let mut values = Vec::with_capacity(eps_schedule.len());
    let mut quad_err = 0.0f64;
    let mut all_converged = true;
    let mut evaluations = 0;
    for &eps in eps_schedule {
        let spec = QuadratureSpec::new(2, eps)
            .with_singular_points(&[[0.0, 0.0]])
            .with_tolerances(0.01 * tol, 0.01 * tol * scale);
        let f = |q: [f64; 2]| {
            let q2 = q[0] * q[0] + q[1] * q[1];
            let num = (q[1] * q[1] - q[0] * q[0]) * r.p1 - 2.0 * q[0] * q[1] * r.p2;
            norm * (k[0] * q[0] + k[1] * q[1]).cos() * num / (q2 * q2) * (-eps * q2).exp()
        };
        let res = integrate_plane(f, &spec)?;
        quad_err = quad_err.max(res.error_estimate);
        all_converged &= res.converged;
        evaluations += res.evaluations;
        values.push((eps, res.value));
    }
    let fit = regulator_limit(&values)?;
    let fit_ok = fit.residual <= tol * fit.limit.abs().max(0.01 * scale);
    let report = TermReport::new(
        if coincident { "H_diag" } else { "H_pr" },
        &[
            ("p1", p.p1),
            ("p2", p.p2),
            ("r1", r.p1),
            ("r2", r.p2),
            ("lambda", lam),
            ("eps0", eps_schedule[0]),
            ("fit_residual", fit.residual),
        ],
        closed,
        fit.limit,
        fit.residual + quad_err,
        all_converged && fit_ok,
    );
    Ok(FourierOracle {
        report,
        values,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(l: f64) -> SpinParameter {
        SpinParameter::new(l).unwrap()
    }

    #[test]
    fn anchored_elements() {
        let v = matrix_element(Momentum2::new(1.0, 0.0), Momentum2::new(0.0, 1.0), sp(4.0 * PI)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let v = matrix_element(Momentum2::new(0.0, 1.0), Momentum2::new(0.0, 2.0), sp(4.0 * PI)).unwrap();
        assert_eq!(v, 0.0);
        let v = matrix_element(Momentum2::new(0.3, 1.0), Momentum2::new(-2.0, 0.5), sp(0.0)).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn coincidence_is_an_error() {
        let p = Momentum2::new(1.0, 2.0);
        assert!(matches!(matrix_element(p, p, sp(1.0)), Err(Error::Coincidence(_))));
        assert_eq!(matrix_element_diag(p, sp(5.0)), 0.0);
    }

    #[test]
    fn linear_in_lambda() {
        let (p, r) = (Momentum2::new(0.4, -1.1), Momentum2::new(1.3, 0.2));
        let a = matrix_element(p, r, sp(0.7)).unwrap();
        let b = matrix_element(p, r, sp(1.4)).unwrap();
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn schedule_shape() {
        let s = default_eps_schedule(Momentum2::new(1.0, 0.0), Momentum2::new(0.0, 1.0));
        assert_eq!(s.len(), 7);
        assert!((s[0] - 0.05).abs() < 1e-16);
        assert!((s[6] - 0.05 / 64.0).abs() < 1e-17);
    }

    #[test]
    fn flat_oracle_is_exactly_zero() {
        let (p, r) = (Momentum2::new(1.0, 0.0), Momentum2::new(0.0, 1.0));
        let o = fourier_oracle(p, r, sp(0.0), &default_eps_schedule(p, r), 1e-4).unwrap();
        assert!(o.values.iter().all(|(_, v)| *v == 0.0));
        assert_eq!(o.report.oracle_value, 0.0);
        assert!(o.report.converged);
    }
}
