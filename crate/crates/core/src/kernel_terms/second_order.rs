use std::f64::consts::PI;

use super::stable::bracket_g;
use super::{kernel_y, Momentum2, SchwingerFrame, TermReport};
use crate::geometry::SpinParameter;
use crate::oracle::gauss_kronrod::{integrate, Tolerance};
use crate::oracle::{integrate_plane, QuadratureResult, QuadratureSpec};
use crate::{Error, Result};

const MAX_SEGMENTS: usize = 200;

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// J0 + J1 + J2 = −π (p1² − p2²) p̄² e^{−zp̄²} F(zp̄²).
///
/// The published expression carries the opposite overall sign; it is kept
/// as [`j_sum_printed`].
pub fn j_sum_closed(p: Momentum2, z: f64) -> Result<f64> {
    require_positive("z", z)?;
    let big_p = p.big_p();
    require_positive("p̄²", big_p)?;
    Ok(-PI * (p.p1 * p.p1 - p.p2 * p.p2) * big_p * bracket_g(z * big_p))
}

/// The J-sum exactly as published, (π/a)(p1² − p2²)e^{−zp̄²}{…}, a = z²p̄².
pub fn j_sum_printed(p: Momentum2, z: f64) -> Result<f64> {
    Ok(-j_sum_closed(p, z)?)
}

/// e^{−cp̄²}(J0 + J1 + J2) with c = t − z; only e^{−cp̄²} and e^{−zp̄²}
/// are ever evaluated.
pub fn j_sum_damped(p: Momentum2, frame: &SchwingerFrame) -> Result<f64> {
    frame.require(2)?;
    let big_p = p.big_p();
    let (z, c) = (frame.z(), frame.c());
    Ok(-PI * (p.p1 * p.p1 - p.p2 * p.p2) * big_p * (-c * big_p).exp() * bracket_g(z * big_p))
}

/// J0, J1, J2 by direct quadrature over the intermediate momentum.
#[derive(Clone, Debug, PartialEq)]
pub struct JIntegrals {
    pub j: [f64; 3],
    pub errors: [f64; 3],
    pub converged: bool,
    pub evaluations: u64,
}

impl JIntegrals {
    pub fn sum(&self) -> f64 {
        self.j.iter().sum()
    }
}

fn j_spec(p: Momentum2, z: f64, tol: f64) -> QuadratureSpec {
    QuadratureSpec::new(2, z)
        .with_singular_points(&[p.as_array()])
        .with_tolerances(tol, 1e-3 * tol * p.big_p().max(1e-12))
}

/// Integrand of J0 + J1 + J2 at r.
fn j_sum_integrand(p: [f64; 2], z: f64, r: [f64; 2]) -> f64 {
    let y = kernel_y(p, r);
    (-2.0 * (r[0] + p[0]) * y + 4.0 * y * y) * (-z * (r[0] * r[0] + r[1] * r[1])).exp()
}

/// J0 = −2∫r1 Y, J1 = −2∫p1 Y, J2 = 4∫Y², each with e^{−zr²},
/// Y = (p2 − r2)(p2 r1 − p1 r2)/|p − r|², by polar quadrature centred on p.
pub fn j_oracle(p: Momentum2, z: f64, tol: f64) -> Result<JIntegrals> {
    require_positive("z", z)?;
    require_positive("p̄²", p.big_p())?;
    let spec = j_spec(p, z, tol);
    let pa = p.as_array();
    let damp = |r: [f64; 2]| (-z * (r[0] * r[0] + r[1] * r[1])).exp();
    let parts: [Box<dyn Fn([f64; 2]) -> f64>; 3] = [
        Box::new(|r| -2.0 * r[0] * kernel_y(pa, r) * damp(r)),
        Box::new(|r| -2.0 * pa[0] * kernel_y(pa, r) * damp(r)),
        Box::new(|r| 4.0 * kernel_y(pa, r).powi(2) * damp(r)),
    ];
    let mut out = JIntegrals {
        j: [0.0; 3],
        errors: [0.0; 3],
        converged: true,
        evaluations: 0,
    };
    for (i, f) in parts.iter().enumerate() {
        let res = integrate_plane(f, &spec)?;
        out.j[i] = res.value;
        out.errors[i] = res.error_estimate;
        out.converged &= res.converged;
        out.evaluations += res.evaluations;
    }
    Ok(out)
}

fn j_sum_quadrature(p: Momentum2, z: f64, tol: f64) -> Result<QuadratureResult> {
    let pa = p.as_array();
    integrate_plane(|r| j_sum_integrand(pa, z, r), &j_spec(p, z, tol))
}

/// Ledger row: closed J-sum against one quadrature of the summed integrand.
pub fn j_sum_oracle(p: Momentum2, z: f64, tol: f64) -> Result<TermReport> {
    let closed = j_sum_closed(p, z)?;
    let res = j_sum_quadrature(p, z, tol)?;
    Ok(TermReport::new(
        "J_sum",
        &[("p1", p.p1), ("p2", p.p2), ("z", z)],
        closed,
        res.value,
        res.error_estimate,
        res.converged,
    ))
}

/// The order-λ² diagonal kernel correction with its quadrature error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondOrder {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// D₂(p, t) = t²(λ/4π)² ∫₀¹u du ∫₀¹du1 e^{−cp̄²}(J0 + J1 + J2)(z).
///
/// The integrand depends on (u, u1) only through z = ut(1 − u1), which
/// reduces the double integral to (1/t)∫₀ᵗ dz (1 − z/t) e^{−(t−z)p̄²}G(zp̄²)
/// with G(s) = e^{−s}F(s). The factor (p1² − p2²) is applied last, so the
/// result is exactly antisymmetric under p1 ↔ p2.
pub fn second_order_coefficient(
    p: Momentum2,
    t: f64,
    sp: SpinParameter,
    tol: f64,
) -> Result<SecondOrder> {
    require_positive("t", t)?;
    require_positive("tol", tol)?;
    let big_p = p.big_p();
    let (h, err, ok) = reduced_parameter_integral(t, big_p, tol);
    let a = sp.lambda() / (4.0 * PI);
    let pref = t * t * (a * a) * (-PI) * big_p;
    let anti = p.p1 * p.p1 - p.p2 * p.p2;
    Ok(SecondOrder {
        value: pref * h * anti,
        error: (pref * err * anti).abs(),
        converged: ok,
    })
}

/// ∫₀¹u du ∫₀¹du1 e^{−cP}G(zP), via its one-dimensional reduction.
pub(crate) fn reduced_parameter_integral(t: f64, big_p: f64, tol: f64) -> (f64, f64, bool) {
    let r = integrate(
        |z| {
            let v = (1.0 - z / t) * (-(t - z) * big_p).exp() * bracket_g(z * big_p) / t;
            (v, 0.0)
        },
        0.0,
        t,
        2,
        Tolerance::new(tol, 1e-300),
        MAX_SEGMENTS,
    );
    (r.value, r.error, r.converged)
}

/// The published second-order correction, opposite in sign to
/// [`second_order_coefficient`].
pub fn second_order_printed(p: Momentum2, t: f64, sp: SpinParameter, tol: f64) -> Result<SecondOrder> {
    let mut d = second_order_coefficient(p, t, sp, tol)?;
    d.value = -d.value;
    Ok(d)
}

/// Fully nested brute force of the second-order term: Gauss–Kronrod over
/// (u, u1) with the J-sum integrated over the plane at every node. Plane
/// errors are propagated into the outer estimate.
pub fn second_order_nested_oracle(
    p: Momentum2,
    t: f64,
    sp: SpinParameter,
    tol: f64,
) -> Result<TermReport> {
    let closed = second_order_coefficient(p, t, sp, 0.01 * tol)?;
    let big_p = p.big_p();
    require_positive("p̄²", big_p)?;
    let inner_tol = 0.1 * tol;
    let mut failure = None;
    let mut plane = |u: f64, u1: f64| -> (f64, f64) {
        let z = u * t * (1.0 - u1);
        if !(z > 0.0) {
            return (0.0, 0.0);
        }
        let c = t - z;
        match j_sum_quadrature(p, z, inner_tol) {
            Ok(res) => {
                let w = u * (-c * big_p).exp();
                (w * res.value, w * res.error_estimate)
            }
            Err(e) => {
                failure = Some(e);
                (0.0, f64::INFINITY)
            }
        }
    };
    let scale = 1e-3 * tol * big_p;
    let outer = integrate(
        |u| {
            let inner = integrate(
                |u1| plane(u, u1),
                0.0,
                1.0,
                1,
                Tolerance::new(0.3 * tol, scale),
                MAX_SEGMENTS,
            );
            (inner.value, inner.error)
        },
        0.0,
        1.0,
        1,
        Tolerance::new(0.5 * tol, scale),
        MAX_SEGMENTS,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let a = sp.lambda() / (4.0 * PI);
    let pref = t * t * (a * a);
    Ok(TermReport::new(
        "D2",
        &[("p1", p.p1), ("p2", p.p2), ("t", t), ("lambda", sp.lambda())],
        closed.value,
        pref * outer.value,
        (pref * outer.error).abs(),
        outer.converged && closed.converged,
    ))
}
