use std::cell::{Cell, RefCell};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::stable::{exp_moment1, one_minus_exp_ratio};
use super::{brace, dist2, kernel_y, Momentum2, SchwingerFrame, TermReport};
use crate::geometry::SpinParameter;
use crate::oracle::gauss_kronrod::{integrate_semi_infinite, leaf, Tolerance};
use crate::oracle::{
    integrate_nested, integrate_plane, integrate_plane_with_errors, qmc_unit, Bound, Method,
    QuadratureResult, QuadratureSpec,
};
use crate::{Error, Result};

const COINCIDENCE: f64 = 1e-24;
const MAX_SEGMENTS: usize = 200;
const REDUCED_BUDGET: u64 = 2_000_000;
const KERNEL_BUDGET: u64 = 1 << 25;
const PLANE_BUDGET: u64 = 500_000;
const K3_INNER_BUDGET: u64 = 200_000;
const K3_SEGMENTS: usize = 12;
const HALF_PI: f64 = PI / 2.0;
const OUTER_SEGMENTS: usize = 6;
const INNER_SEGMENTS: usize = 4;

/// The non-vanishing pieces of the third-order matrix-element product.
///
/// `Extra` is the r1·p1·(r,q)-kernel cross term, which is not one of the
/// four listed terms but does not integrate to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum KTerm {
    K0,
    K1,
    K2,
    K3,
    Extra,
}

impl KTerm {
    pub const ALL: [KTerm; 5] = [KTerm::K0, KTerm::K1, KTerm::K2, KTerm::K3, KTerm::Extra];

    pub fn id(&self) -> &'static str {
        match self {
            KTerm::K0 => "K0",
            KTerm::K1 => "K1",
            KTerm::K2 => "K2",
            KTerm::K3 => "K3",
            KTerm::Extra => "K_extra",
        }
    }
}

impl fmt::Display for KTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for KTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k0" => Ok(KTerm::K0),
            "k1" => Ok(KTerm::K1),
            "k2" => Ok(KTerm::K2),
            "k3" => Ok(KTerm::K3),
            "extra" | "k_extra" => Ok(KTerm::Extra),
            _ => Err(Error::Domain(format!("unknown kernel term {s:?}"))),
        }
    }
}

/// A one- or two-parameter reduced form together with its quadrature error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedValue {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// (−λ/4π)³
fn cube(sp: SpinParameter) -> f64 {
    let a = -sp.lambda() / (4.0 * PI);
    a * a * a
}

fn positive_xz(frame: &SchwingerFrame) -> Result<(f64, f64)> {
    frame.require(3)?;
    let (x, z) = (frame.x(), frame.z());
    if x > 0.0 && z > 0.0 {
        Ok((x, z))
    } else {
        Err(Error::Domain(format!("third-order term needs x > 0 and z > 0, got x={x}, z={z}")))
    }
}

fn check_distinct(a: [f64; 2], b: [f64; 2]) -> Result<()> {
    let d = dist2(a, b);
    let scale = (a[0] * a[0] + a[1] * a[1]).max(b[0] * b[0] + b[1] * b[1]).max(1.0);
    if d <= COINCIDENCE * scale {
        Err(Error::Coincidence(d))
    } else {
        Ok(())
    }
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

/// (−λ/4π)³ {p,r}{r,q}{q,p} e^{−xr² − zq²}, each brace that of ⟨a|H_I|b⟩.
pub fn k_product_integrand(
    p: Momentum2,
    r: Momentum2,
    q: Momentum2,
    frame: &SchwingerFrame,
    sp: SpinParameter,
) -> Result<f64> {
    frame.require(3)?;
    let (pa, ra, qa) = (p.as_array(), r.as_array(), q.as_array());
    check_distinct(pa, ra)?;
    check_distinct(ra, qa)?;
    check_distinct(qa, pa)?;
    let damp = (-frame.x() * norm2(ra) - frame.z() * norm2(qa)).exp();
    Ok(cube(sp) * brace(pa, ra) * brace(ra, qa) * brace(qa, pa) * damp)
}

/// Integrand of one term of the product, with its (−λ/4π)³ and damping.
/// The bounded kernels are taken as 0 at exact coincidence.
pub fn k_term_integrand(
    term: KTerm,
    p: Momentum2,
    r: Momentum2,
    q: Momentum2,
    frame: &SchwingerFrame,
    sp: SpinParameter,
) -> f64 {
    let (pa, ra, qa) = (p.as_array(), r.as_array(), q.as_array());
    let body = match term {
        KTerm::K0 => 4.0 * ra[0] * kernel_y(ra, qa) * kernel_y(qa, pa),
        KTerm::K1 => 4.0 * qa[0] * kernel_y(pa, ra) * kernel_y(qa, pa),
        KTerm::K2 => 4.0 * pa[0] * kernel_y(pa, ra) * kernel_y(ra, qa),
        KTerm::K3 => -8.0 * kernel_y(pa, ra) * kernel_y(ra, qa) * kernel_y(qa, pa),
        KTerm::Extra => -2.0 * pa[0] * ra[0] * kernel_y(ra, qa),
    };
    cube(sp) * body * (-frame.x() * norm2(ra) - frame.z() * norm2(qa)).exp()
}

/// ∬ d²r d²q of one term: a polar chart centred on p for r, and for every r
/// a plane integral over q with charts at p and r.
pub fn k_term_quadrature(
    term: KTerm,
    p: Momentum2,
    frame: &SchwingerFrame,
    sp: SpinParameter,
    tol: f64,
) -> Result<QuadratureResult> {
    let (x, z) = positive_xz(frame)?;
    let c3 = cube(sp);
    if c3 == 0.0 {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
            method: Method::Polar,
            radius: None,
        });
    }
    let scale = c3.abs() * PI * PI / (x * z) * (1.0 + p.big_p()).powf(1.5);
    let abs = 1e-3 * tol * scale;
    let inner_abs = 0.1 * abs * x / PI;
    let pa = p.as_array();
    let inner_evals = Cell::new(0u64);
    let failure = RefCell::new(None);
    let outer = QuadratureSpec::new(2, x)
        .with_singular_points(&[pa])
        .with_tolerances(tol, abs)
        .with_initial_segments(OUTER_SEGMENTS);
    // Inner convergence flags are not consulted; inner errors are
    // propagated into the outer estimate.
    let mut res = integrate_plane_with_errors(
        |r| {
            let spec = QuadratureSpec::new(2, z)
                .with_singular_points(&[pa, r])
                .with_tolerances(0.3 * tol, inner_abs)
                .with_initial_segments(INNER_SEGMENTS);
            let rm = Momentum2::from(r);
            match integrate_plane(|q| k_term_integrand(term, p, rm, q.into(), frame, sp), &spec) {
                Ok(v) => {
                    inner_evals.set(inner_evals.get() + v.evaluations);
                    (v.value, v.error_estimate)
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    (0.0, f64::INFINITY)
                }
            }
        },
        &outer,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    res.evaluations = inner_evals.get();
    Ok(res)
}

/// Ledger row: the term's closed or reduced form against its 4-d quadrature.
pub fn k_term_oracle(
    term: KTerm,
    p: Momentum2,
    frame: &SchwingerFrame,
    sp: SpinParameter,
    tol: f64,
) -> Result<TermReport> {
    let (closed, closed_ok) = match term {
        KTerm::K1 => (k1_closed(p, frame, sp)?, true),
        KTerm::Extra => (k_extra_closed(p, frame, sp)?, true),
        KTerm::K0 => split(k0_reduced(p, frame, sp, 0.01 * tol)?),
        KTerm::K2 => split(k2_reduced(p, frame, sp, 0.01 * tol)?),
        KTerm::K3 => split(k3_reduced(p, frame, sp, tol)?),
    };
    let quad = k_term_quadrature(term, p, frame, sp, tol)?;
    Ok(TermReport::new(
        term.id(),
        &frame_params(p, frame, sp),
        closed,
        quad.value,
        quad.error_estimate,
        quad.converged && closed_ok,
    ))
}

fn split(r: ReducedValue) -> (f64, bool) {
    (r.value, r.converged)
}

pub(crate) fn frame_params(p: Momentum2, f: &SchwingerFrame, sp: SpinParameter) -> Vec<(&'static str, f64)> {
    vec![
        ("p1", p.p1),
        ("p2", p.p2),
        ("t", f.t),
        ("u", f.u),
        ("u1", f.u1),
        ("u2", f.u2),
        ("x", f.x()),
        ("z", f.z()),
        ("lambda", sp.lambda()),
    ]
}

/// The published K1 closed form, b = x²p̄², c = z²p̄²:
///
/// 4(−λ/4π)³(π/2)² p1 e^{−(x+z)p̄²} (e^{xp̄²} − 1)/b ·
/// {−(p1² − p2²e^{zp̄²})/c + z(p1² − p2²)(1 − e^{zp̄²})/c²},
///
/// with every growing exponential folded against e^{−(x+z)p̄²}.
pub fn k1_closed(p: Momentum2, frame: &SchwingerFrame, sp: SpinParameter) -> Result<f64> {
    let (x, z) = positive_xz(frame)?;
    let big_p = p.big_p();
    if !(big_p > 0.0) {
        return Err(Error::Domain("K1 closed form needs p̄² > 0".into()));
    }
    let (p1s, p2s) = (p.p1 * p.p1, p.p2 * p.p2);
    let s = z * big_p;
    let g = one_minus_exp_ratio(s);
    let bracket = (p1s * (-(-s).exp() - g) + p2s * (1.0 + g)) / (z * z * big_p);
    let pref = 4.0 * cube(sp) * HALF_PI * HALF_PI;
    Ok(pref * p.p1 * one_minus_exp_ratio(x * big_p) / x * bracket)
}

/// K1 from its factorised α-representation: 4(−λ/4π)³·R(x)·Q(z) with
/// R = (π/2)p1(1 − e^{−xp̄²})/(x²p̄²) and
/// Q = (π/2z)[p1²g1(zp̄²) + p2²(g0 − g1)(zp̄²)], g0 = (1 − e^{−s})/s,
/// g1 = ∫₀¹y e^{−ys}dy.
pub fn k1_reduced(p: Momentum2, frame: &SchwingerFrame, sp: SpinParameter) -> Result<f64> {
    let (x, z) = positive_xz(frame)?;
    let big_p = p.big_p();
    let r = HALF_PI * p.p1 * one_minus_exp_ratio(x * big_p) / x;
    let s = z * big_p;
    let (g0, g1) = (one_minus_exp_ratio(s), exp_moment1(s));
    let q = HALF_PI / z * (p.p1 * p.p1 * g1 + p.p2 * p.p2 * (g0 - g1));
    Ok(4.0 * cube(sp) * r * q)
}

/// ∬ of the extra cross term, (−λ/4π)³ (−π² p1) / (2xz(x + z)).
pub fn k_extra_closed(p: Momentum2, frame: &SchwingerFrame, sp: SpinParameter) -> Result<f64> {
    let (x, z) = positive_xz(frame)?;
    Ok(cube(sp) * (-PI * PI * p.p1) / (2.0 * x * z * (x + z)))
}

/// K0 after both momentum integrations, as a single α-quadrature:
///
/// 4(−λ/4π)³(π/2)² ∫₀^∞ dα e^{−(β+z)p̄²}/(2(α+x)³) p1 {xG1 + αG2},
/// β = αx/(α+x), a = (β+z)²p̄².
///
/// The printed G1, G2 contain e^{a/b} with b undefined; b = β + z is used,
/// the only choice for which e^{a/b} cancels the prefactor's damping.
pub fn k0_reduced(
    p: Momentum2,
    frame: &SchwingerFrame,
    sp: SpinParameter,
    tol: f64,
) -> Result<ReducedValue> {
    let (x, z) = positive_xz(frame)?;
    let big_p = p.big_p();
    if !(big_p > 0.0) {
        return Err(Error::Domain("K0 reduced form needs p̄² > 0".into()));
    }
    let (p1s, p2s) = (p.p1 * p.p1, p.p2 * p.p2);
    let f = |alpha: f64| {
        let beta = alpha * x / (alpha + x);
        let s = beta + z;
        let a = s * s * big_p;
        let e = (-s * big_p).exp();
        let om = -(-s * big_p).exp_m1();
        let tail = 3.0 * (p1s - 3.0 * p2s) * om / (a * a * big_p)
            + (s / (a * a)) * (8.0 * p2s * e + (3.0 * p1s - p2s));
        let g1 = -(2.0 * p2s * e / a + tail);
        let g2 = -(2.0 * p1s * e / a + tail);
        p.p1 * (x * g1 + alpha * g2) / (2.0 * (alpha + x).powi(3))
    };
    let r = integrate_semi_infinite(leaf(f), 0.0, Tolerance::new(tol, 1e-300), MAX_SEGMENTS);
    let pref = 4.0 * cube(sp) * HALF_PI * HALF_PI;
    Ok(ReducedValue {
        value: pref * r.value,
        error: (pref * r.error).abs(),
        converged: r.converged,
    })
}

/// One S-integrand of K2 at w: −(p1²e^{−wp̄²} − p2²)/b − w(p1² − p2²)(e^{−wp̄²} − 1)/b², b = w²p̄².
fn k2_s_integrand(p1s: f64, p2s: f64, big_p: f64, w: f64) -> f64 {
    let s = w * big_p;
    let g = one_minus_exp_ratio(s);
    (-p1s * (-s).exp() + p2s + (p1s - p2s) * g) / (w * w * big_p)
}

/// K2 = 4(−λ/4π)³(π/2)² (p1/z²)(S1 + S2), S1 over w = λ' + x + z and S2
/// over u = λ' + x, λ' ∈ [0, ∞).
pub fn k2_reduced(
    p: Momentum2,
    frame: &SchwingerFrame,
    sp: SpinParameter,
    tol: f64,
) -> Result<ReducedValue> {
    let (x, z) = positive_xz(frame)?;
    let big_p = p.big_p();
    if !(big_p > 0.0) {
        return Err(Error::Domain("K2 reduced form needs p̄² > 0".into()));
    }
    let (p1s, p2s) = (p.p1 * p.p1, p.p2 * p.p2);
    let tol = Tolerance::new(tol, 1e-300);
    let s1 = integrate_semi_infinite(
        leaf(|l| k2_s_integrand(p1s, p2s, big_p, l + x + z)),
        0.0,
        tol,
        MAX_SEGMENTS,
    );
    let s2 = integrate_semi_infinite(
        leaf(|l| k2_s_integrand(p1s, p2s, big_p, l + x)),
        0.0,
        tol,
        MAX_SEGMENTS,
    );
    let pref = 4.0 * cube(sp) * HALF_PI * HALF_PI * p.p1 / (z * z);
    Ok(ReducedValue {
        value: pref * (s1.value + s2.value),
        error: (pref * (s1.error + s2.error)).abs(),
        converged: s1.converged && s2.converged,
    })
}

/// One coefficient C_j = plain + exp·e^{f/k}, with e^{f/k} kept symbolic.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CSplit {
    pub plain: f64,
    pub exp: f64,
}

impl CSplit {
    fn new(plain: f64, exp: f64) -> Self {
        Self { plain, exp }
    }

    /// C_j e^{−zr² − β(r−p)²}, given that damping and the folded e^{−βzp̄²/k}.
    pub fn damped(&self, damping: f64, folded: f64) -> f64 {
        self.plain * damping + self.exp * folded
    }
}

/// C0…C9 as printed, with a = r1p2 − r2p1, k = β + z, f = |βp − kr|².
pub fn c_coefficients(
    p: Momentum2,
    r: Momentum2,
    beta: f64,
    frame: &SchwingerFrame,
) -> Result<[CSplit; 10]> {
    frame.require(3)?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("β must be finite and ≥ 0, got {beta}")));
    }
    let z = frame.z();
    let k = beta + z;
    let (p1, p2, r1, r2) = (p.p1, p.p2, r.p1, r.p2);
    let f = dist2([beta * p1, beta * p2], [k * r1, k * r2]);
    let fscale = (beta * beta * p.big_p()).max(k * k * r.big_p()).max(1e-300);
    if !(f > COINCIDENCE * fscale) {
        return Err(Error::Coincidence(f));
    }
    let big_p = p.big_p();
    let a = r1 * p2 - r2 * p1;
    let a2 = a * a;
    let rp = r1 * p1 + r2 * p2;
    let b = beta;
    let (f2, f3) = (f * f, f * f * f);
    let f4 = f2 * f2;

    let c0 = {
        let lead = (r1 * (r2 - p2) * a + 6.0 * b * r2 * r2 * a2) / (k * k);
        let brace = z * z * r2 * p2 * rp
            + 0.5 * k * (r2 * p2 + 3.0 * r1 * p1)
            + b * b * p1 * (p2 - r2) * a
            + b * z * (r2 * r2 * big_p - p1 * p2 * a - p2 * p2 * rp);
        CSplit::new(0.0, lead * brace / f)
    };
    let c1 = {
        let plain = 0.5 * (3.0 * r1 * p1 + r2 * p2)
            + b * (p2 * rp * (r2 - p2) - p2 * (p1 + r1) * a - 2.0 * a2)
            + 2.0 * b * b * a2 * p2 * (p2 - 7.0 * r2);
        let exp = -0.5 * (3.0 * r1 * p1 + r2 * p2)
            + b * (-2.0 * a2 - a * p2 * r1 + r2 * p2 * (big_p + 3.0 * rp))
            + 2.0 * b * b * a2 * p2 * (p2 + r2);
        CSplit::new(plain / f2, exp / f2)
    };
    let c2 = {
        let plain = a * r1 * (3.0 * r2 - p2) + r2 * r2 * (p2 * p2 - rp) + r1 * r2 * p1 * p2
            + b * a2 * (20.0 * r2 * r2 - 2.0 * r2 * p2);
        let exp = (r2 + p2) * (a * r1 - p2 * rp) - 2.0 * b * a2 * r2 * p2;
        CSplit::new(k * plain / f2, k * exp / f2)
    };
    let c3 = {
        let m = r2 * p2 * big_p + 6.0 * p1 * p2 * a;
        let n = 16.0 * b * a2 * p2 * p2;
        let w = b * b / f3;
        CSplit::new(w * (n - m), w * (m + 2.0 * n))
    };
    let c4 = {
        let m = 4.0 * r2 * p2 * rp - 6.0 * a2 + 4.0 * b * p2 * (r2 + p2) * a2;
        let n = 32.0 * b * r2 * p2 * a2;
        let w = b * k / f3;
        CSplit::new(w * (m - 2.0 * n), w * (-m - n))
    };
    let c5 = {
        let m = 2.0 * r2 * r2 * rp - 4.0 * r1 * r2 * a + 48.0 * b * a2 * r2 * r2;
        let n = 4.0 * b * r2 * (p2 + r2) * a2;
        let w = k * k / f3;
        CSplit::new(w * (m + n), -w * n)
    };
    let c6 = {
        let exp = -b * b * (p2 / (f2 * k)) * (-4.0 * p1 * a + 2.0 * p2 * rp + 8.0 * b * a2 * p2 * p2);
        CSplit::new(0.0, exp)
    };
    let c7 = {
        let m = 48.0 * b * k * k * k / f4 * a2 * r2 * r2;
        CSplit::new(m, -m)
    };
    let c8 = {
        let m = 48.0 * b * b * b * k / f4 * a2 * p2 * p2;
        CSplit::new(m, -m)
    };
    let c9 = {
        let m = -96.0 * b * b * k * k / f4 * r2 * p2 * a2;
        CSplit::new(m, -m)
    };
    Ok([c0, c1, c2, c3, c4, c5, c6, c7, c8, c9])
}

/// The two damping factors of the C_j: e^{−zr² − β(r−p)²} and, for the
/// e^{f/k} parts, the folded e^{−βzp̄²/k}.
fn c_dampings(p: Momentum2, r: Momentum2, beta: f64, z: f64) -> (f64, f64) {
    let k = beta + z;
    let plain = (-z * r.big_p() - beta * dist2(p.as_array(), r.as_array())).exp();
    let folded = (-beta * z * p.big_p() / k).exp();
    (plain, folded)
}

fn c_sum_damped(p: Momentum2, r: Momentum2, beta: f64, frame: &SchwingerFrame) -> Result<f64> {
    let c = c_coefficients(p, r, beta, frame)?;
    let (dp, df) = c_dampings(p, r, beta, frame.z());
    Ok(c.iter().map(|cj| cj.damped(dp, df)).sum())
}

/// Integrand of the α-representation of the q-integral of K3 at fixed (r, β):
/// e^{[−αβ(r−p)² − αzr² − βzp̄²]/T} T^{−5} {T³r2p2 r·p + T²B2 + T B1 − 8αβw2²a²}
/// with T = α + β + z and w = αr + βp.
fn k3_alpha_integrand(p: Momentum2, r: Momentum2, beta: f64, z: f64, alpha: f64) -> f64 {
    let (p1, p2, r1, r2) = (p.p1, p.p2, r.p1, r.p2);
    let t = alpha + beta + z;
    let w = [alpha * r1 + beta * p1, alpha * r2 + beta * p2];
    let a = p2 * r1 - p1 * r2;
    let a2 = a * a;
    let rp = r1 * p1 + r2 * p2;
    let mix = beta * p1 - alpha * r1;
    let b1 = r2 * p2 * norm2(w) + 3.0 * w[1] * a * mix + 2.0 * alpha * beta * w[1] * (r2 + p2) * a2;
    let b2 = 0.5 * (3.0 * r1 * p1 + r2 * p2)
        - 2.0 * alpha * beta * r2 * p2 * a2
        - w[1] * (r2 + p2) * rp
        - a * mix * (r2 + p2);
    let brace = t * t * t * r2 * p2 * rp + t * t * b2 + t * b1 - 8.0 * alpha * beta * w[1] * w[1] * a2;
    let expo = (-alpha * beta * dist2(r.as_array(), p.as_array())
        - alpha * z * r.big_p()
        - beta * z * p.big_p())
        / t;
    expo.exp() * brace / t.powi(5)
}

/// Ledger row: Σ_j C_j e^{−zr² − β(r−p)²} against direct α-quadrature of
/// the integrand it was obtained from.
pub fn c_sum_alpha_check(
    p: Momentum2,
    r: Momentum2,
    beta: f64,
    frame: &SchwingerFrame,
    tol: f64,
) -> Result<TermReport> {
    let closed = c_sum_damped(p, r, beta, frame)?;
    let z = frame.z();
    let res = integrate_semi_infinite(
        leaf(|alpha| k3_alpha_integrand(p, r, beta, z, alpha)),
        0.0,
        Tolerance::new(tol, 1e-300),
        MAX_SEGMENTS,
    );
    let mut params = frame_params(p, frame, SpinParameter::new(0.0)?);
    params.retain(|(k, _)| *k != "lambda");
    params.extend([("r1", r.p1), ("r2", r.p2), ("beta", beta)]);
    Ok(TermReport::new("C_alpha", &params, closed, res.value, res.error, res.converged))
}

/// Singular points of the I_j integrands: r = p and r = βp/k, where f = 0.
fn i_singular_points(p: Momentum2, beta: f64, k: f64) -> Vec<[f64; 2]> {
    let pa = p.as_array();
    let star = [beta * p.p1 / k, beta * p.p2 / k];
    if dist2(pa, star) <= 1e-20 * p.big_p().max(1.0) {
        vec![pa]
    } else {
        vec![pa, star]
    }
}

/// ∫d²r of Σ_{j∈js} C_j e^{−zr² − β(r−p)²} Y(p, r) e^{−xr²}.
fn c_plane(
    js: &[usize],
    p: Momentum2,
    beta: f64,
    frame: &SchwingerFrame,
    tol: f64,
    abs: f64,
    max_evals: u64,
) -> Result<QuadratureResult> {
    let (x, z) = positive_xz(frame)?;
    let k = beta + z;
    let pa = p.as_array();
    let hit = Cell::new(false);
    let spec = QuadratureSpec::new(2, x)
        .with_singular_points(&i_singular_points(p, beta, k))
        .with_tolerances(tol, abs)
        .with_max_evals(max_evals);
    let mut res = integrate_plane(
        |ra| {
            let y = kernel_y(pa, ra);
            if y == 0.0 {
                return 0.0;
            }
            let r = Momentum2::from(ra);
            let c = match c_coefficients(p, r, beta, frame) {
                Ok(c) => c,
                Err(_) => {
                    hit.set(true);
                    return 0.0;
                }
            };
            let (dp, df) = c_dampings(p, r, beta, z);
            let gauss = (-x * norm2(ra)).exp();
            let v = js.iter().map(|&j| c[j].damped(dp, df)).sum::<f64>() * y * gauss;
            if v.is_finite() {
                v
            } else {
                hit.set(true);
                0.0
            }
        },
        &spec,
    )?;
    res.converged &= !hit.get();
    Ok(res)
}

/// I0 of the published two-parameter reduction.
fn i0_reduced_integrand(p: Momentum2, beta: f64, x: f64, z: f64, mu: f64, nu: f64) -> f64 {
    let (p1, p2) = (p.p1, p.p2);
    let (p1s, p2s, big_p) = (p1 * p1, p2 * p2, p.big_p());
    let k = beta + z;
    let l = k * (mu * k + 1.0) + nu + x;
    let m = beta * (mu * k + 1.0) + nu;
    let n = beta * mu * k + nu;
    let b = mu * k * k + nu + x;
    let e1 = m * m * big_p / l - (beta * (mu * beta + 1.0) + nu) * big_p;
    let e2 = n * n * big_p / b - (nu + beta * (mu * beta + z / k)) * big_p;
    let a0 = p1
        * (p2s * big_p * m.powi(3)
            + l * (1.5 * m * (p1s - p2s) - 2.0 * m * m * p2s * big_p)
            + l * l * (m * p2s * big_p + 2.0 * p2s));
    let a1 = 9.0 * beta / l
        * p1
        * (-2.0 * m.powi(4) * p2s.powi(3)
            + 3.0 * l * m * m * p2s * big_p
            + l * l * (p1s + 1.5 * big_p - 2.0 * m * p2s * big_p));
    let a2 = p1 / (k * k)
        * (z * z * (2.0 * n * n * p2s * big_p + b * p2s * (1.0 - n * (2.0 * p2s + p1s)))
            + b * k * (0.5 * n * (3.0 * p1s - p2s) + b * p2s))
        + p1 / (k * k)
            * (beta * beta
                * (n * n * p2s * big_p
                    + b * (0.5 * (3.0 * p1s + p2s) - 2.0 * n * p2s * big_p)
                    + b * b * p2s * big_p)
                + beta * z * big_p * (3.0 / b * n * n * p2s + (3.0 - 0.25 * n * p2s) - b * p2s));
    HALF_PI * ((-a0 + a1) * e1.exp() / l.powi(5) + a2 * e2.exp() / b.powi(4))
}

/// I1 of the published two-parameter reduction.
fn i1_reduced_integrand(p: Momentum2, beta: f64, x: f64, z: f64, mu: f64, nu: f64) -> f64 {
    let (p1, p2) = (p.p1, p.p2);
    let (p1s, p2s, big_p) = (p1 * p1, p2 * p2, p.big_p());
    let k = beta + z;
    let l = k * (mu * k + 1.0) + nu + x;
    let m = beta * (mu * k + 1.0) + nu;
    let n = beta * mu * k + nu;
    let b = mu * k * k + nu + x;
    let e1 = m * m * big_p / l - (beta * (mu * beta + 1.0) + nu) * big_p;
    let e2 = n * n * big_p / b - (nu + beta * (mu * beta + z / k)) * big_p;
    let bb0 = 0.5 * m * (3.0 * p1s - p2s) + l * p2s;
    let bb1 = (3.0 * m * m * p2s * big_p
        - l * (3.0 * p1s - p2s + 2.0 * m * p2s * big_p)
        - l * l * m * m * p2s * big_p)
        / l;
    let bb2 = 3.0 * p2s / (l * l) * (5.0 * m.powi(3) * p2s * p1s - 7.0 * l * m * big_p + 4.0 * l * l * big_p);
    let bb3 = -(0.5 * n * (3.0 * p1s - p2s) + b * p2s)
        + beta
            * (7.0 / b * n * n * p2s * big_p
                - (3.0 * p1s + p2s + 2.0 * n * p2s * big_p)
                - b * b * p2s * big_p)
        + 6.0 / b * beta * beta * n * p2s * big_p;
    HALF_PI
        * mu
        * (e1.exp() / l.powi(3) * p1 * (bb0 + beta * bb1 + 2.0 * beta * beta * bb2)
            + e2.exp() / b.powi(3) * p1 * bb3)
}

/// Ledger row for I_j: the defining d²r quadrature, and for j ∈ {0, 1} the
/// published (μ, ν) reduction. Rows for j ≥ 2 carry no closed value.
pub fn i_integrals(
    j: usize,
    p: Momentum2,
    beta: f64,
    frame: &SchwingerFrame,
    tol: f64,
) -> Result<TermReport> {
    if j > 9 {
        return Err(Error::Domain(format!("I_j is defined for j = 0..=9, got {j}")));
    }
    let (x, z) = positive_xz(frame)?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("β must be finite and ≥ 0, got {beta}")));
    }
    let floor = 1e-12 * tol * (1.0 + p.big_p()).powi(3) / (x * x);
    let defining = if p.big_p() == 0.0 {
        exact_zero()
    } else {
        c_plane(&[j], p, beta, frame, tol, floor, PLANE_BUDGET)?
    };
    let mut params: Vec<(&str, f64)> = frame_params(p, frame, SpinParameter::new(0.0)?)
        .into_iter()
        .filter(|(k, _)| *k != "lambda")
        .collect();
    params.extend([("beta", beta), ("j", j as f64)]);
    let id = format!("I{j}");
    if j >= 2 {
        return Ok(TermReport::new(
            id,
            &params,
            f64::NAN,
            defining.value,
            defining.error_estimate,
            defining.converged,
        ));
    }
    let reduced = if p.p1 == 0.0 {
        exact_zero()
    } else {
        let spec = QuadratureSpec::new(2, 1.0)
            .with_tolerances(tol, floor)
            .with_max_evals(REDUCED_BUDGET);
        let bounds = [Bound::SemiInfinite(0.0), Bound::SemiInfinite(0.0)];
        if j == 0 {
            integrate_nested(|v| i0_reduced_integrand(p, beta, x, z, v[0], v[1]), &bounds, &spec)?
        } else {
            integrate_nested(|v| i1_reduced_integrand(p, beta, x, z, v[0], v[1]), &bounds, &spec)?
        }
    };
    Ok(TermReport::new(
        id,
        &params,
        reduced.value,
        defining.value,
        defining.error_estimate,
        defining.converged && reduced.converged,
    )
    .with_param("closed_error", reduced.error_estimate))
}

fn exact_zero() -> QuadratureResult {
    QuadratureResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
        converged: true,
        method: Method::Polar,
        radius: None,
    }
}

/// K3 with the q- and α-integrations done:
/// −8(−λ/4π)³(π/2) ∫₀^∞dβ ∫d²r Σ_j C_j e^{−zr² − β(r−p)²} Y(p, r) e^{−xr²}.
/// The ten coefficients are summed under one r-quadrature.
pub fn k3_reduced(
    p: Momentum2,
    frame: &SchwingerFrame,
    sp: SpinParameter,
    tol: f64,
) -> Result<ReducedValue> {
    let (x, _) = positive_xz(frame)?;
    let c3 = cube(sp);
    if c3 == 0.0 || p.big_p() == 0.0 {
        return Ok(ReducedValue { value: 0.0, error: 0.0, converged: true });
    }
    let all: Vec<usize> = (0..10).collect();
    let floor = 1e-6 * tol * (1.0 + p.big_p()).powi(3) / (x * x);
    let mut inner_ok = true;
    let mut failure = None;
    let r = integrate_semi_infinite(
        |beta| match c_plane(&all, p, beta, frame, 0.3 * tol, 0.1 * floor, K3_INNER_BUDGET) {
            Ok(v) => {
                inner_ok &= v.converged;
                (v.value, v.error_estimate)
            }
            Err(e) => {
                failure.get_or_insert(e);
                (0.0, f64::INFINITY)
            }
        },
        0.0,
        Tolerance::new(tol, floor),
        K3_SEGMENTS,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let pref = -8.0 * c3 * HALF_PI;
    Ok(ReducedValue {
        value: pref * r.value,
        error: (pref * r.error).abs(),
        converged: r.converged && inner_ok,
    })
}

/// Quasi–Monte Carlo estimate of the order-λ³ diagonal kernel term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThirdOrderKernel {
    pub value: f64,
    pub error: f64,
    pub evaluations: u64,
    pub converged: bool,
}

/// D₃(p, t) = (−t)³ ∫u²du ∫u1du1 ∫du2 e^{−t(1−u)p̄²} e^{−tuu1u2p̄²} ∬d²r d²q (product).
///
/// In (x, z) this is −t ∬_{x+z≤t} (1 − (x+z)/t) e^{−(t−x−z)p̄²} M(x, z), M the
/// momentum integral of the full product. The six dimensions are sampled as
/// a uniform point of the simplex and Gaussian-distributed r, q.
pub fn third_order_kernel(
    p: Momentum2,
    t: f64,
    sp: SpinParameter,
    tol: f64,
    seed: u64,
) -> Result<ThirdOrderKernel> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let c3 = cube(sp);
    if c3 == 0.0 {
        return Ok(ThirdOrderKernel { value: 0.0, error: 0.0, evaluations: 0, converged: true });
    }
    let pa = p.as_array();
    let big_p = p.big_p();
    let scale = c3.abs() * t * t * t * PI * PI * (1.0 + big_p).powf(1.5);
    let spec = QuadratureSpec::new(6, 1.0)
        .with_tolerances(tol, 1e-3 * tol * scale)
        .with_seed(seed)
        .with_max_evals(KERNEL_BUDGET);
    let gaussian = |u: f64, th: f64, scale: f64| {
        let rho = (-(-u).ln_1p() / scale).sqrt();
        let (s, c) = (std::f64::consts::TAU * th).sin_cos();
        [rho * c, rho * s]
    };
    let res = qmc_unit(
        |v| {
            let s = v[0].sqrt();
            let x = t * (1.0 - s);
            let z = t * s * v[1];
            if !(x > 0.0 && z > 0.0) {
                return 0.0;
            }
            let rest = s * (1.0 - v[1]);
            let r = gaussian(v[2], v[3], x);
            let q = gaussian(v[4], v[5], z);
            let weight = -t * (0.5 * t * t) * rest * (-t * rest * big_p).exp() * (PI / x) * (PI / z);
            weight * c3 * brace(pa, r) * brace(r, q) * brace(q, pa)
        },
        &spec,
    )?;
    Ok(ThirdOrderKernel {
        value: res.value,
        error: res.error_estimate,
        evaluations: res.evaluations,
        converged: res.converged,
    })
}
