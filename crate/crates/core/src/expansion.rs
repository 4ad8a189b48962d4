//! Schwinger expansion of the diagonal heat kernel, its momentum trace and
//! the Mellin-transform zeta density, per unit spatial volume and time extent.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::geometry::SpinParameter;
use crate::kernel_terms::{second_order_coefficient, third_order_kernel, Momentum2};
use crate::oracle::gauss_kronrod::{integrate, Tolerance};
use crate::oracle::{integrate_plane, QuadratureSpec};
use crate::{Error, Result};

const MAX_SEGMENTS: usize = 400;
const TAIL_TARGET: f64 = 1e-10;

/// Sign of m² in the Euclidean time factor e^{∓tm²}.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassSign {
    /// e^{−tm²}: the convergent Euclidean convention.
    #[default]
    Plus,
    /// e^{+tm²}: the literal sign of C0 = p0² − m²; needs a finite t_max.
    Minus,
}

impl MassSign {
    fn exponent_sign(self) -> f64 {
        match self {
            MassSign::Plus => -1.0,
            MassSign::Minus => 1.0,
        }
    }
}

impl fmt::Display for MassSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MassSign::Plus => "plus",
            MassSign::Minus => "minus",
        })
    }
}

impl FromStr for MassSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(MassSign::Plus),
            "minus" => Ok(MassSign::Minus),
            _ => Err(Error::Domain(format!("mass sign must be plus or minus, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionConfig {
    pub order: u8,
    pub mass: f64,
    pub mass_sign: MassSign,
    pub lambda: f64,
    /// Upper end of the Mellin integral; chosen from the flat tail bound when absent.
    pub t_max: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Relative target of the order-3 quasi–Monte Carlo estimate.
    pub order3_tol: f64,
    pub seed: u64,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self {
            order: 2,
            mass: 1.0,
            mass_sign: MassSign::Plus,
            lambda: 1.0,
            t_max: None,
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            order3_tol: 1e-2,
            seed: 0,
        }
    }
}

impl ExpansionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order > 3 {
            return Err(Error::Domain(format!("expansion order must be 0..=3, got {}", self.order)));
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::Domain(format!("mass must be ≥ 0, got {}", self.mass)));
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!("t_max must be positive, got {t}")));
            }
        }
        let tol_ok = |v: f64| v > 0.0 && v.is_finite();
        if !tol_ok(self.rel_tol) || !tol_ok(self.abs_tol) || !tol_ok(self.order3_tol) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        self.spin().map(|_| ())
    }

    pub fn spin(&self) -> Result<SpinParameter> {
        SpinParameter::new(self.lambda)
    }
}

/// Per-order contributions to the diagonal momentum-space kernel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelDiagonal {
    pub p1: f64,
    pub p2: f64,
    pub t: f64,
    /// Index n holds the order-λⁿ contribution, n = 0..=order.
    pub order_values: Vec<f64>,
    pub order3_error: f64,
    pub converged: bool,
}

fn require_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("t must be positive and finite, got {t}")))
    }
}

pub fn kernel_diagonal(p: Momentum2, t: f64, cfg: &ExpansionConfig) -> Result<KernelDiagonal> {
    kernel_diagonal_at(p, 0.0, t, cfg)
}

/// As [`kernel_diagonal`] with an explicit energy p0. H_I has no time
/// derivative, so p0 enters only through the separate time factor and the
/// spatial kernel is independent of it.
pub fn kernel_diagonal_at(
    p: Momentum2,
    _p0: f64,
    t: f64,
    cfg: &ExpansionConfig,
) -> Result<KernelDiagonal> {
    require_t(t)?;
    cfg.validate()?;
    let sp = cfg.spin()?;
    let mut values = vec![(-t * p.big_p()).exp()];
    let mut converged = true;
    let mut order3_error = 0.0;
    if cfg.order >= 1 {
        values.push(0.0);
    }
    if cfg.order >= 2 {
        let d2 = second_order_coefficient(p, t, sp, cfg.rel_tol)?;
        converged &= d2.converged;
        values.push(d2.value);
    }
    if cfg.order >= 3 {
        let d3 = third_order_kernel(p, t, sp, cfg.order3_tol, cfg.seed)?;
        converged &= d3.converged;
        order3_error = d3.error;
        values.push(d3.value);
    }
    Ok(KernelDiagonal {
        p1: p.p1,
        p2: p.p2,
        t,
        order_values: values,
        order3_error,
        converged,
    })
}

/// ∫d²p/(2π)² of the kernel, split by order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceDensity {
    pub t: f64,
    pub per_order: Vec<f64>,
    pub error: f64,
    pub converged: bool,
}

impl TraceDensity {
    pub fn total(&self) -> f64 {
        self.per_order.iter().sum()
    }
}

/// Orders 0 and 2 by polar quadrature over p; order 1 is identically zero.
/// The order-3 kernel is odd under p1 → −p1 (H_I changes sign under that
/// reflection and the intermediate integrals are invariant), so its trace
/// is exactly zero.
pub fn trace_density_2d(t: f64, cfg: &ExpansionConfig) -> Result<TraceDensity> {
    require_t(t)?;
    cfg.validate()?;
    let sp = cfg.spin()?;
    let norm = 1.0 / (4.0 * PI * PI);
    let spec = QuadratureSpec::new(2, t).with_tolerances(0.1 * cfg.rel_tol, cfg.abs_tol);
    let zeroth = integrate_plane(|v| norm * (-t * (v[0] * v[0] + v[1] * v[1])).exp(), &spec)?;
    let mut per_order = vec![zeroth.value];
    let mut error = zeroth.error_estimate;
    let mut converged = zeroth.converged;
    if cfg.order >= 1 {
        per_order.push(0.0);
    }
    if cfg.order >= 2 {
        let inner_tol = cfg.rel_tol;
        let spec = QuadratureSpec::new(2, t)
            .with_tolerances(cfg.rel_tol, cfg.abs_tol)
            .with_initial_segments(4);
        let failure = RefCell::new(None);
        let second = integrate_plane(
            |v| match second_order_coefficient(Momentum2::from(v), t, sp, inner_tol) {
                Ok(d) => norm * d.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            &spec,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let second = second?;
        per_order.push(second.value);
        error += second.error_estimate;
        converged &= second.converged;
    }
    if cfg.order >= 3 {
        per_order.push(0.0);
    }
    Ok(TraceDensity { t, per_order, error, converged })
}

/// ∫dp0/(2π) e^{−tp0²} e^{∓tm²} = e^{∓tm²}/(2√(πt)).
pub fn p0_factor(t: f64, cfg: &ExpansionConfig) -> Result<f64> {
    require_t(t)?;
    let m2 = cfg.mass * cfg.mass;
    Ok((cfg.mass_sign.exponent_sign() * t * m2).exp() / (2.0 * (PI * t).sqrt()))
}

/// m^{3−2s} Γ(s − 3/2) / ((4π)^{3/2} Γ(s)).
pub fn zeta_flat_closed(s: f64, m: f64) -> Result<f64> {
    if s == 1.5 {
        return Err(Error::Pole(s));
    }
    if !(s > 1.5 && s.is_finite()) {
        return Err(Error::Domain(format!("flat zeta density needs s > 3/2, got {s}")));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Domain(format!("flat zeta density needs m > 0, got {m}")));
    }
    Ok(m.powf(3.0 - 2.0 * s) * gamma(s - 1.5) / ((4.0 * PI).powf(1.5) * gamma(s)))
}

/// Flat-kernel contribution of (t_max, ∞) to the Mellin integral.
pub fn mellin_tail_bound(s: f64, m: f64, t_max: f64) -> Result<f64> {
    let flat = zeta_flat_closed(s, m)?;
    Ok(flat * gamma_ur(s - 1.5, m * m * t_max))
}

fn auto_t_max(s: f64, m: f64) -> Result<f64> {
    let flat = zeta_flat_closed(s, m)?;
    let target = TAIL_TARGET * flat.min(1.0);
    let mut t = 1.0 / (m * m);
    while mellin_tail_bound(s, m, t)? > target {
        t *= 1.5;
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZetaDensity {
    pub value: f64,
    pub error: f64,
    pub per_order: Vec<f64>,
    pub t_max: f64,
    pub tail_bound: f64,
    pub converged: bool,
}

/// (1/Γ(s)) ∫₀^{t_max} dt t^{s−1} p0_factor(t) trace_density_2d(t), integrated
/// in τ = √t. The flat tail beyond t_max is added to the error; with the
/// literal mass sign the tail diverges and is reported as infinite.
pub fn zeta_density(s: f64, cfg: &ExpansionConfig) -> Result<ZetaDensity> {
    cfg.validate()?;
    if !(s > 1.5 && s.is_finite()) {
        return Err(Error::Domain(format!("zeta density needs s > 3/2, got {s}")));
    }
    let m = cfg.mass;
    if !(m > 0.0) {
        return Err(Error::Domain(format!("zeta density needs m > 0, got {m}")));
    }
    let (t_max, tail) = match (cfg.mass_sign, cfg.t_max) {
        (MassSign::Plus, Some(t)) => (t, mellin_tail_bound(s, m, t)?),
        (MassSign::Plus, None) => {
            let t = auto_t_max(s, m)?;
            (t, mellin_tail_bound(s, m, t)?)
        }
        (MassSign::Minus, Some(t)) => (t, f64::INFINITY),
        (MassSign::Minus, None) => {
            return Err(Error::Domain("the literal mass sign needs an explicit t_max".into()))
        }
    };
    let n_orders = cfg.order as usize + 1;
    let gs = gamma(s);
    let mut per_order = vec![0.0; n_orders];
    let mut error = tail;
    let mut converged = true;
    let mut failure = None;
    for (n, slot) in per_order.iter_mut().enumerate() {
        if n == 1 || n == 3 {
            continue;
        }
        let r = integrate(
            |tau| {
                let t = tau * tau;
                if t == 0.0 {
                    return (0.0, 0.0);
                }
                let single = ExpansionConfig { order: n as u8, ..cfg.clone() };
                let tr = match trace_density_2d(t, &single) {
                    Ok(tr) => tr,
                    Err(e) => {
                        failure.get_or_insert(e);
                        return (0.0, f64::INFINITY);
                    }
                };
                let w = 2.0 * tau.powf(2.0 * s - 1.0) * p0_factor(t, cfg).unwrap_or(f64::NAN) / gs;
                (w * tr.per_order[n], (w * tr.error).abs())
            },
            0.0,
            t_max.sqrt(),
            4,
            Tolerance::new(cfg.rel_tol, cfg.abs_tol),
            MAX_SEGMENTS,
        );
        *slot = r.value;
        error += r.error;
        converged &= r.converged;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let value: f64 = per_order.iter().sum();
    converged &= tail.is_finite() && error <= cfg.rel_tol.max(1e-7) * value.abs() + cfg.abs_tol;
    Ok(ZetaDensity { value, error, per_order, t_max, tail_bound: tail, converged })
}
