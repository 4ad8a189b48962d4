use std::cell::Cell;

use super::gauss_kronrod::{integrate, integrate_semi_infinite, Tolerance};
use super::qmc::qmc_unit;
use super::{Method, QuadratureResult, QuadratureSpec};

const MAX_ADAPTIVE_DIM: usize = 4;
const MAX_DIM: usize = 6;
const MAX_SEGMENTS: usize = 300;

/// Integration range of one coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Finite(f64, f64),
    /// `[a, ∞)`, mapped onto `[0, 1)` by `x = a + τ/(1−τ)`.
    SemiInfinite(f64),
    /// The whole line, truncated at the spec's Gaussian tail radius.
    Real,
}

impl Bound {
    fn extent(&self, radius: f64) -> f64 {
        match *self {
            Bound::Finite(a, b) => (b - a).abs(),
            Bound::SemiInfinite(_) => 1.0,
            Bound::Real => 2.0 * radius,
        }
    }

    /// Map `u ∈ [0,1)` into the range, returning the point and the Jacobian.
    fn map_unit(&self, u: f64, radius: f64) -> (f64, f64) {
        match *self {
            Bound::Finite(a, b) => (a + (b - a) * u, b - a),
            Bound::SemiInfinite(a) => {
                let om = 1.0 - u;
                (a + u / om, 1.0 / (om * om))
            }
            Bound::Real => (radius * (2.0 * u - 1.0), 2.0 * radius),
        }
    }
}

struct Nested<'a, F> {
    f: &'a F,
    bounds: &'a [Bound],
    tols: Vec<Tolerance>,
    radius: f64,
    evals: Cell<u64>,
    budget: u64,
}

impl<F> Nested<'_, F>
where
    F: Fn(&[f64]) -> f64,
{
    /// Inner convergence flags are not consulted: inner errors are
    /// propagated into the outer estimate instead.
    fn level(&self, d: usize, x: [f64; MAX_DIM]) -> (f64, f64, bool) {
        let n = self.bounds.len();
        let mut g = |v: f64| {
            let mut y = x;
            y[d] = v;
            if d + 1 == n {
                let used = self.evals.get() + 1;
                self.evals.set(used);
                if used > self.budget {
                    return (0.0, f64::INFINITY);
                }
                ((self.f)(&y[..n]), 0.0)
            } else {
                let (val, err, _) = self.level(d + 1, y);
                (val, err)
            }
        };
        let tol = self.tols[d];
        let r = match self.bounds[d] {
            Bound::Finite(a, b) => integrate(&mut g, a, b, 2, tol, MAX_SEGMENTS),
            Bound::SemiInfinite(a) => integrate_semi_infinite(&mut g, a, tol, MAX_SEGMENTS),
            Bound::Real => integrate(&mut g, -self.radius, self.radius, 3, tol, MAX_SEGMENTS),
        };
        (r.value, r.error, r.converged)
    }
}

/// Nested adaptive Gauss–Kronrod for up to four dimensions, with a
/// randomly shifted Halton fallback for five or six dimensions or when the
/// adaptive pass fails to converge within the evaluation budget.
pub fn integrate_nested<F>(
    f: F,
    bounds: &[Bound],
    spec: &QuadratureSpec,
) -> crate::Result<QuadratureResult>
where
    F: Fn(&[f64]) -> f64,
{
    spec.validate()?;
    let n = bounds.len();
    if n == 0 || n > MAX_DIM || n != spec.dimension {
        return Err(crate::Error::Domain(format!(
            "nested quadrature needs 1..={MAX_DIM} bounds matching the spec dimension, got {n}"
        )));
    }
    let radius = spec.truncation_radius();
    let has_real = bounds.iter().any(|b| matches!(b, Bound::Real));

    let mut adaptive = None;
    if n <= MAX_ADAPTIVE_DIM {
        let mut tols = Vec::with_capacity(n);
        let mut volume = 1.0;
        let mut rel = spec.rel_tol;
        for b in bounds {
            tols.push(Tolerance::new(rel, spec.abs_tol / volume));
            volume *= 5.0 * b.extent(radius);
            rel *= 0.5;
        }
        let nested = Nested {
            f: &f,
            bounds,
            tols,
            radius,
            evals: Cell::new(0),
            budget: spec.max_evals,
        };
        let (value, error, ok) = nested.level(0, [0.0; MAX_DIM]);
        let res = QuadratureResult {
            value,
            error_estimate: error,
            evaluations: nested.evals.get().min(spec.max_evals),
            converged: ok,
            method: Method::Adaptive,
            radius: has_real.then_some(radius),
        }
        .finish(spec);
        if res.converged {
            return Ok(res);
        }
        adaptive = Some(res);
    }

    let unit = |u: &[f64]| {
        let mut y = [0.0; MAX_DIM];
        let mut jac = 1.0;
        for (d, b) in bounds.iter().enumerate() {
            let (v, j) = b.map_unit(u[d], radius);
            y[d] = v;
            jac *= j;
        }
        if !jac.is_finite() {
            return 0.0;
        }
        let val = f(&y[..n]) * jac;
        if val.is_finite() {
            val
        } else {
            0.0
        }
    };
    let budget = adaptive
        .as_ref()
        .map_or(spec.max_evals, |a| spec.max_evals.saturating_sub(a.evaluations).max(1));
    let qspec = spec.clone().with_max_evals(budget);
    let mut q = qmc_unit(unit, &qspec)?;
    q.radius = has_real.then_some(radius);
    if let Some(a) = adaptive {
        q.evaluations += a.evaluations;
        if a.value.is_finite() && a.error_estimate < q.error_estimate {
            return Ok(a);
        }
    }
    Ok(q)
}
