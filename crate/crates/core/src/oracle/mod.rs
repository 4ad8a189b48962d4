//! Brute-force integration engine used as an independent check on every
//! closed form in the crate.

mod extrapolate;
pub mod gauss_kronrod;
mod nested;
mod plane;
mod qmc;

pub use extrapolate::{regulator_limit, RegulatorFit};
pub use gauss_kronrod::Tolerance;
pub use nested::{integrate_nested, Bound};
pub use plane::{integrate_plane, integrate_plane_with_errors};
pub use qmc::{qmc_unit, MAX_QMC_DIM};

use serde::Serialize;

/// Configuration shared by the plane, nested and quasi–Monte Carlo drivers.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub dimension: usize,
    /// Integrands are assumed to be dominated by `exp(-gaussian_scale * |v|^2)`.
    pub gaussian_scale: f64,
    /// Points where the integrand has a declared removable singularity.
    pub singular_points: Vec<[f64; 2]>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: u64,
    pub seed: u64,
    /// Initial Gauss–Kronrod segments per polar coordinate in plane charts.
    pub initial_segments: usize,
}

impl QuadratureSpec {
    pub fn new(dimension: usize, gaussian_scale: f64) -> Self {
        Self {
            dimension,
            gaussian_scale,
            singular_points: Vec::new(),
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_evals: 400_000_000,
            seed: 0,
            initial_segments: 8,
        }
    }

    pub fn with_singular_points(mut self, pts: &[[f64; 2]]) -> Self {
        self.singular_points = pts.to_vec();
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_evals(mut self, max_evals: u64) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn with_initial_segments(mut self, n: usize) -> Self {
        self.initial_segments = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.rel_tol, self.abs_tol)
    }

    /// Radius beyond which the assumed Gaussian envelope is below `0.01 * abs_tol`.
    pub fn truncation_radius(&self) -> f64 {
        let target = (0.01 * self.abs_tol).min(0.5);
        (-target.ln() / self.gaussian_scale).sqrt()
    }

    pub(crate) fn validate(&self) -> crate::Result<()> {
        let ok = self.dimension >= 1
            && self.gaussian_scale > 0.0
            && self.gaussian_scale.is_finite()
            && self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_evals > 0
            && self.initial_segments > 0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::Domain(format!("invalid quadrature spec {self:?}")))
        }
    }
}

/// Which engine produced a [`QuadratureResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Polar,
    Adaptive,
    QuasiMonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub converged: bool,
    pub method: Method,
    /// Tail truncation radius, when the domain was truncated.
    pub radius: Option<f64>,
}

impl QuadratureResult {
    pub(crate) fn finish(mut self, spec: &QuadratureSpec) -> Self {
        let bound = spec.abs_tol.max(spec.rel_tol * self.value.abs());
        self.converged =
            self.converged && self.value.is_finite() && self.error_estimate <= bound;
        self
    }
}
