use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Method, QuadratureResult, QuadratureSpec};

pub const MAX_QMC_DIM: usize = 8;
const PRIMES: [u64; MAX_QMC_DIM] = [2, 3, 5, 7, 11, 13, 17, 19];
const REPLICATES: usize = 8;
const INITIAL_POINTS: u64 = 4096;

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// Randomly shifted Halton estimate over the unit cube `[0,1)^dim`.
///
/// The point count per replicate doubles until the standard error of the
/// replicate means meets the spec's tolerance or the evaluation budget
/// runs out. Identical specs give bit-identical results.
pub fn qmc_unit<F>(f: F, spec: &QuadratureSpec) -> crate::Result<QuadratureResult>
where
    F: Fn(&[f64]) -> f64,
{
    spec.validate()?;
    let dim = spec.dimension;
    if dim > MAX_QMC_DIM {
        return Err(crate::Error::Domain(format!(
            "quasi-Monte Carlo supports at most {MAX_QMC_DIM} dimensions, got {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shifts: Vec<Vec<f64>> = (0..REPLICATES)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();

    let mut sums = [0.0f64; REPLICATES];
    let mut done = 0u64;
    let mut target = INITIAL_POINTS;
    let mut point = vec![0.0; dim];
    loop {
        for (rep, shift) in shifts.iter().enumerate() {
            let mut acc = 0.0;
            for i in done..target {
                for (d, x) in point.iter_mut().enumerate() {
                    let u = radical_inverse(i + 1, PRIMES[d]) + shift[d];
                    *x = if u >= 1.0 { u - 1.0 } else { u };
                }
                acc += f(&point);
            }
            sums[rep] += acc;
        }
        done = target;
        let n = done as f64;
        let means: Vec<f64> = sums.iter().map(|s| s / n).collect();
        let mean = means.iter().sum::<f64>() / REPLICATES as f64;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>()
            / (REPLICATES as f64 - 1.0);
        let std_err = (var / REPLICATES as f64).sqrt();
        let evaluations = done * REPLICATES as u64;
        let bound = spec.abs_tol.max(spec.rel_tol * mean.abs());
        let ok = std_err.is_finite() && std_err <= bound;
        if ok || 2 * evaluations > spec.max_evals {
            let res = QuadratureResult {
                value: mean,
                error_estimate: if std_err.is_nan() { f64::INFINITY } else { std_err },
                evaluations,
                converged: ok,
                method: Method::QuasiMonteCarlo,
                radius: None,
            };
            return Ok(res.finish(spec));
        }
        target *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn smooth_product_converges() {
        let spec = QuadratureSpec::new(5, 1.0).with_tolerances(1e-5, 1e-8).with_seed(3);
        let r = qmc_unit(|x: &[f64]| x.iter().map(|v| 2.0 * v).product(), &spec).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-4);
        assert_eq!(r.method, Method::QuasiMonteCarlo);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let spec = QuadratureSpec::new(3, 1.0).with_tolerances(1e-4, 1e-8).with_seed(11);
        let f = |x: &[f64]| (x[0] * x[1] + x[2]).sin();
        let a = qmc_unit(f, &spec).unwrap();
        let b = qmc_unit(f, &spec).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error_estimate.to_bits(), b.error_estimate.to_bits());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let spec = QuadratureSpec::new(2, 1.0)
            .with_tolerances(1e-14, 1e-16)
            .with_max_evals(100_000);
        let r = qmc_unit(|x: &[f64]| (1.0 / x[0].max(1e-12)).sqrt(), &spec).unwrap();
        assert!(!r.converged);
        assert!(r.evaluations <= 100_000);
    }
}
