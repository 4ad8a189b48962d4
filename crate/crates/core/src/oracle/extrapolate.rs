use crate::{Error, Result};

/// Least-squares fit `a + bε + cε²` to regulated values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegulatorFit {
    pub limit: f64,
    pub slope: f64,
    pub curvature: f64,
    /// Root-sum-square of the fit residuals.
    pub residual: f64,
}

/// Extrapolates `(ε, value)` pairs to ε → 0 with a quadratic least-squares
/// fit; the fit residual is the error estimate.
///
/// Solved by modified Gram–Schmidt on ε scaled to unit maximum, which keeps
/// the 3-column design matrix well conditioned for geometric schedules.
pub fn regulator_limit(values_at_eps: &[(f64, f64)]) -> Result<RegulatorFit> {
    let n = values_at_eps.len();
    if n < 3 {
        return Err(Error::Domain(format!("need at least 3 regulator values, got {n}")));
    }
    if values_at_eps.iter().any(|(e, v)| !(*e > 0.0) || !e.is_finite() || !v.is_finite()) {
        return Err(Error::Domain("regulator values must be finite with ε > 0".into()));
    }
    if values_at_eps.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        if values_at_eps.iter().all(|(e, _)| *e == values_at_eps[0].0) {
            return Err(Error::RankDeficient);
        }
        return Err(Error::Domain("ε schedule must be strictly decreasing".into()));
    }
    let scale = values_at_eps[0].0;
    let mut cols: [Vec<f64>; 3] = [
        vec![1.0; n],
        values_at_eps.iter().map(|(e, _)| e / scale).collect(),
        values_at_eps.iter().map(|(e, _)| (e / scale).powi(2)).collect(),
    ];
    let y: Vec<f64> = values_at_eps.iter().map(|(_, v)| *v).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut r = [[0.0f64; 3]; 3];
    for j in 0..3 {
        for i in 0..j {
            let rij = dot(&cols[i], &cols[j]);
            r[i][j] = rij;
            let (lo, hi) = cols.split_at_mut(j);
            for (c, q) in hi[0].iter_mut().zip(&lo[i]) {
                *c -= rij * q;
            }
        }
        let norm = dot(&cols[j], &cols[j]).sqrt();
        if !(norm > 1e-13 * (n as f64).sqrt()) {
            return Err(Error::RankDeficient);
        }
        r[j][j] = norm;
        cols[j].iter_mut().for_each(|c| *c /= norm);
    }
    let qty: Vec<f64> = cols.iter().map(|q| dot(q, &y)).collect();
    let mut coef = [0.0f64; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| r[i][k] * coef[k]).sum();
        coef[i] = (qty[i] - s) / r[i][i];
    }
    let residual = values_at_eps
        .iter()
        .map(|(e, v)| {
            let x = e / scale;
            (v - (coef[0] + coef[1] * x + coef[2] * x * x)).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    Ok(RegulatorFit {
        limit: coef[0],
        slope: coef[1] / scale,
        curvature: coef[2] / (scale * scale),
        residual,
    })
}
