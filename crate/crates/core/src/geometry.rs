//! Metric of the spinning point source, its two vierbein factorizations and
//! the first-order interaction operator H_I obtained from them.
//!
//! Coordinates are ordered `(t, x, y)`; the frame metric is
//! η = diag(1, −1, −1).

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

pub const DEFAULT_R_MIN: f64 = 1e-6;
const ETA: [f64; 3] = [1.0, -1.0, -1.0];

/// Spin length λ of the source, with 2πλ = κJ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpinParameter {
    lambda: f64,
}

impl SpinParameter {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda >= 0.0 {
            Ok(Self { lambda })
        } else {
            Err(Error::Domain(format!("lambda must be finite and >= 0, got {lambda}")))
        }
    }

    pub fn from_kappa_times_j(kappa_j: f64) -> Result<Self> {
        Self::new(kappa_j / TAU)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kappa_times_j(&self) -> f64 {
        TAU * self.lambda
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn r(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Metric3 {
    pub variant: Variant,
    pub components: [[f64; 3]; 3],
}

/// Which of the two tabulated vierbein sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SetId {
    One,
    Two,
}

impl SetId {
    pub fn number(self) -> u8 {
        match self {
            SetId::One => 1,
            SetId::Two => 2,
        }
    }
}

impl TryFrom<u8> for SetId {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(SetId::One),
            2 => Ok(SetId::Two),
            other => Err(Error::InvalidSet(other)),
        }
    }
}

/// Both tables of one vierbein set at a point. Row index is the frame index.
///
/// The two tables factorize g^{μν} and g_{μν} separately; they are not
/// mutual inverses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VierbeinSet {
    pub set_id: SetId,
    /// e_a^μ
    pub frame_to_coord: [[f64; 3]; 3],
    /// e^a_μ
    pub coord_to_frame: [[Complex64; 3]; 3],
}

impl VierbeinSet {
    /// η^{ab} e_a^α e_b^β
    pub fn reconstruct_upper(&self) -> [[f64; 3]; 3] {
        let e = &self.frame_to_coord;
        let mut g = [[0.0; 3]; 3];
        for (al, row) in g.iter_mut().enumerate() {
            for (be, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|a| ETA[a] * e[a][al] * e[a][be]).sum();
            }
        }
        g
    }

    /// η_{ab} e^a_α e^b_β
    pub fn reconstruct_lower(&self) -> [[Complex64; 3]; 3] {
        let e = &self.coord_to_frame;
        let mut g = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (al, row) in g.iter_mut().enumerate() {
            for (be, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|a| e[a][al] * e[a][be] * ETA[a]).sum();
            }
        }
        g
    }
}

/// H_I = c1·p1 + c2·p2 with p_i = −i∂_i.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstOrderOperator {
    pub c1: Complex64,
    pub c2: Complex64,
}

/// Deviations of one vierbein set from the metric at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ReconstructionCheck {
    pub upper: f64,
    pub lower: f64,
    pub lower_imag: f64,
}

/// Geometry evaluator with a configurable exclusion radius around the source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry {
    pub r_min: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self { r_min: DEFAULT_R_MIN }
    }
}

impl Geometry {
    pub fn new(r_min: f64) -> Result<Self> {
        if r_min.is_finite() && r_min >= 0.0 {
            Ok(Self { r_min })
        } else {
            Err(Error::Domain(format!("r_min must be finite and >= 0, got {r_min}")))
        }
    }

    pub fn check_point(&self, pt: PlanePoint) -> Result<f64> {
        let r = pt.r();
        if r.is_finite() && r > self.r_min {
            Ok(r)
        } else {
            Err(Error::Domain(format!(
                "point ({}, {}) has r = {r:e}, not above r_min = {:e}",
                pt.x, pt.y, self.r_min
            )))
        }
    }

    pub fn metric_upper(&self, pt: PlanePoint, sp: SpinParameter) -> Result<Metric3> {
        let r = self.check_point(pt)?;
        let l = sp.lambda();
        let r2 = r * r;
        let g01 = -l * pt.y / r2;
        let g02 = l * pt.x / r2;
        Ok(Metric3 {
            variant: Variant::Upper,
            components: [
                [1.0 - l * l / r2, g01, g02],
                [g01, -1.0, 0.0],
                [g02, 0.0, -1.0],
            ],
        })
    }

    pub fn metric_lower(&self, pt: PlanePoint, sp: SpinParameter) -> Result<Metric3> {
        let r = self.check_point(pt)?;
        let l = sp.lambda();
        let r2 = r * r;
        let (ax, ay) = (l * pt.x / r2, l * pt.y / r2);
        Ok(Metric3 {
            variant: Variant::Lower,
            components: [
                [1.0, -ay, ax],
                [-ay, -1.0 + ay * ay, -ax * ay],
                [ax, -ax * ay, -1.0 + ax * ax],
            ],
        })
    }

    /// max |g_{μα} g^{αν} − δ_μ^ν|
    pub fn check_metric_pair(&self, pt: PlanePoint, sp: SpinParameter) -> Result<f64> {
        let lo = self.metric_lower(pt, sp)?.components;
        let up = self.metric_upper(pt, sp)?.components;
        let mut worst = 0.0f64;
        for (mu, row) in lo.iter().enumerate() {
            for nu in 0..3 {
                let s: f64 = (0..3).map(|al| row[al] * up[al][nu]).sum();
                let delta = if mu == nu { 1.0 } else { 0.0 };
                worst = worst.max((s - delta).abs());
            }
        }
        Ok(worst)
    }

    pub fn vierbeins(&self, set: SetId, pt: PlanePoint, sp: SpinParameter) -> Result<VierbeinSet> {
        self.check_point(pt)?;
        Ok(vierbein_fields(set, pt.x, pt.y, sp.lambda()))
    }

    pub fn reconstruction(&self, set: SetId, pt: PlanePoint, sp: SpinParameter) -> Result<ReconstructionCheck> {
        let v = self.vierbeins(set, pt, sp)?;
        let up = self.metric_upper(pt, sp)?.components;
        let lo = self.metric_lower(pt, sp)?.components;
        let ru = v.reconstruct_upper();
        let rl = v.reconstruct_lower();
        let mut out = ReconstructionCheck::default();
        for i in 0..3 {
            for j in 0..3 {
                out.upper = out.upper.max((ru[i][j] - up[i][j]).abs());
                out.lower = out.lower.max((rl[i][j].re - lo[i][j]).abs());
                out.lower_imag = out.lower_imag.max(rl[i][j].im.abs());
            }
        }
        Ok(out)
    }

    /// Closed-form coefficients of H_I for each set.
    pub fn hi_coefficients_closed(&self, set: SetId, pt: PlanePoint, sp: SpinParameter) -> Result<FirstOrderOperator> {
        let r = self.check_point(pt)?;
        let (x, y, l) = (pt.x, pt.y, sp.lambda());
        Ok(match set {
            SetId::One => {
                let r3 = r * r * r;
                FirstOrderOperator {
                    c1: Complex64::new(-x * l, -x * y) / r3,
                    c2: Complex64::new(-l * y, x * x) / r3,
                }
            }
            SetId::Two => {
                let r4 = (r * r) * (r * r);
                FirstOrderOperator {
                    c1: Complex64::new(l * ((x * x - y * y) / r4), 0.0),
                    c2: Complex64::new(l * (2.0 * x * y / r4), 0.0),
                }
            }
        })
    }

    /// H_I from central differences of the vierbein fields.
    ///
    /// With T^n the vector multiplying ∂_n, H_I = T^n ∂_n and so c_n = i·T^n.
    /// Set 1 differentiates the frame-to-coordinate table,
    /// T^n = e^a_m ∂_m e_a^n; Set 2 differentiates the coordinate-to-frame
    /// table, T^n = e_a^m ∂_m e^a_n. Sums run over spatial m, n only.
    pub fn hi_coefficients_derived(
        &self,
        set: SetId,
        pt: PlanePoint,
        sp: SpinParameter,
        h: f64,
    ) -> Result<FirstOrderOperator> {
        let r = self.check_point(pt)?;
        if !(h > 0.0) || !(r > 10.0 * h) {
            return Err(Error::Domain(format!("step h = {h:e} too large for r = {r:e}")));
        }
        let l = sp.lambda();
        let at = |dx: f64, dy: f64| vierbein_fields(set, pt.x + dx, pt.y + dy, l);
        let here = at(0.0, 0.0);
        // grads[m-1] holds the derivative of both tables along coordinate m.
        let grads = [(h, 0.0), (0.0, h)].map(|(dx, dy)| {
            let p = at(dx, dy);
            let m = at(-dx, -dy);
            let mut up = [[0.0; 3]; 3];
            let mut lo = [[Complex64::new(0.0, 0.0); 3]; 3];
            for a in 0..3 {
                for mu in 0..3 {
                    up[a][mu] = (p.frame_to_coord[a][mu] - m.frame_to_coord[a][mu]) / (2.0 * h);
                    lo[a][mu] = (p.coord_to_frame[a][mu] - m.coord_to_frame[a][mu]) / (2.0 * h);
                }
            }
            (up, lo)
        });
        let mut t = [Complex64::new(0.0, 0.0); 2];
        for (n, tn) in t.iter_mut().enumerate() {
            for a in 0..3 {
                for m in 0..2 {
                    let (dup, dlo) = &grads[m];
                    *tn += match set {
                        SetId::One => here.coord_to_frame[a][m + 1] * dup[a][n + 1],
                        SetId::Two => dlo[a][n + 1] * here.frame_to_coord[a][m + 1],
                    };
                }
            }
        }
        let i = Complex64::new(0.0, 1.0);
        Ok(FirstOrderOperator {
            c1: i * t[0],
            c2: i * t[1],
        })
    }
}

/// Finite-difference step used by default: 1e-5·max(1, r).
pub fn default_step(pt: PlanePoint) -> f64 {
    1e-5 * pt.r().max(1.0)
}

fn vierbein_fields(set: SetId, x: f64, y: f64, l: f64) -> VierbeinSet {
    let r = x.hypot(y);
    let r2 = r * r;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let z = c(0.0, 0.0);
    match set {
        SetId::One => VierbeinSet {
            set_id: set,
            frame_to_coord: [
                [1.0, 0.0, 0.0],
                [-l / r, -y / r, x / r],
                [0.0, x / r, y / r],
            ],
            coord_to_frame: [
                [z, c(0.0, 1.0), z],
                [c(0.0, -1.0), c(0.0, l * y / r2), c(0.0, -l * x / r2)],
                [z, z, c(1.0, 0.0)],
            ],
        },
        SetId::Two => VierbeinSet {
            set_id: set,
            frame_to_coord: [
                [1.0, 0.0, 0.0],
                [l * x / r2, 0.0, -1.0],
                [l * y / r2, 1.0, 0.0],
            ],
            coord_to_frame: [
                [z, c(0.0, -FRAC_1_SQRT_2), c(0.0, FRAC_1_SQRT_2)],
                [c(0.0, -1.0), c(0.0, l * y / r2), c(0.0, -l * x / r2)],
                [z, c(-FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
            ],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Geometry {
        Geometry::default()
    }

    fn sp(l: f64) -> SpinParameter {
        SpinParameter::new(l).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn upper_metric_values() {
        let m = g().metric_upper(PlanePoint::new(1.0, 0.0), sp(0.0)).unwrap();
        assert_eq!(m.components, [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]);
        let m = g().metric_upper(PlanePoint::new(1.0, 0.0), sp(1.0)).unwrap().components;
        assert_eq!(m[0], [0.0, 0.0, 1.0]);
        assert_eq!((m[1][1], m[1][2], m[2][2]), (-1.0, 0.0, -1.0));
        let m = g().metric_upper(PlanePoint::new(0.0, 2.0), sp(2.0)).unwrap().components;
        assert_eq!(m[0], [0.0, -1.0, 0.0]);
    }

    #[test]
    fn lower_metric_values() {
        let m = g().metric_lower(PlanePoint::new(0.0, 2.0), sp(2.0)).unwrap().components;
        assert_eq!(m, [[1.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);
        assert_eq!(g().check_metric_pair(PlanePoint::new(1.0, 0.0), sp(0.0)).unwrap(), 0.0);
        assert!(g().check_metric_pair(PlanePoint::new(3.0, 4.0), sp(1.0)).unwrap() < 1e-12);
        assert!(g().check_metric_pair(PlanePoint::new(0.5, -0.2), sp(2.0)).unwrap() < 1e-12);
    }

    #[test]
    fn origin_is_excluded() {
        assert!(g().metric_upper(PlanePoint::new(0.0, 5e-7), sp(1.0)).is_err());
        assert!(Geometry::new(1e-8).unwrap().metric_upper(PlanePoint::new(0.0, 5e-7), sp(1.0)).is_ok());
        assert_eq!(SetId::try_from(3), Err(Error::InvalidSet(3)));
    }

    #[test]
    fn vierbein_entries() {
        let v = g().vierbeins(SetId::One, PlanePoint::new(1.0, 0.0), sp(2.0)).unwrap();
        assert_eq!(v.frame_to_coord[1][0], -2.0);
        assert_eq!(v.frame_to_coord[1][1], 0.0);
        assert_eq!(v.frame_to_coord[2][1], 1.0);
        let v = g().vierbeins(SetId::Two, PlanePoint::new(0.0, 1.0), sp(3.0)).unwrap();
        assert_eq!(v.frame_to_coord[1][0], 0.0);
        assert_eq!(v.frame_to_coord[2][0], 3.0);
        assert_eq!(v.frame_to_coord[2][1], 1.0);
        let v = g().vierbeins(SetId::One, PlanePoint::new(1.0, 0.0), sp(1.0)).unwrap();
        assert_eq!(v.reconstruct_lower()[0][1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn tables_are_not_mutual_inverses() {
        let v = g().vierbeins(SetId::One, PlanePoint::new(1.0, 0.5), sp(0.5)).unwrap();
        let d00: Complex64 = (0..3).map(|mu| v.coord_to_frame[0][mu] * v.frame_to_coord[0][mu]).sum();
        assert_eq!(d00, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn closed_coefficients() {
        let h = g().hi_coefficients_closed(SetId::One, PlanePoint::new(1.0, 0.0), sp(3.0)).unwrap();
        assert_eq!(h.c1, Complex64::new(-3.0, 0.0));
        assert_eq!(h.c2, Complex64::new(0.0, 1.0));
        let h = g().hi_coefficients_closed(SetId::Two, PlanePoint::new(1.0, 1.0), sp(2.0)).unwrap();
        assert!(close(h.c1, Complex64::new(0.0, 0.0), 1e-15));
        assert!(close(h.c2, Complex64::new(1.0, 0.0), 1e-15));
        let h = g().hi_coefficients_closed(SetId::Two, PlanePoint::new(0.3, -2.0), sp(0.0)).unwrap();
        assert_eq!(h.c1.norm() + h.c2.norm(), 0.0);
    }

    #[test]
    fn derived_coefficients_match() {
        let pt = PlanePoint::new(1.0, 1.0);
        let d = g().hi_coefficients_derived(SetId::Two, pt, sp(2.0), 1e-5).unwrap();
        assert!(close(d.c1, Complex64::new(0.0, 0.0), 1e-6));
        assert!(close(d.c2, Complex64::new(1.0, 0.0), 1e-6));
        let pt = PlanePoint::new(2.0, 0.0);
        let d = g().hi_coefficients_derived(SetId::Two, pt, sp(1.0), default_step(pt)).unwrap();
        // −λ(y²−x²)/r⁴ = 4/16
        assert!(close(d.c1, Complex64::new(0.25, 0.0), 1e-6));
        let d = g().hi_coefficients_derived(SetId::Two, pt, sp(0.0), default_step(pt)).unwrap();
        assert!(d.c1.norm() + d.c2.norm() < 1e-10);
        let pt = PlanePoint::new(1.0, 0.0);
        let d = g().hi_coefficients_derived(SetId::One, pt, sp(3.0), default_step(pt)).unwrap();
        assert!(close(d.c1, Complex64::new(-3.0, 0.0), 1e-6));
        assert!(close(d.c2, Complex64::new(0.0, 1.0), 1e-6));
    }

    #[test]
    fn derived_step_guard() {
        let pt = PlanePoint::new(1e-3, 0.0);
        assert!(g().hi_coefficients_derived(SetId::Two, pt, sp(1.0), 1e-3).is_err());
        assert!(g().hi_coefficients_derived(SetId::Two, pt, sp(1.0), -1.0).is_err());
    }

    #[test]
    fn kappa_round_trip() {
        let s = sp(0.731);
        let back = SpinParameter::from_kappa_times_j(s.kappa_times_j()).unwrap();
        assert!((back.lambda() - 0.731).abs() <= f64::EPSILON);
        assert!(SpinParameter::new(-1.0).is_err());
        assert!(SpinParameter::new(f64::NAN).is_err());
    }
}
