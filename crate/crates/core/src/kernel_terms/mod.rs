//! Matrix elements of H_I, the second- and third-order momentum integrals of
//! the Schwinger expansion, and their brute-force oracles.
//!
//! All intermediate-state integrals use the measure `d²r` (and `d²r d²q`),
//! and the interaction is the Set 2 operator, which is linear in λ.

mod matrix;
mod report;
mod second_order;
pub mod stable;
mod third_order;

pub use matrix::{
    default_eps_schedule, fourier_oracle, matrix_element, matrix_element_diag, FourierOracle,
};
pub use report::{rel_dev, TermReport};
pub use second_order::{
    j_oracle, j_sum_closed, j_sum_damped, j_sum_oracle, j_sum_printed, second_order_coefficient,
    second_order_nested_oracle, second_order_printed, JIntegrals, SecondOrder,
};
pub use stable::bracket_f;
pub use third_order::{
    c_coefficients, c_sum_alpha_check, i_integrals, k0_reduced, k1_closed, k1_reduced,
    k2_reduced, k3_reduced, k_extra_closed, k_product_integrand, k_term_integrand, k_term_oracle,
    k_term_quadrature, third_order_kernel, CSplit, KTerm, ReducedValue, ThirdOrderKernel,
};

use crate::{Error, Result};

/// Two-component momentum; `big_p()` is p̄² = p1² + p2².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Momentum2 {
    pub p1: f64,
    pub p2: f64,
}

impl Momentum2 {
    pub const fn new(p1: f64, p2: f64) -> Self {
        Self { p1, p2 }
    }

    pub fn big_p(&self) -> f64 {
        self.p1 * self.p1 + self.p2 * self.p2
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.p2, self.p1)
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.p1, self.p2]
    }
}

impl From<[f64; 2]> for Momentum2 {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

/// Proper time and Schwinger parameters of one expansion order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchwingerFrame {
    pub t: f64,
    pub u: f64,
    pub u1: f64,
    pub u2: f64,
    pub order: u8,
}

impl SchwingerFrame {
    pub fn second(t: f64, u: f64, u1: f64) -> Result<Self> {
        Self::validated(t, u, u1, 0.0, 2)
    }

    pub fn third(t: f64, u: f64, u1: f64, u2: f64) -> Result<Self> {
        Self::validated(t, u, u1, u2, 3)
    }

    fn validated(t: f64, u: f64, u1: f64, u2: f64, order: u8) -> Result<Self> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(t > 0.0 && t.is_finite()) || !unit(u) || !unit(u1) || !unit(u2) {
            return Err(Error::Domain(format!(
                "frame needs t > 0 and u, u1, u2 in [0, 1]; got t={t}, u={u}, u1={u1}, u2={u2}"
            )));
        }
        Ok(Self { t, u, u1, u2, order })
    }

    /// Order 2: u·t·(1−u1). Order 3: t·u·u1·(1−u2).
    pub fn z(&self) -> f64 {
        match self.order {
            2 => self.u * self.t * (1.0 - self.u1),
            _ => self.t * self.u * self.u1 * (1.0 - self.u2),
        }
    }

    /// Order 3 only: t·u·(1−u1).
    pub fn x(&self) -> f64 {
        self.t * self.u * (1.0 - self.u1)
    }

    /// Order 2 only: t·(1−u·(1−u1)), formed as t − z so that c + z = t.
    pub fn c(&self) -> f64 {
        self.t - self.z()
    }

    pub(crate) fn require(&self, order: u8) -> Result<()> {
        if self.order == order {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "expected an order-{order} frame, got order {}",
                self.order
            )))
        }
    }
}

/// (a2 − b2)(a2 b1 − a1 b2), the numerator of the non-local part of ⟨a|H_I|b⟩.
pub(crate) fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[1] - b[1]) * (a[1] * b[0] - a[0] * b[1])
}

pub(crate) fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    d0 * d0 + d1 * d1
}

/// cross(a, b) / |a − b|², taken as 0 at exact coincidence where the
/// bounded direction-dependent limit has no single value.
pub(crate) fn kernel_y(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = dist2(a, b);
    if d == 0.0 {
        0.0
    } else {
        cross(a, b) / d
    }
}

/// The brace of ⟨a|H_I|b⟩ without its −λ/4π prefactor.
pub(crate) fn brace(a: [f64; 2], b: [f64; 2]) -> f64 {
    b[0] - 2.0 * kernel_y(a, b)
}
