use std::f64::consts::PI;

use proptest::prelude::*;
use spinning_zeta::expansion::{kernel_diagonal, p0_factor, zeta_flat_closed, ExpansionConfig, MassSign};
use spinning_zeta::geometry::{Geometry, DEFAULT_R_MIN, PlanePoint, SetId, SpinParameter};
use spinning_zeta::kernel_terms::stable::{bracket_f_direct, bracket_f_series, SERIES_SWITCH};
use spinning_zeta::kernel_terms::{
    j_sum_closed, j_sum_damped, k1_closed, k_product_integrand, k_term_integrand, matrix_element, rel_dev,
    second_order_coefficient, KTerm, Momentum2, SchwingerFrame,
};

fn sp(l: f64) -> SpinParameter {
    SpinParameter::new(l).unwrap()
}

fn momentum() -> impl Strategy<Value = Momentum2> {
    (0.2f64..3.0, 0.0f64..std::f64::consts::TAU).prop_map(|(m, th)| Momentum2::new(m * th.cos(), m * th.sin()))
}

fn third_frame() -> impl Strategy<Value = SchwingerFrame> {
    (0.2f64..3.0, 0.05f64..0.95, 0.05f64..0.95, 0.05f64..0.95)
        .prop_map(|(t, u, u1, u2)| SchwingerFrame::third(t, u, u1, u2).unwrap())
}

fn apart(a: Momentum2, b: Momentum2) -> bool {
    (a.p1 - b.p1).hypot(a.p2 - b.p2) > 0.05
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn j_sum_flips_sign_under_swap(p in momentum(), z in 0.01f64..10.0) {
        prop_assert_eq!(j_sum_closed(p, z).unwrap(), -j_sum_closed(p.swapped(), z).unwrap());
    }

    #[test]
    fn second_order_flips_sign_under_swap(p in momentum(), t in 0.1f64..4.0) {
        let a = second_order_coefficient(p, t, sp(1.0), 1e-10).unwrap();
        let b = second_order_coefficient(p.swapped(), t, sp(1.0), 1e-10).unwrap();
        prop_assert_eq!(a.value, -b.value);
    }

    #[test]
    fn second_order_scales_as_lambda_squared(p in momentum(), t in 0.1f64..4.0, l in 0.1f64..5.0) {
        let a = second_order_coefficient(p, t, sp(l), 1e-10).unwrap().value;
        let b = second_order_coefficient(p, t, sp(2.0 * l), 1e-10).unwrap().value;
        prop_assert!((b - 4.0 * a).abs() <= 1e-14 * b.abs().max(1e-300));
    }

    #[test]
    fn matrix_element_scales_linearly(p in momentum(), r in momentum(), l in 0.1f64..5.0) {
        prop_assume!(apart(p, r));
        let a = matrix_element(p, r, sp(l)).unwrap();
        let b = matrix_element(p, r, sp(2.0 * l)).unwrap();
        prop_assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn third_order_integrands_scale_as_lambda_cubed(
        p in momentum(), r in momentum(), q in momentum(), f in third_frame(), l in 0.1f64..3.0
    ) {
        prop_assume!(apart(p, r) && apart(r, q) && apart(q, p));
        let a = k_product_integrand(p, r, q, &f, sp(l)).unwrap();
        let b = k_product_integrand(p, r, q, &f, sp(2.0 * l)).unwrap();
        prop_assert!((b - 8.0 * a).abs() <= 1e-13 * b.abs().max(1e-300));
        for term in KTerm::ALL {
            let a = k_term_integrand(term, p, r, q, &f, sp(l));
            let b = k_term_integrand(term, p, r, q, &f, sp(2.0 * l));
            prop_assert!((b - 8.0 * a).abs() <= 1e-13 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn product_is_three_matrix_elements(p in momentum(), r in momentum(), q in momentum(), f in third_frame()) {
        prop_assume!(apart(p, r) && apart(r, q) && apart(q, p));
        let s = sp(4.0 * PI);
        let direct = matrix_element(p, r, s).unwrap()
            * matrix_element(r, q, s).unwrap()
            * matrix_element(q, p, s).unwrap()
            * (-f.x() * r.big_p() - f.z() * q.big_p()).exp();
        let v = k_product_integrand(p, r, q, &f, s).unwrap();
        prop_assert!(rel_dev(v, direct) < 1e-12);
    }

    #[test]
    fn bracket_branches_agree_near_switch(k in 0.5f64..2.0, neg in any::<bool>()) {
        let s = if neg { -k * SERIES_SWITCH } else { k * SERIES_SWITCH };
        prop_assert!(rel_dev(bracket_f_series(s), bracket_f_direct(s)) < 1e-10);
    }

    #[test]
    fn damped_forms_stay_finite(log_p in 0.0f64..6.0, th in 0.0f64..6.3, t in 0.1f64..3.0, u in 0.0f64..1.0, u1 in 0.0f64..1.0) {
        let m = 10f64.powf(log_p).sqrt();
        let p = Momentum2::new(m * th.cos(), m * th.sin());
        let f2 = SchwingerFrame::second(t, u, u1).unwrap();
        prop_assert!(j_sum_damped(p, &f2).unwrap().is_finite());
        let f3 = SchwingerFrame::third(t, u.max(0.01), u1.max(0.01), 0.5).unwrap();
        prop_assert!(k1_closed(p, &f3, sp(1.0)).unwrap().is_finite());
    }

    #[test]
    fn reconstructions_hold(r in 0.1f64..10.0, th in 0.0f64..6.3, l in 0.0f64..2.0) {
        let g = Geometry::new(DEFAULT_R_MIN).unwrap();
        let pt = PlanePoint::new(r * th.cos(), r * th.sin());
        for set in [SetId::One, SetId::Two] {
            let c = g.reconstruction(set, pt, sp(l)).unwrap();
            prop_assert!(c.upper < 1e-12 && c.lower < 1e-12 && c.lower_imag < 1e-12);
        }
        prop_assert!(g.check_metric_pair(pt, sp(l)).unwrap() < 1e-12);
    }

    #[test]
    fn flat_zeta_mass_scaling(s in 1.6f64..4.0, m in 0.2f64..3.0) {
        let a = zeta_flat_closed(s, m).unwrap();
        let b = zeta_flat_closed(s, 1.0).unwrap();
        prop_assert!(rel_dev(a, b * m.powf(3.0 - 2.0 * s)) < 1e-13);
    }

    #[test]
    fn time_factor_signs_are_reciprocal(t in 0.01f64..5.0, m in 0.0f64..2.0) {
        let plus = ExpansionConfig { mass: m, ..Default::default() };
        let minus = ExpansionConfig { mass_sign: MassSign::Minus, ..plus.clone() };
        let flat = 1.0 / (4.0 * PI * t);
        let prod = p0_factor(t, &plus).unwrap() * p0_factor(t, &minus).unwrap();
        prop_assert!(rel_dev(prod, flat) < 1e-13);
    }

    #[test]
    fn kernel_order_two_vanishes_on_the_diagonal(a in 0.1f64..3.0, t in 0.1f64..3.0) {
        let cfg = ExpansionConfig { order: 2, ..Default::default() };
        let k = kernel_diagonal(Momentum2::new(a, a), t, &cfg).unwrap();
        prop_assert_eq!(k.order_values[2], 0.0);
        prop_assert!(rel_dev(k.order_values[0], (-2.0 * a * a * t).exp()) < 1e-15);
    }
}
