mod common;

use std::f64::consts::PI;

use common::{adaptive, cx, richardson};
use num_complex::Complex64;
use proptest::prelude::*;
use star_spectral::kernel::{self, SpectralPoint};

fn complex_lambda() -> impl Strategy<Value = Complex64> {
    (-60.0..400.0f64, -30.0..30.0f64).prop_map(|(re, im)| cx(re, im))
}

fn complex_h() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -2.0..2.0f64).prop_map(|(re, im)| cx(re, im))
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn evenness_in_rho(x in 0.0..PI, lam in complex_lambda(), h in complex_h(), l in 0usize..12) {
        let r = lam.sqrt();
        let a = SpectralPoint::from_rho(r);
        let b = SpectralPoint::from_rho(-r);
        prop_assert!(close(a.phi(x, h), b.phi(x, h), 1e-13));
        prop_assert!(close(a.phi_x(x, h), b.phi_x(x, h), 1e-13));
        prop_assert!(close(kernel::cos_moment_at(l, &a, h), kernel::cos_moment_at(l, &b, h), 1e-13));
        let da = kernel::phi_derivatives(x, &a, h, 3);
        let db = kernel::phi_derivatives(x, &b, h, 3);
        for (p, q) in da.iter().zip(&db) {
            prop_assert!(close(*p, *q, 1e-12));
        }
    }

    #[test]
    fn smooth_at_the_origin(x in 0.0..PI, h in complex_h(), er in -1e-6..1e-6f64, ei in -1e-6..1e-6f64) {
        let eps = cx(er, ei);
        let v = kernel::phi(x, eps, h);
        let limit = 1.0 + h * x;
        // next Taylor term is -eps (x^2 / 2 + h x^3 / 6)
        let c = 1.0 + x * x / 2.0 + h.norm() * x.powi(3) / 6.0;
        prop_assert!((v - limit).norm() <= c * eps.norm() + 1e-15);
    }

    #[test]
    fn initial_conditions_are_exact(lam in complex_lambda(), h in complex_h()) {
        prop_assert_eq!(kernel::phi(0.0, lam, h), cx(1.0, 0.0));
        prop_assert_eq!(kernel::phi_x(0.0, lam, h), h);
    }

    #[test]
    fn ode_residual(x in 0.2..(PI - 0.2), lam in complex_lambda(), h in complex_h()) {
        let f = |t: f64| kernel::phi(t, lam, h);
        let s = 1e-3;
        let d2 = (-f(x + 2.0 * s) + 16.0 * f(x + s) - 30.0 * f(x) + 16.0 * f(x - s) - f(x - 2.0 * s)) / (12.0 * s * s);
        let scale = 1.0 + lam.norm() * f(x).norm() + d2.norm();
        prop_assert!((d2 + lam * f(x)).norm() <= 1e-8 * scale, "{}", (d2 + lam * f(x)).norm());
    }

    #[test]
    fn moments_match_adaptive_quadrature(
        lr in -100.0..10_000.0f64, li in -40.0..40.0f64, h in complex_h(), l in 0usize..40
    ) {
        let lam = cx(lr, li);
        let got = kernel::cos_moment(l, lam, h);
        let want = adaptive(|x| (l as f64 * x).cos() * kernel::phi(x, lam, h), 0.0, PI, 1e-14);
        prop_assert!((got - want).norm() <= 1e-10 * (1.0 + want.norm()), "{got} vs {want}");
        let got = kernel::phi_self_inner(lam, h);
        let want = adaptive(|x| kernel::phi(x, lam, h).powi(2), 0.0, PI, 1e-14);
        prop_assert!((got - want).norm() <= 1e-10 * (1.0 + want.norm()), "{got} vs {want}");
    }

    #[test]
    fn cross_inner_matches_quadrature(la in complex_lambda(), lb in complex_lambda(), ha in complex_h(), hb in complex_h()) {
        let got = kernel::phi_cross_inner(la, ha, lb, hb);
        let want = adaptive(|x| kernel::phi(x, la, ha) * kernel::phi(x, lb, hb), 0.0, PI, 1e-14);
        prop_assert!((got - want).norm() <= 1e-9 * (1.0 + want.norm()), "{got} vs {want}");
    }

    #[test]
    fn lambda_derivatives_match_richardson(x in 0.0..PI, lam in complex_lambda(), h in complex_h(), nu in 1usize..=4) {
        let step = 0.2 * lam.sqrt().norm().max(1.0);
        let f = |z: Complex64| kernel::phi(x, z, h);
        let want = richardson(&f, lam, nu, step);
        let got = kernel::phi_dlambda(x, lam, h, nu).unwrap();
        let scale = (0..=nu).map(|k| kernel::phi_dlambda(x, lam, h, k).unwrap().norm()).fold(0.0, f64::max);
        prop_assert!((got - want).norm() <= 1e-7 * scale.max(want.norm()), "nu {nu}: {got} vs {want}");
    }
}

#[test]
fn order_above_the_maximum_is_rejected() {
    assert!(kernel::phi_dlambda(1.0, cx(2.0, 0.0), cx(0.0, 0.0), kernel::NU_MAX + 1).is_err());
}
