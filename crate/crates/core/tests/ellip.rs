use std::f64::consts::{FRAC_PI_2, PI};

use hypwill::ellip::*;
use hypwill::quad::integrate;
use proptest::prelude::*;

fn m(p: f64) -> Modulus {
    Modulus::new(p).unwrap()
}

fn close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (diff {:e})", (a - b).abs());
}

#[test]
fn first_kind_against_quadrature() {
    close(ellint_f(FRAC_PI_2, m(0.0)), FRAC_PI_2, 1e-15, "F(π/2, 0)");
    close(ellint_f(0.0, m(0.7)), 0.0, 0.0, "F(0, p)");
    let oracle = integrate(|t| 1.0 / (1.0 - 0.64 * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-15, 1e-15).unwrap();
    close(ellint_f(FRAC_PI_2, m(0.8)), oracle, 1e-12, "F(π/2, 0.8)");
}

#[test]
fn second_kind_bounds() {
    close(ellint_e(FRAC_PI_2, m(0.0)), FRAC_PI_2, 1e-15, "E(π/2, 0)");
    for p in [0.1, 0.5, 0.9, 0.99] {
        assert!(complete_e(m(p)) > (2.0 - p * p).sqrt(), "E({p}) ≤ √(2−p²)");
    }
    close(complete_e(m(1.0 - 1e-10)), 1.0, 1e-6, "E near p = 1");
}

#[test]
fn third_kind_identities() {
    let p = 0.5;
    close(complete_pi(0.0, m(p)).unwrap(), complete_k(m(p)), 1e-14, "Π(0, p) = K");
    let a2 = 0.7;
    let lhs = complete_pi(a2, m(p)).unwrap() + complete_pi(p * p / a2, m(p)).unwrap();
    let rhs = complete_k(m(p)) + FRAC_PI_2 * (a2 / ((1.0 - a2) * (a2 - p * p))).sqrt();
    close(lhs, rhs, 1e-10, "Π(α²) + Π(p²/α²)");
    assert!(complete_pi(a2, m(p)).unwrap() <= FRAC_PI_2 * (0.7f64 / (0.3 * 0.45)).sqrt());
    assert!(ellint_pi(1.2, 1.5, m(0.5)).is_err(), "pole on the path must be reported");
}

#[test]
fn amplitude_landmarks() {
    close(jacobi_am(0.0, m(0.4)), 0.0, 0.0, "am(0)");
    close(jacobi_am(complete_k(m(0.9)), m(0.9)), FRAC_PI_2, 1e-10, "am(K)");
    close(jacobi_am(2.0 * complete_k(m(0.5)), m(0.5)), PI, 1e-10, "am(2K)");
    let (s, c, d) = jacobi_sn_cn_dn(0.0, m(0.3));
    assert_eq!((s, c, d), (0.0, 1.0, 1.0));
    close(jacobi_sn_cn_dn(complete_k(m(0.9)), m(0.9)).2, (1.0f64 - 0.81).sqrt(), 1e-10, "dn(K)");
    let k = complete_k(m(0.5));
    close(jacobi_sn_cn_dn(4.0 * k + 0.3, m(0.5)).1, jacobi_sn_cn_dn(0.3, m(0.5)).1, 1e-10, "cn period");
}

#[test]
fn k_asymptotics() {
    assert!(complete_k_asymptotics(m(0.99)) < FRAC_PI_2);
    assert!(complete_k_asymptotics(m(1.0 - 1e-8)) < 0.01);
    close(complete_k_asymptotics(m(0.0)), FRAC_PI_2, 1e-15, "p = 0");
}

#[test]
fn complete_integrals_are_monotone() {
    let mut prev = (0.0, f64::INFINITY);
    for i in 0..200 {
        let p = m(i as f64 / 200.0);
        let (k, e) = (complete_k(p), complete_e(p));
        assert!(k > prev.0 && e < prev.1 || i == 0);
        prev = (k, e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn jacobi_derivatives(x in -12.0f64..12.0, p in 0.001f64..0.999) {
        let p = m(p);
        let h = 1e-5;
        let (s, c, d) = jacobi_sn_cn_dn(x, p);
        let (sp, cp, dp) = jacobi_sn_cn_dn(x + h, p);
        let (sm, cm, dm) = jacobi_sn_cn_dn(x - h, p);
        let p2 = p.p() * p.p();
        prop_assert!(((sp - sm) / (2.0 * h) - c * d).abs() < 1e-6);
        prop_assert!(((cp - cm) / (2.0 * h) + s * d).abs() < 1e-6);
        prop_assert!(((dp - dm) / (2.0 * h) + p2 * s * c).abs() < 1e-6);
        let da = (jacobi_am(x + h, p) - jacobi_am(x - h, p)) / (2.0 * h);
        prop_assert!((da - d).abs() < 1e-6);
        prop_assert!((s * s + c * c - 1.0).abs() < 1e-12);
        prop_assert!((d * d + p2 * s * s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_inverts_first_kind(t in -1.0f64..1.0, p in 0.001f64..0.999) {
        let p = m(p);
        let x = 4.0 * complete_k(p) * t;
        let phi = jacobi_am(x, p);
        prop_assert!((ellint_f(phi, p) - x).abs() < 1e-10);
    }

    #[test]
    fn legendre_relation(p in 0.001f64..0.999) {
        let (a, b) = (m(p), m(m(p).complement()));
        let v = complete_e(a) * complete_k(b) + complete_e(b) * complete_k(a) - complete_k(a) * complete_k(b);
        prop_assert!((v - FRAC_PI_2).abs() < 1e-10);
    }
}
