use std::f64::consts::PI;

use hypwill::elastica::*;
use hypwill::ellip::{self, Modulus};
use hypwill::flow::elastica_residual;
use hypwill::hyp2::{elastic_energy, CurveGeometry, FdOrder};
use hypwill::quad::integrate;
use hypwill::scenarios::perturbed_geodesic;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (diff {:e})", (a - b).abs());
}

fn window(p: &ElasticaParams) -> (f64, f64) {
    let h = p.half_period();
    if h.is_finite() {
        (p.s_star - 2.0 * h, p.s_star + 2.0 * h)
    } else {
        (p.s_star - 3.0, p.s_star + 3.0)
    }
}

#[test]
fn coefficient_system_by_substitution() {
    for (k0, lambda, y) in [(2f64.sqrt(), 0.0, 1.0), (1.9, 0.2, 0.7), (2.5, 0.1, 2.0), (-3.0, 0.4, 1.3)] {
        let p = ElasticaParams::new(k0, lambda, y).unwrap();
        let (a, c) = if p.family == Family::Circular {
            canonical_coefficients(&p, y).unwrap()
        } else {
            (p.a, p.c)
        };
        close(a * c, -(lambda * lambda + 4.0 * p.c_int) / 4.0, 1e-12, "ac");
        close(-a * y * y + c, (k0 * k0 - lambda) * y, 1e-12, "−ay² + c");
    }
}

#[test]
fn tangent_identity_against_differences() {
    let p = ElasticaParams::wave_like(0.9, 0.1, 1.0).unwrap();
    let h = 1e-4;
    for s in [-1.3, -0.2, 0.4, 1.7] {
        let pts = evaluate(&p, &[s - h, s, s + h]).unwrap();
        let fd = ((pts[2].0 - pts[0].0) / (2.0 * h), (pts[2].1 - pts[0].1) / (2.0 * h));
        let t = tangent_at(&p, s, pts[1]);
        assert!((t.re - fd.0).abs() < 1e-6 && (t.im - fd.1).abs() < 1e-6, "s = {s}: {t} vs {fd:?}");
    }
}

#[test]
fn emitted_curvature_matches_profile() {
    let p = ElasticaParams::wave_like(0.9, 0.1, 1.0).unwrap();
    let (a, b) = window(&p);
    let c = parametrize(&p, a, b, 800).unwrap();
    let g = CurveGeometry::compute(&c, FdOrder::Fourth).unwrap();
    for i in 2..798 {
        close(g.kappa[i], curvature_profile(&p, c.params()[i]), 1e-5, "κ");
    }
    let k = ellip::complete_k(Modulus::new(p.p).unwrap());
    close(curvature_profile(&p, p.s_star + k / p.r), 0.0, 1e-12, "κ at first zero of cn");
    let o = ElasticaParams::orbit_like(0.6, 0.0, 1.0).unwrap();
    let k = ellip::complete_k(Modulus::new(0.6).unwrap());
    close(curvature_profile(&o, o.s_star + k / o.r), o.kappa0 * (1.0f64 - 0.36).sqrt(), 1e-12, "dn(K)");
    close(curvature_profile(&ElasticaParams::circular(0.0, 1.0).unwrap(), 3.7), 2f64.sqrt(), 1e-15, "circle");
}

#[test]
fn first_integral_detects_non_elastica() {
    let c = perturbed_geodesic(0.4, 400).unwrap();
    assert!(first_integral_residual(&c, 0.0).unwrap() > 1e-2);
    assert!(elastica_residual(&c, 0.0).unwrap() > 1e-2);
    let clifford = ElasticaParams::circular(0.0, 1.0).unwrap();
    let (vals, mean) = first_integral_values(&parametrize(&clifford, -2.0, 2.0, 400).unwrap(), 0.0).unwrap();
    assert!(vals.iter().all(|v| (v - mean).abs() < 1e-4));
    close(mean, -1.0, 1e-4, "C of the Clifford circle");
}

#[test]
fn figure_eight_sequence() {
    let mut prev: Option<ElasticaParams> = None;
    for lambda in [0.4, 0.2, 0.1, 0.05] {
        let p = figure_eight_solve(lambda).unwrap();
        p.check_invariants().unwrap();
        assert!(figure_eight_condition(p.p, lambda).unwrap().abs() < 1e-10);
        let t = figure_eight_tangent(&p).unwrap();
        close(t.ratio, t.predicted_ratio, 1e-8 * t.ratio.abs().max(1.0), "tangent ratio");
        if lambda == 0.4 {
            assert!(t.tangent.vx < 0.0, "Re γ′(K/r) must be negative");
        }
        if let Some(q) = prev {
            assert!(p.p > q.p && (p.r - 1.0).abs() < (q.r - 1.0).abs());
            assert!((1.0 - p.p * p.p) / (lambda * lambda) > (1.0 - q.p * q.p) / (q.lambda * q.lambda));
            assert!(figure_eight_segment_energy(&p) < figure_eight_segment_energy(&q));
        }
        prev = Some(p);
    }
    assert!(figure_eight_solve(figure_eight_lambda_max() + 0.01).is_err());
}

#[test]
fn figure_eight_segment_is_symmetric_and_closes() {
    let p = figure_eight_solve(0.1).unwrap();
    let c = figure_eight_segment(&p, 801).unwrap();
    let n = c.len();
    for i in 0..n {
        let (a, b) = (c.nodes()[i], c.nodes()[n - 1 - i]);
        assert!((a.x + b.x).abs() < 1e-6 && (a.y - b.y).abs() < 1e-6, "node {i}");
    }
    let e = figure_eight_segment_energy(&p);
    assert!(e > 8.0 && e < 8.8);
    close(elastic_energy(&c).unwrap(), e, 1e-4, "discrete vs closed-form energy");
}

#[test]
fn closing_multiplicity_bounds() {
    let p = ElasticaParams::orbit_like(0.9, 0.0, 1.0).unwrap();
    let k = p.half_period();
    let full = closing_multiplicity(&p, p.s_star - 2.0 * k, p.s_star + 2.0 * k).unwrap();
    assert!(full < 1.0 + closing_eta(0.9).unwrap(), "{full}");

    // oracle: the arc-length integral √(−C)/π ∫ κ²/(4C + 4κ²) ds by adaptive quadrature
    let q = ElasticaParams::orbit_like(0.5, 0.0, 1.0).unwrap();
    let beta = q.s_star + 4.0 * q.half_period();
    let cc = q.c_int;
    let oracle = (-cc).sqrt() / PI
        * integrate(|s| {
            let k = curvature_profile(&q, s);
            k * k / (4.0 * cc + 4.0 * k * k)
        }, q.s_star, beta, 1e-14, 1e-13)
        .unwrap();
    close(closing_multiplicity(&q, q.s_star, beta).unwrap(), oracle, 1e-10, "window (0, 2π)");
    close(closing_multiplicity_window(0.5, 0.0, 2.0 * PI).unwrap(), oracle, 1e-10, "amplitude form");
}

#[test]
fn orbit_like_energy_against_the_curve() {
    let p = ElasticaParams::orbit_like(0.9, 0.0, 1.0).unwrap();
    let beta = p.s_star + 2.0 * p.half_period();
    let c = parametrize(&p, p.s_star, beta, 1200).unwrap();
    close(orbitlike_segment_energy(&p, p.s_star, beta).unwrap(), elastic_energy(&c).unwrap(), 1e-4, "E over (0, π)");
    assert_eq!(orbitlike_segment_energy(&p, 0.3, 0.3).unwrap(), 0.0);
    close(orbitlike_window_energy(0.9, 0.0, PI).unwrap(), orbitlike_segment_energy(&p, p.s_star, beta).unwrap(), 1e-12, "window form");
}

#[test]
fn heart_gap_is_positive() {
    for p in [0.2, 0.6, 0.95] {
        let d = heart_delta(p).unwrap();
        assert!(closing_multiplicity_window(p, -d, PI + d).unwrap() < 1.0);
        assert!(heart_energy_gap(p).unwrap() > 0.0);
    }
    assert!(heart_gap_for_delta(1e-12) < 1e-11);
}

fn any_elastica() -> impl Strategy<Value = (f64, f64, f64)> {
    // (κ₀, λ, y) with κ₀² spread over the orbit-like, wave-like and near-critical ranges
    (0.0f64..0.8, 0.02f64..1.0, prop_oneof![Just(1.0), Just(-1.0)], 0.3f64..3.0).prop_map(|(lambda, t, sign, y)| {
        let k2 = (lambda + 2.0) * (1.0 + 2.5 * t);
        (sign * k2.sqrt(), lambda, y)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn constructors_satisfy_family_relations((k0, lambda, y) in any_elastica()) {
        let p = ElasticaParams::new(k0, lambda, y).unwrap();
        p.check_invariants().unwrap();
        let f = classify(k0 * k0, lambda).unwrap();
        prop_assert_eq!(f.family, p.family);
    }

    #[test]
    fn parametrized_elastica_are_unit_speed_and_solve_the_equation((k0, lambda, _y) in any_elastica()) {
        let p = ElasticaParams::canonical(k0, lambda).unwrap();
        let (a, b) = window(&p);
        let m = ((b - a) * 1000.0).ceil() as usize;
        let s: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
        prop_assert!(speed_defect(&p, &s).unwrap() < 1e-6);
        let c = parametrize(&p, a, b, 800).unwrap();
        prop_assert!(first_integral_residual(&c, lambda).unwrap() < 1e-4);
        prop_assert!(elastica_residual(&c, lambda).unwrap() < 1e-3);
    }

    #[test]
    fn curvature_has_the_elliptic_periods(pm in 0.75f64..0.99, lambda in 0.0f64..0.5, s in -3.0f64..3.0) {
        let w = ElasticaParams::wave_like(pm, lambda, 1.0).unwrap();
        let kw = ellip::complete_k(Modulus::new(pm).unwrap()) / w.r;
        prop_assert!((curvature_profile(&w, s + 4.0 * kw) - curvature_profile(&w, s)).abs() < 1e-10);
        let o = ElasticaParams::orbit_like(pm, lambda, 1.0).unwrap();
        let ko = ellip::complete_k(Modulus::new(pm).unwrap()) / o.r;
        prop_assert!((curvature_profile(&o, s + 2.0 * ko) - curvature_profile(&o, s)).abs() < 1e-10);
    }

    #[test]
    fn closing_logic_rejects_wave_like(pm in 0.72f64..0.99, lambda in 0.0f64..0.5, a in -2.0f64..0.0, len in 0.1f64..4.0) {
        let w = ElasticaParams::wave_like(pm, lambda, 1.0).unwrap();
        prop_assert!(closing_multiplicity(&w, a, a + len).is_err());
    }
}
