use std::f64::consts::PI;

use hypwill::hyp2::*;
use hypwill::quad;
use hypwill::scenarios::{self, catenary, circle_arc, clifford_circle, clifford_circle_shape, perturbed_geodesic};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (diff {:e})", (a - b).abs());
}

#[test]
fn catenary_energy_matches_closed_form() {
    let c = catenary(1.0, 1.0, 400).unwrap();
    close(elastic_energy(&c).unwrap(), 8.0 * 1f64.tanh(), 1e-4, "E(catenary)");
}

#[test]
fn graph_formula_on_catenary_and_semicircle() {
    let n = 801;
    let x: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let g: Vec<f64> = x.iter().map(|v| v.cosh()).collect();
    let gp: Vec<f64> = x.iter().map(|v| v.sinh()).collect();
    close(elastic_energy_graph(&x, &g, &gp, &g).unwrap(), 8.0 * 1f64.tanh(), 1e-6, "graph catenary");

    let x: Vec<f64> = (0..n).map(|i| -0.9 + 1.8 * i as f64 / (n - 1) as f64).collect();
    let g: Vec<f64> = x.iter().map(|v| (1.0 - v * v).sqrt()).collect();
    let gp: Vec<f64> = x.iter().zip(&g).map(|(v, w)| -v / w).collect();
    let gpp: Vec<f64> = g.iter().map(|w| -1.0 / w.powi(3)).collect();
    let by_graph = elastic_energy_graph(&x, &g, &gp, &gpp).unwrap();
    let curve = scenarios::graph_curve(|v| (1.0 - v * v).sqrt(), -0.9, 0.9, 400).unwrap();
    close(by_graph, elastic_energy(&curve).unwrap(), 1e-4, "semicircle graph vs curve");
}

#[test]
fn graph_consistency_on_a_wavy_graph() {
    let f = |x: f64| 1.2 + 0.2 * (PI * x).sin().powi(2) + 0.1 * x;
    let fp = |x: f64| 0.2 * PI * (2.0 * PI * x).sin() + 0.1;
    let fpp = |x: f64| 0.4 * PI * PI * (2.0 * PI * x).cos();
    let n = 1601;
    let x: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let g: Vec<f64> = x.iter().map(|&v| f(v)).collect();
    let gp: Vec<f64> = x.iter().map(|&v| fp(v)).collect();
    let gpp: Vec<f64> = x.iter().map(|&v| fpp(v)).collect();
    let curve = scenarios::graph_curve(f, -1.0, 1.0, 400).unwrap();
    close(elastic_energy_graph(&x, &g, &gp, &gpp).unwrap(), elastic_energy(&curve).unwrap(), 1e-4, "graph");
}

#[test]
fn clifford_circle_curvature_and_energies() {
    let c = clifford_circle(0.0, 400).unwrap();
    for i in 0..c.len() {
        let k = metric_norm(&curvature_vector(&c, i).unwrap());
        close(k * k, 2.0, 1e-4, "|κ|² on C₀");
    }
    let len = hyperbolic_length(&c).unwrap();
    // oracle: adaptive quadrature of |u′|/y over the Euclidean angle
    let oracle = quad::integrate(|t| 1.0 / (2f64.sqrt() + t.sin()), 0.0, 2.0 * PI, 1e-14, 1e-14).unwrap();
    close(len, oracle, 1e-6, "length of C₀");
    let e = elastic_energy(&c).unwrap();
    close(e, 2.0 * len, 1e-3, "E = 2L");
    assert!(e >= 4.0 * PI);
    close(willmore_energy(&c).unwrap(), 2.0 * PI * PI, 0.01, "Clifford torus");
    close(willmore_energy_direct(&c).unwrap(), 2.0 * PI * PI, 0.01, "Clifford torus direct");
}

#[test]
fn scalar_curvature_sign_follows_orientation() {
    let arc = circle_arc(&clifford_circle_shape(0.0), -2.0, 1.0, 400).unwrap();
    let rev = arc.reversed();
    for i in [10, 200, 390] {
        close(scalar_curvature(&arc, i).unwrap(), 2f64.sqrt(), 1e-3, "ccw");
        close(scalar_curvature(&rev, i).unwrap(), -(2f64.sqrt()), 1e-3, "cw");
    }
}

#[test]
fn geodesics_are_annihilated() {
    let v = scenarios::vertical_geodesic(0.3, 0.5, 4.0, 400).unwrap();
    let s = scenarios::geodesic_arc(1.0, 2.0, 0.4, 2.6, 400).unwrap();
    for c in [&v, &s] {
        for i in 0..c.len() {
            assert!(metric_norm(&curvature_vector(c, i).unwrap()) <= 1e-6);
        }
    }
}

#[test]
fn curvature_converges_at_second_order_with_three_point_stencils() {
    let err = |n: usize| {
        let c = clifford_circle(0.0, n).unwrap();
        let g = CurveGeometry::compute(&c, FdOrder::Second).unwrap();
        (0..n).map(|i| (g.kappa[i].abs() - 2f64.sqrt()).abs()).fold(0.0, f64::max)
    };
    let (e1, e2, e3) = (err(50), err(100), err(200));
    for (a, b) in [(e1, e2), (e2, e3)] {
        let rate = (a / b).log2();
        assert!((1.7..2.5).contains(&rate), "observed order {rate} ({a:e} → {b:e})");
    }
}

#[test]
fn willmore_identity_on_a_suite() {
    let curves = [
        catenary(1.0, 1.0, 400).unwrap(),
        catenary(0.5, 1.0, 400).unwrap(),
        clifford_circle(0.3, 400).unwrap(),
        perturbed_geodesic(0.3, 400).unwrap(),
        scenarios::graph_curve(|x| 1.0 + 0.3 * x * x, -1.0, 1.0, 400).unwrap(),
        circle_arc(&clifford_circle_shape(0.0), -2.5, 0.5, 400).unwrap(),
    ];
    for c in &curves {
        close(willmore_energy(c).unwrap(), willmore_energy_direct(c).unwrap(), 1e-4, "W vs direct");
    }
    close(willmore_energy_direct(&curves[0]).unwrap(), 0.0, 1e-6, "catenoid is minimal");
}

#[test]
fn catenoid_area() {
    let c = catenary(1.0, 1.0, 801).unwrap();
    // 2π∫cosh²x dx over [−1, 1] = π(2 + sinh 2)
    close(surface_area(&c).unwrap(), PI * (2.0 + 2f64.sinh()), 1e-8, "catenoid area");
}

#[test]
fn translated_circle_has_the_same_energy() {
    let a = elastic_energy(&clifford_circle(0.0, 400).unwrap()).unwrap();
    let b = elastic_energy(&clifford_circle(0.7, 400).unwrap()).unwrap();
    close(a, b, 1e-8, "translation");
}

fn moebius() -> impl Strategy<Value = MoebiusMap> {
    (0.5f64..2.0, -1.0f64..1.0, -0.4f64..0.4).prop_map(|(a, b, c)| {
        let d = (1.0 + b * c) / a;
        MoebiusMap::new(a, b, c, d).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn elastic_energy_is_isometry_invariant(m in moebius(), eps in -0.6f64..0.6) {
        let u = perturbed_geodesic(eps, 400).unwrap();
        let v = m.apply_curve(&u).unwrap();
        let (a, b) = (elastic_energy(&u).unwrap(), elastic_energy(&v).unwrap());
        prop_assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn reflection_reverses_scalar_curvature(eps in -0.6f64..0.6) {
        let u = perturbed_geodesic(eps, 200).unwrap();
        let r = reflect_curve(&u, true).unwrap();
        let (gu, gr) = (CurveGeometry::compute(&u, FdOrder::Fourth).unwrap(), CurveGeometry::compute(&r, FdOrder::Fourth).unwrap());
        for i in 0..200 {
            prop_assert!((gu.kappa[i] - gr.kappa[199 - i]).abs() < 1e-6);
        }
    }

    #[test]
    fn length_bounds_distance(eps in -1.0f64..1.0) {
        let u = perturbed_geodesic(eps, 200).unwrap();
        let n = u.len();
        let d = hyperbolic_distance(u.nodes()[0], u.nodes()[n - 1]);
        prop_assert!(hyperbolic_length(&u).unwrap() >= d - 1e-9);
    }
}
