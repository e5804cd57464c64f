use std::f64::consts::{PI, SQRT_2};

use hypwill::elastica;
use hypwill::hyp2::{self, elastic_energy, hyperbolic_length, metric_norm, curvature_vector};
use hypwill::scenarios::*;

fn close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (diff {:e})", (a - b).abs());
}

fn angle(u: [f64; 2], v: [f64; 2]) -> f64 {
    let cross = u[0] * v[1] - u[1] * v[0];
    let dot = u[0] * v[0] + u[1] * v[1];
    cross.atan2(dot).abs()
}

#[test]
fn catenary_examples() {
    let c = catenary(1.0, 1.0, 400).unwrap();
    close(elastic_energy(&c).unwrap(), 8.0 * 1f64.tanh(), 1e-4, "ε = 1");
    let c = catenary(0.2, 1.0, 2001).unwrap();
    let e10 = 10f64.exp();
    close(elastic_energy(&c).unwrap(), 4.0 * (e10 - 1.0) / (e10 + 1.0) + 4.0 * 5f64.tanh(), 1e-4, "ε = 0.2");
    close(c.min_height(), 0.2, 1e-15, "min height");
    assert!(catenary(0.0, 1.0, 10).is_err());
}

#[test]
fn clifford_circles() {
    let c0 = clifford_circle(0.0, 400).unwrap();
    for i in 0..c0.len() {
        let k = metric_norm(&curvature_vector(&c0, i).unwrap());
        close(k * k, 2.0, 1e-4, "|κ|²");
    }
    let e0 = elastic_energy(&c0).unwrap();
    for x in [-1.3, 0.4, 2.0] {
        let e = elastic_energy(&clifford_circle(x, 400).unwrap()).unwrap();
        assert!(e >= 4.0 * PI);
        close(e, e0, 1e-8, "translation invariance");
    }
}

#[test]
fn cap_circle_geometry() {
    let c = cap_circle(10.0).unwrap();
    close(c.cx, -10.0 / SQRT_2, 1e-14, "cx");
    close(c.cy, 10.0, 1e-14, "cy");
    close(c.radius, 10.0 / SQRT_2, 1e-14, "radius");
    // lowest point of C′ above the highest point of every C_x
    assert!(c.cy - c.radius > SQRT_2 + 1.0);
    assert!(cap_circle(cap_bound()).is_err());
    // dilations are isometries: arcs of η·C′ keep their energy
    let a = circle_arc(&c, -1.0, 0.5, 400).unwrap();
    let b = circle_arc(&c.scaled(0.3), -1.0, 0.5, 400).unwrap();
    close(elastic_energy(&a).unwrap(), elastic_energy(&b).unwrap(), 1e-8, "scaling");
}

#[test]
fn tangency_is_single_touch() {
    let (eta, z) = tangency(0.5, 10.0).unwrap();
    let small = cap_circle(10.0).unwrap().scaled(eta);
    let cx = clifford_circle_shape(0.5);
    let d = (small.cx - cx.cx).hypot(small.cy - cx.cy);
    let res = (d - (small.radius + 1.0)).abs().min((d - (small.radius - 1.0).abs()).abs());
    assert!(res < 1e-10, "tangency residual {res:e}");
    close((z.x - cx.cx).hypot(z.y - cx.cy), 1.0, 1e-10, "z* on C_x");
    close((z.x - small.cx).hypot(z.y - small.cy), small.radius, 1e-10, "z* on η·C′");
    assert!(z.x < 0.0);
    let cap = cap_circle(10.0).unwrap();
    let counts = [
        circle_intersections(&cap.scaled(eta - 1e-6), &cx),
        circle_intersections(&cap.scaled(eta + 1e-6), &cx),
    ];
    assert!(counts.contains(&0) && counts.contains(&2), "{counts:?}");
}

#[test]
fn graphs() {
    let flat = graph_curve(|_| 1.0, 0.0, 1.0, 50).unwrap();
    assert!(flat.nodes().iter().all(|p| p.y == 1.0));
    let g = graph_curve(f64::cosh, -1.0, 1.0, 400).unwrap();
    assert_eq!(g.nodes(), catenary(1.0, 1.0, 400).unwrap().nodes());
    let semi = graph_curve(|x| (1.0 - x * x).sqrt(), -0.9, 0.9, 400).unwrap();
    close(elastic_energy(&semi).unwrap(), 0.0, 1e-4, "semicircle");
    assert!(graph_curve(|x| x, -1.0, 1.0, 20).is_err());
}

#[test]
fn singular_data() {
    let mut prev = f64::INFINITY;
    for lambda in [0.4, 0.2, 0.1] {
        let d = build_singular_datum(&SingularDatumSpec::new(lambda, 2001)).unwrap();
        let c = &d.curve;
        let n = c.len();
        assert!(c.min_height() > 0.0);
        for p in [c.nodes()[0], c.nodes()[n - 1]] {
            assert!(p.x.abs() < 1e-4 && (p.y - 1.0).abs() < 1e-4);
        }
        // discrete end tangents against ∓(0, 1)
        let st = c.stencils(hyp2::FdOrder::Fourth).unwrap();
        let t0 = [st.d1_at(&c.xs(), 0), st.d1_at(&c.ys(), 0)];
        let t1 = [st.d1_at(&c.xs(), n - 1), st.d1_at(&c.ys(), n - 1)];
        assert!(angle(t0, [0.0, -1.0]) < 2f64.to_radians() && angle(t1, [0.0, 1.0]) < 2f64.to_radians());
        // symmetry u(−x) = −conj(u(x))
        for i in 0..n {
            let (a, b) = (c.nodes()[i], c.nodes()[n - 1 - i]);
            assert!((a.x + b.x).abs() < 1e-6 && (a.y - b.y).abs() < 1e-6);
        }
        // The assembled curve is only C¹: |κ|² jumps at the junctions and the
        // stencils straddling them cost about 1e-2 at this resolution. The
        // additive check below is done piece by piece.
        let e = elastic_energy(c).unwrap();
        close(e, d.energy(), 2e-2, "assembled E(u₀)");
        assert!(d.energy() < prev);
        prev = d.energy();

        // caps: E(Γ) = 2L(Γ) on sampled arcs of both circles
        let small = cap_circle(d.spec.h).unwrap().scaled(d.eta);
        let cx = clifford_circle_shape(d.x);
        let mut phi_star_cap = small.angle_of(d.z_star);
        if phi_star_cap > 0.0 {
            phi_star_cap -= 2.0 * PI;
        }
        let a1 = circle_arc(&small, 0.0, phi_star_cap, 800).unwrap();
        let mut phi_z = cx.angle_of(d.z);
        while phi_z < cx.angle_of(d.z_star) {
            phi_z += 2.0 * PI;
        }
        let a2 = circle_arc(&cx, cx.angle_of(d.z_star), phi_z, 800).unwrap();
        let (e_g, l_g) = (
            elastic_energy(&a1).unwrap() + elastic_energy(&a2).unwrap(),
            hyperbolic_length(&a1).unwrap() + hyperbolic_length(&a2).unwrap(),
        );
        close(e_g, 2.0 * l_g, 1e-3, "E(Γ) = 2L(Γ)");
        close(e_g, d.gamma_energy, 1e-3, "E(Γ) closed form");
        let f8 = elastic_energy(&elastica::figure_eight_segment(&d.fig8, 1601).unwrap()).unwrap();
        close(f8 + 2.0 * e_g, d.energy(), 1e-3, "E(u₀) = E(figure-eight) + 2E(Γ)");

        // C¹ junctions: z* (between the two circles) and z (circle to figure-eight)
        let t_cap = small.tangent(phi_star_cap);
        let t_cx = cx.tangent(cx.angle_of(d.z_star));
        assert!(angle([-t_cap[0], -t_cap[1]], t_cx) < 1e-6, "junction at z*");
        let ft = elastica::figure_eight_tangent(&d.fig8).unwrap().tangent;
        let t_z = cx.tangent(phi_z);
        assert!(angle(t_z, [-ft.vx, -ft.vy]) < 1e-6, "junction at z");
    }
}
