//! Initial data: catenaries, Clifford circles, graphs, and the singular datum
//! made of a figure-eight segment capped by two pairs of circle arcs.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::elastica::{self, ElasticaParams};
use crate::error::{Error, Result};
use crate::hyp2::{self, DiscreteCurve, HPoint};

fn grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { t1 } else { t0 + (t1 - t0) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// The catenary `x ↦ (x, ε cosh(x/ε))` on `[−a, a]`, parametrized by `x`.
pub fn catenary(eps: f64, a: f64, n: usize) -> Result<DiscreteCurve> {
    if !(eps > 0.0 && a > 0.0) {
        return Err(Error::Parameter(format!("catenary needs eps, a > 0 (got {eps}, {a})")));
    }
    let params = grid(-a, a, n);
    let nodes = params
        .iter()
        .map(|&x| HPoint::new(x, eps * (x / eps).cosh()))
        .collect::<Result<Vec<_>>>()?;
    let slope = (a / eps).sinh();
    DiscreteCurve::with_tangents(params, nodes, [1.0, -slope], [1.0, slope])
}

/// Closed-form elastic energy of the catenary on `[−a, a]`:
/// `4(e^{2a/ε} − 1)/(e^{2a/ε} + 1) + 4 tanh(a/ε)`.
pub fn catenary_energy(eps: f64, a: f64) -> f64 {
    let q = (2.0 * a / eps).exp();
    4.0 * (q - 1.0) / (q + 1.0) + 4.0 * (a / eps).tanh()
}

/// A Euclidean circle lying in the upper half-plane (`center.y > radius`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypCircle {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

impl HypCircle {
    pub fn new(cx: f64, cy: f64, radius: f64) -> Result<Self> {
        if radius > 0.0 && cy > radius && cx.is_finite() && cy.is_finite() {
            Ok(HypCircle { cx, cy, radius })
        } else {
            Err(Error::Geometry(format!(
                "circle center ({cx}, {cy}) radius {radius} does not lie in H²"
            )))
        }
    }

    /// The circle scaled about the origin by `eta`.
    pub fn scaled(&self, eta: f64) -> Self {
        HypCircle { cx: eta * self.cx, cy: eta * self.cy, radius: eta * self.radius }
    }

    /// Point at Euclidean angle `phi`.
    pub fn point(&self, phi: f64) -> HPoint {
        HPoint { x: self.cx + self.radius * phi.cos(), y: self.cy + self.radius * phi.sin() }
    }

    /// Counter-clockwise Euclidean unit tangent at angle `phi`.
    pub fn tangent(&self, phi: f64) -> [f64; 2] {
        [-phi.sin(), phi.cos()]
    }

    /// Angle of a point relative to the center.
    pub fn angle_of(&self, p: HPoint) -> f64 {
        (p.y - self.cy).atan2(p.x - self.cx)
    }

    fn shape(&self) -> (f64, f64) {
        let a = self.cy / self.radius;
        (a, (a * a - 1.0).sqrt())
    }

    /// Hyperbolic arc-length primitive `S(φ) = ∫₀^φ dψ / (A + sin ψ)`, `A = c_y/ρ`,
    /// continued monotonically over all real `φ`.
    pub fn arclength_primitive(&self, phi: f64) -> f64 {
        let (a, w) = self.shape();
        let k = (phi / (2.0 * PI)).round();
        let psi = phi - 2.0 * PI * k;
        let base = |t: f64| 2.0 / w * ((a * (0.5 * t).tan() + 1.0) / w).atan();
        2.0 * PI * k / w + base(psi) - base(0.0)
    }

    /// Inverse of [`Self::arclength_primitive`].
    pub fn angle_at_primitive(&self, s: f64) -> f64 {
        let (a, w) = self.shape();
        let target = s + 2.0 / w * (1.0 / w).atan();
        let period = 2.0 * PI / w;
        let k = (target / period).round();
        let rem = target - k * period;
        let psi = 2.0 * ((w * (0.5 * w * rem).tan() - 1.0) / a).atan();
        2.0 * PI * k + psi
    }

    /// Hyperbolic length of the counter-clockwise arc from `phi0` to `phi1`.
    pub fn arc_length(&self, phi0: f64, phi1: f64) -> f64 {
        self.arclength_primitive(phi1) - self.arclength_primitive(phi0)
    }

    /// Full hyperbolic circumference `2π/√(A² − 1)`.
    pub fn circumference(&self) -> f64 {
        2.0 * PI / self.shape().1
    }
}

/// The circle `C_x` with center `(x, √2)` and radius 1.
pub fn clifford_circle_shape(x_center: f64) -> HypCircle {
    HypCircle { cx: x_center, cy: SQRT_2, radius: 1.0 }
}

/// The closed circle `C_x`, counter-clockwise, sampled at `n` points equally
/// spaced in hyperbolic arc length, starting at the lowest point.
pub fn clifford_circle(x_center: f64, n: usize) -> Result<DiscreteCurve> {
    if n < 16 {
        return Err(Error::Parameter(format!("clifford_circle needs n >= 16, got {n}")));
    }
    let circle = clifford_circle_shape(x_center);
    let len = circle.circumference();
    let s0 = circle.arclength_primitive(-0.5 * PI);
    let params: Vec<f64> = (0..n).map(|j| len * j as f64 / n as f64).collect();
    let nodes = params.iter().map(|&s| circle.point(circle.angle_at_primitive(s0 + s))).collect();
    DiscreteCurve::closed(params, nodes)
}

/// An open arc of a circle from angle `phi0` to `phi1` (counter-clockwise when
/// `phi1 > phi0`), sampled at constant hyperbolic speed with parameter equal
/// to hyperbolic arc length.
pub fn circle_arc(circle: &HypCircle, phi0: f64, phi1: f64, n: usize) -> Result<DiscreteCurve> {
    let (s0, s1) = (circle.arclength_primitive(phi0), circle.arclength_primitive(phi1));
    let len = (s1 - s0).abs();
    let sign = (s1 - s0).signum();
    let params = grid(0.0, len, n);
    let nodes: Vec<HPoint> =
        params.iter().map(|&s| circle.point(circle.angle_at_primitive(s0 + sign * s))).collect();
    let t0 = circle.tangent(phi0);
    let t1 = circle.tangent(phi1);
    DiscreteCurve::with_tangents(
        params,
        nodes,
        [sign * t0[0], sign * t0[1]],
        [sign * t1[0], sign * t1[1]],
    )
}

/// Lower bound `√2(1+√2)/(√2−1)` on the cap parameter `h`.
pub fn cap_bound() -> f64 {
    SQRT_2 * (1.0 + SQRT_2) / (SQRT_2 - 1.0)
}

/// Default cap parameter: twice the lower bound.
pub fn default_cap_h() -> f64 {
    2.0 * cap_bound()
}

/// The cap circle `C′ = (h/√2)·C₀ + (−h/√2, 0)`: center `(−h/√2, h)`, radius `h/√2`.
pub fn cap_circle(h: f64) -> Result<HypCircle> {
    if !(h > cap_bound()) || !h.is_finite() {
        return Err(Error::Parameter(format!("cap parameter h = {h} must exceed {}", cap_bound())));
    }
    HypCircle::new(-h / SQRT_2, h, h / SQRT_2)
}

/// Number of intersection points of two circles (0, 1 or 2; 3 for identical).
pub fn circle_intersections(a: &HypCircle, b: &HypCircle) -> usize {
    let d = (a.cx - b.cx).hypot(a.cy - b.cy);
    let (s, t) = (a.radius + b.radius, (a.radius - b.radius).abs());
    if d == 0.0 && t == 0.0 {
        3
    } else if d > s || d < t {
        0
    } else if d == s || d == t {
        1
    } else {
        2
    }
}

/// Largest `η ∈ (0, 1)` for which `η·C′` touches `C_x` in exactly one point
/// with negative first coordinate, and that touching point.
///
/// Both tangency conditions `|c_η − c_x| = ηρ′ ± 1` are quadratics in `ηh`;
/// all real roots are collected and the admissible one with largest `η` kept.
pub fn tangency(x: f64, h: f64) -> Result<(f64, HPoint)> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Parameter(format!("tangency needs x in (0, 1), got {x}")));
    }
    let cap = cap_circle(h)?;
    let cx = clifford_circle_shape(x);
    // |(−t/√2 − x, t − √2)|² = (t/√2 ± 1)² with t = ηh gives
    // t² + √2(x − 3)t + x² + 1 = 0 (external), t² + √2(x − 1)t + x² + 1 = 0 (internal)
    let mut candidates = Vec::new();
    for shift in [3.0, 1.0] {
        let b = SQRT_2 * (x - shift);
        let c = x * x + 1.0;
        let disc = b * b - 4.0 * c;
        if disc < 0.0 {
            continue;
        }
        for t in [0.5 * (-b + disc.sqrt()), 0.5 * (-b - disc.sqrt())] {
            let eta = t / h;
            if eta > 0.0 && eta < 1.0 {
                candidates.push(eta);
            }
        }
    }
    candidates.sort_by(|a, b| b.total_cmp(a));
    for eta in candidates {
        let small = cap.scaled(eta);
        let (dx, dy) = (small.cx - cx.cx, small.cy - cx.cy);
        let d = dx.hypot(dy);
        let sign = if (d - (small.radius + 1.0)).abs() < (d - (small.radius - 1.0).abs()).abs() {
            1.0
        } else if small.radius > 1.0 {
            -1.0
        } else {
            1.0
        };
        let z = HPoint { x: cx.cx + sign * dx / d, y: cx.cy + sign * dy / d };
        if z.x < 0.0 && z.y > 0.0 {
            return Ok((eta, z));
        }
    }
    Err(Error::Geometry(format!("no admissible tangency for x = {x}, h = {h}")))
}

/// Samples the graph `x ↦ (x, f(x))` on `[a, b]`.
pub fn graph_curve(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Result<DiscreteCurve> {
    let params = grid(a, b, n);
    let nodes = params
        .iter()
        .map(|&x| {
            let v = f(x);
            if v > 0.0 {
                HPoint::new(x, v)
            } else {
                Err(Error::Domain(format!("graph value {v} at x = {x} is not positive")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteCurve::new(params, nodes)
}

/// A geodesic arc (Euclidean semicircle centered on the axis) between two
/// angles, sampled at constant hyperbolic speed.
pub fn geodesic_arc(center: f64, radius: f64, phi0: f64, phi1: f64, n: usize) -> Result<DiscreteCurve> {
    // on the semicircle, hyperbolic arc length is atanh-type: s = ln tan(φ/2)
    let s = |phi: f64| (0.5 * phi).tan().ln();
    let (s0, s1) = (s(phi0), s(phi1));
    let params = grid(s0, s1, n);
    let nodes = params
        .iter()
        .map(|&t| {
            let phi = 2.0 * t.exp().atan();
            HPoint::new(center + radius * phi.cos(), radius * phi.sin())
        })
        .collect::<Result<Vec<_>>>()?;
    let dir = |phi: f64| [-phi.sin(), phi.cos()];
    DiscreteCurve::with_tangents(params, nodes, dir(phi0), dir(phi1))
}

/// The vertical geodesic `t ↦ (0, eᵗ)`, `t ∈ [0, 1]`, bent sideways by
/// `eps·sin²(πt)`; end points and (vertical) end tangents are those of the geodesic.
pub fn perturbed_geodesic(eps: f64, n: usize) -> Result<DiscreteCurve> {
    let params = grid(0.0, 1.0, n);
    let nodes = params
        .iter()
        .map(|&t| HPoint::new(eps * (PI * t).sin().powi(2), t.exp()))
        .collect::<Result<Vec<_>>>()?;
    DiscreteCurve::with_tangents(params, nodes, [0.0, 1.0], [0.0, 1.0])
}

/// Vertical geodesic segment from `(x, y0)` to `(x, y1)` at constant speed.
pub fn vertical_geodesic(x: f64, y0: f64, y1: f64, n: usize) -> Result<DiscreteCurve> {
    let params = grid(y0.ln(), y1.ln(), n);
    let nodes = params.iter().map(|&t| HPoint::new(x, t.exp())).collect::<Result<Vec<_>>>()?;
    let s = (y1 - y0).signum();
    DiscreteCurve::with_tangents(params, nodes, [0.0, s], [0.0, s])
}

/// Parameters of the singular datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularDatumSpec {
    /// Figure-eight constraint parameter.
    pub lambda: f64,
    /// Cap-circle parameter.
    pub h: f64,
    /// Number of nodes of the assembled curve.
    pub resolution: usize,
}

impl SingularDatumSpec {
    pub fn new(lambda: f64, resolution: usize) -> Self {
        SingularDatumSpec { lambda, h: default_cap_h(), resolution }
    }
}

/// Everything computed while assembling the singular datum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularDatum {
    pub spec: SingularDatumSpec,
    pub fig8: ElasticaParams,
    /// Center abscissa of the circle `C_x`.
    pub x: f64,
    /// Scale of the cap circle.
    pub eta: f64,
    /// Touching point of `η·C′` and `C_x` (before the final rescaling).
    pub z_star: HPoint,
    /// Lowest point of `C_x` on the imaginary axis (before rescaling).
    pub z: HPoint,
    /// Top point `η(0, h)` (before rescaling).
    pub w: HPoint,
    /// Scale applied to the figure-eight so that its end point is `z`.
    pub fig8_scale: f64,
    /// Hyperbolic lengths of the pieces: cap arc on `η·C′`, arc on `C_x`, figure-eight.
    pub cap_arc_length: f64,
    pub clifford_arc_length: f64,
    pub fig8_length: f64,
    /// Closed-form energies of the figure-eight segment and of one cap `Γ_x`.
    pub fig8_energy: f64,
    pub gamma_energy: f64,
    /// Parameter values (in `[−1, 1]`) of the four junctions.
    pub junctions: [f64; 4],
    pub curve: DiscreteCurve,
}

impl SingularDatum {
    /// Continuum energy `E(figure-eight) + 2·E(Γ_x)`.
    pub fn energy(&self) -> f64 {
        self.fig8_energy + 2.0 * self.gamma_energy
    }
}

/// Abscissa `x ∈ (0, 1)` for which the reversed figure-eight end tangent
/// `v = (v₁, v₂)` lies on the tangent line of `C_x` at `z_x`.
///
/// The counter-clockwise tangent of `C_x` at `z_x = (0, √2 − √(1−x²))` is
/// `(√(1−x²), −x)`; the angle mismatch with `v` is monotone in `x` and is
/// driven to zero by bisection.
pub fn match_abscissa(v: [f64; 2]) -> Result<f64> {
    let target = v[1].atan2(v[0]);
    let mismatch = |x: f64| (-x).atan2((1.0 - x * x).sqrt()) - target;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if mismatch(lo) * mismatch(hi) > 0.0 {
        return Err(Error::Geometry(format!(
            "figure-eight end tangent ({}, {}) is not matched by any C_x",
            v[0], v[1]
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mismatch(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Builds the singular datum: the reversed figure-eight segment for `λ`,
/// capped on both sides by an arc of `C_x` and an arc of `η·C′`, rescaled so
/// that both ends sit at `(0, 1)` with tangents `∓(0, 1)`, and sampled at
/// constant hyperbolic speed on `[−1, 1]`.
pub fn build_singular_datum(spec: &SingularDatumSpec) -> Result<SingularDatum> {
    if spec.resolution < 16 {
        return Err(Error::Parameter("singular datum needs at least 16 nodes".into()));
    }
    let cap = cap_circle(spec.h)?;
    let fig8 = elastica::figure_eight_solve(spec.lambda)
        .map_err(|e| Error::Parameter(format!("figure-eight solve: {e}")))?;
    let half = fig8.half_period();
    let end = elastica::evaluate(&fig8, &[half])?[0];
    let tangent = elastica::figure_eight_tangent(&fig8)?;
    let reversed = [-tangent.tangent.vx, -tangent.tangent.vy];
    let x = match_abscissa(reversed)
        .map_err(|e| Error::Geometry(format!("tangent matching: {e}")))?;
    let cx = clifford_circle_shape(x);
    let z = HPoint { x: 0.0, y: SQRT_2 - (1.0 - x * x).sqrt() };
    let (eta, z_star) = tangency(x, spec.h).map_err(|e| Error::Geometry(format!("tangency: {e}")))?;
    let small = cap.scaled(eta);
    let w = HPoint { x: 0.0, y: eta * spec.h };
    let fig8_scale = z.y / end.1;

    // Γ_x: clockwise on η·C′ from w (angle 0) to z*, then counter-clockwise
    // on C_x from z* to z.
    let phi_w = 0.0;
    let mut phi_star_cap = small.angle_of(z_star);
    if phi_star_cap > phi_w {
        phi_star_cap -= 2.0 * PI;
    }
    let phi_star_cx = cx.angle_of(z_star);
    let mut phi_z = cx.angle_of(z);
    while phi_z < phi_star_cx {
        phi_z += 2.0 * PI;
    }
    let cap_len = small.arc_length(phi_star_cap, phi_w);
    let cx_len = cx.arc_length(phi_star_cx, phi_z);
    let fig8_len = 2.0 * half;
    let total = 2.0 * (cap_len + cx_len) + fig8_len;

    let cuts = [cap_len, cap_len + cx_len, cap_len + cx_len + fig8_len, total - cap_len];
    let n = spec.resolution;
    let s_nodes: Vec<f64> = (0..n).map(|j| total * j as f64 / (n - 1) as f64).collect();
    // Nodes are produced on the left half and mirrored; the figure-eight
    // part is evaluated for all nodes in one quadrature sweep.
    let mid = 0.5 * total;
    let mut left: Vec<Option<HPoint>> = vec![None; n];
    let mut fig_idx = Vec::new();
    let mut fig_s = Vec::new();
    for (j, &s) in s_nodes.iter().enumerate() {
        if s > mid + 1e-15 * total {
            continue;
        }
        if s <= cuts[0] {
            let phi = small.angle_at_primitive(small.arclength_primitive(phi_w) - s);
            left[j] = Some(small.point(phi));
        } else if s <= cuts[1] {
            let phi = cx.angle_at_primitive(cx.arclength_primitive(phi_star_cx) + (s - cuts[0]));
            left[j] = Some(cx.point(phi));
        } else {
            // reversed figure-eight: arc length σ = s − cuts[1] maps to γ(half − σ)
            fig_idx.push(j);
            fig_s.push(half - (s - cuts[1]));
        }
    }
    let fig_pts = elastica::evaluate(&fig8, &fig_s)?;
    for (k, &j) in fig_idx.iter().enumerate() {
        let (gx, gy) = fig_pts[k];
        left[j] = Some(HPoint { x: fig8_scale * gx, y: fig8_scale * gy });
    }
    let mut nodes = vec![HPoint { x: 0.0, y: 1.0 }; n];
    let scale = 1.0 / w.y;
    for j in 0..n {
        let p = match left[j] {
            Some(p) => p,
            None => {
                let q = left[n - 1 - j].ok_or_else(|| {
                    Error::Geometry("singular datum node without mirror partner".into())
                })?;
                HPoint { x: -q.x, y: q.y }
            }
        };
        nodes[j] = HPoint::new(scale * p.x, scale * p.y)?;
    }
    // the axis points are exact by construction
    nodes[0] = HPoint { x: 0.0, y: 1.0 };
    nodes[n - 1] = HPoint { x: 0.0, y: 1.0 };
    let params: Vec<f64> = s_nodes.iter().map(|s| -1.0 + 2.0 * s / total).collect();
    let curve = DiscreteCurve::with_tangents(params, nodes, [0.0, -1.0], [0.0, 1.0])?;
    let fig8_energy = elastica::figure_eight_segment_energy(&fig8);
    Ok(SingularDatum {
        spec: *spec,
        fig8,
        x,
        eta,
        z_star,
        z,
        w,
        fig8_scale,
        cap_arc_length: cap_len,
        clifford_arc_length: cx_len,
        fig8_length: fig8_len,
        fig8_energy,
        gamma_energy: 2.0 * (cap_len + cx_len),
        junctions: cuts.map(|c| -1.0 + 2.0 * c / total),
        curve,
    })
}

/// Hyperbolic length of the curve, for convenience in scenario checks.
pub fn length(curve: &DiscreteCurve) -> Result<f64> {
    hyp2::hyperbolic_length(curve)
}
